"""Tokenizer for FIC source text.

Besides ordinary C tokens this handles three source-level conveniences:
``//@ assert ...;`` annotation lines (lexed as an ``@`` token followed by the
annotation's own tokens), ``#define NAME <int>`` constants, and
``#ifdef``/``#ifndef``/``#else``/``#endif`` blocks driven by build flags.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import LexError, UnsupportedConstruct


@dataclass(frozen=True)
class Token:
    kind: str  # "int" | "ident" | "string" | "op" | "eof"
    text: str
    line: int
    col: int
    value: int = 0
    unsigned: bool = False

    @property
    def loc(self):
        return (self.line, self.col)


_PUNCT = sorted(
    """<<= >>= -> ++ -- << >> <= >= == != && || += -= *= /= %= &= |= ^=
    { } ( ) [ ] ; , . = + - * / % & | ^ ~ ! < > : ? @""".split(),
    key=len,
    reverse=True,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<annot>//@)
  | (?P<comment>//[^\n]*)
  | (?P<block>/\*.*?\*/)
  | (?P<nl>\n)
  | (?P<int>0[xX][0-9a-fA-F]+[uU]?|[0-9]+[uU]?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<string>"[^"\n]*")
  | (?P<op>"""
    + "|".join(re.escape(p) for p in _PUNCT)
    + r""")
    """,
    re.VERBOSE | re.DOTALL,
)


def preprocess(text: str, defines=frozenset(), path: str = "<fic>") -> tuple[str, dict]:
    """Resolve conditional blocks and collect integer #defines.

    Removed lines are blanked rather than deleted so that token positions
    still point into the original file.
    """
    out = []
    macros: dict[str, str] = {}
    active = [True]
    for lineno, line in enumerate(text.split("\n"), 1):
        stripped = line.strip()
        if not stripped.startswith("#"):
            out.append(line if all(active) else "")
            continue
        parts = stripped[1:].split()
        directive = parts[0] if parts else ""
        if directive in ("ifdef", "ifndef"):
            if len(parts) != 2:
                raise LexError(f"malformed #{directive}", (lineno, 1), path)
            hit = parts[1] in defines or parts[1] in macros
            active.append(hit if directive == "ifdef" else not hit)
        elif directive == "else":
            if len(active) == 1:
                raise LexError("#else without #ifdef", (lineno, 1), path)
            active[-1] = not active[-1]
        elif directive == "endif":
            if len(active) == 1:
                raise LexError("#endif without #ifdef", (lineno, 1), path)
            active.pop()
        elif directive == "define":
            if all(active):
                if len(parts) != 3 or not re.fullmatch(r"-?(0[xX][0-9a-fA-F]+|[0-9]+)[uU]?", parts[2]):
                    raise UnsupportedConstruct("only integer #define constants are supported", (lineno, 1), path)
                macros[parts[1]] = parts[2]
        elif directive == "include":
            pass  # headers are not needed: builtins are known to the checker
        else:
            raise UnsupportedConstruct(f"preprocessor directive #{directive}", (lineno, 1), path)
        out.append("")
    if len(active) != 1:
        raise LexError("unterminated #ifdef", (len(out), 1), path)
    return "\n".join(out), macros


def tokenize(text: str, path: str = "<fic>", defines=frozenset()) -> list[Token]:
    text, macros = preprocess(text, defines, path)
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LexError(f"unexpected character {text[pos]!r}", (line, pos - line_start + 1), path)
        kind = m.lastgroup
        lexeme = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "block":
            nls = lexeme.count("\n")
            if nls:
                line += nls
                line_start = pos + lexeme.rfind("\n") + 1
        elif kind == "annot":
            tokens.append(Token("op", "@", line, col))
        elif kind == "int":
            tokens.append(_int_token(lexeme, line, col))
        elif kind == "ident":
            if lexeme in macros:
                tok = _int_token(macros[lexeme].lstrip("-"), line, col)
                if macros[lexeme].startswith("-"):
                    tokens.append(Token("op", "(", line, col))
                    tokens.append(Token("op", "-", line, col))
                    tokens.append(tok)
                    tokens.append(Token("op", ")", line, col))
                else:
                    tokens.append(tok)
            else:
                tokens.append(Token("ident", lexeme, line, col))
        elif kind == "string":
            tokens.append(Token("string", lexeme[1:-1], line, col))
        elif kind == "op":
            tokens.append(Token("op", lexeme, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _int_token(lexeme: str, line: int, col: int) -> Token:
    unsigned = lexeme[-1] in "uU"
    digits = lexeme.rstrip("uU")
    value = int(digits, 16) if digits.lower().startswith("0x") else int(digits, 10)
    return Token("int", lexeme, line, col, value=value, unsigned=unsigned)
