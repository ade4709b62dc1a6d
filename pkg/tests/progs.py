"""Random FIC programs for property tests."""
from hypothesis import strategies as st

TYPES = ["u8", "u32", "i8", "i32"]
BINOPS = ["+", "-", "*", "&", "|", "^", "<<", ">>", "/", "%"]
CMPS = ["==", "!=", "<", "<=", ">", ">="]


@st.composite
def expr(draw, names, depth=0):
    if depth >= 2 or draw(st.integers(0, 2)) == 0:
        if draw(st.booleans()):
            return draw(st.sampled_from(names))
        return str(draw(st.integers(0, 300)))
    kind = draw(st.integers(0, 3))
    a = draw(expr(names, depth + 1))
    b = draw(expr(names, depth + 1))
    if kind == 0:
        return f"({a} {draw(st.sampled_from(CMPS))} {b})"
    if kind == 1:
        return f"(arr[{a} & 3])"
    return f"({a} {draw(st.sampled_from(BINOPS))} {b})"


@st.composite
def stmts(draw, names, depth=0, n=None):
    out = []
    for _ in range(draw(st.integers(1, 4)) if n is None else n):
        k = draw(st.integers(0, 5 if depth < 2 else 2))
        if k in (0, 1):
            out.append(f"{draw(st.sampled_from(names))} = {draw(expr(names))};")
        elif k == 2:
            out.append(f"arr[{draw(expr(names))} & 3] = {draw(expr(names))};")
        elif k == 3:
            body = "\n".join(draw(stmts(names, depth + 1)))
            alt = "\n".join(draw(stmts(names, depth + 1)))
            out.append(f"if ({draw(expr(names))}) {{\n{body}\n}} else {{\n{alt}\n}}")
        elif k == 4:
            v = f"k{depth}"
            body = "\n".join(draw(stmts(names, depth + 1)))
            out.append(f"for ({v} = 0; {v} < {draw(st.integers(0, 4))}; {v}++) {{\n{body}\n}}")
        else:
            out.append(f"//@ assert {draw(expr(names))};")
    return out


@st.composite
def program(draw):
    tys = [draw(st.sampled_from(TYPES)) for _ in range(3)]
    names = ["x", "y", "g"]
    body = draw(stmts(names, 0, draw(st.integers(2, 6))))
    return "\n".join([
        f"{tys[2]} g = {draw(st.integers(0, 9))};",
        "u8 arr[4];",
        f"void main({tys[0]} x, {tys[1]} y)",
        "{",
        "    u32 k0; u32 k1; u32 k2;",
        *("    " + line for s in body for line in s.splitlines()),
        "}",
    ])

