"""Regenerate the committed golden reports for the bundled programs.

Each golden is the timing-free part of `faultline attack NAME --deps --prove`
at one fault, using the harness from the corpus manifest.

    python3 scripts/make_goldens.py            # rewrite the files
    python3 scripts/make_goldens.py --check    # exit 1 on any difference
"""
import argparse
import json
import sys
import tempfile
from pathlib import Path

from faultline import corpus
from faultline import report as R
from faultline.cli import main as cli

GOLDEN_DIR = Path(corpus.__file__).parent / "golden"


def golden_for(name: str, budget: float = 300.0) -> dict:
    with tempfile.TemporaryDirectory() as d:
        out = Path(d) / "rep.json"
        code = cli(["attack", name, "--deps", "--prove", "--max-faults", "1", "--budget", str(budget),
                    "--format", "json", "--json", str(out)])
        if code == 3:
            raise RuntimeError(f"attack on {name} failed")
        g = R.load(out).golden()
        g["exit_code"] = code
        return g


def dump(g: dict) -> str:
    return json.dumps(g, indent=2, sort_keys=True) + "\n"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true")
    ap.add_argument("names", nargs="*")
    args = ap.parse_args(argv)
    GOLDEN_DIR.mkdir(exist_ok=True)
    bad = 0
    for name in args.names or corpus.names(suite_only=True):
        text = dump(golden_for(name))
        path = GOLDEN_DIR / f"{name}.json"
        if args.check:
            same = path.exists() and path.read_text() == text
            bad += not same
            print(f"{name}: {'ok' if same else 'DIFFERS'}", file=sys.stderr)
        else:
            path.write_text(text)
            print(f"wrote {path}", file=sys.stderr)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
