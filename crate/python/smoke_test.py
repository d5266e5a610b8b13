"""Smoke test for the zrefine_py extension.

Uses an installed module when there is one, otherwise builds the extension
with cargo and loads it from the build directory.
"""

import importlib
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "crates" / "core" / "corpus"


def load():
    try:
        return importlib.import_module("zrefine_py")
    except ImportError:
        pass
    subprocess.run(
        ["cargo", "build", "--release", "-p", "zrefine-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release"
    built = next(p for p in (lib / "libzrefine_py.so", lib / "libzrefine_py.dylib") if p.exists())
    tmp = Path(tempfile.mkdtemp())
    shutil.copy(built, tmp / "zrefine_py.so")
    sys.path.insert(0, str(tmp))
    return importlib.import_module("zrefine_py")


def read(rel):
    return (CORPUS / rel).read_text()


def main():
    z = load()
    r = z.check(read("setseq/abstract.tex"), read("setseq/concrete.tex"), read("setseq/retrieve.tex"), oracle=True)
    assert r["schema"] == 1, r
    assert r["verdict"] == "pass", r["verdict"]
    assert r["oracle"]["verdict"] == "pass"
    print("set/sequence:", [c["verdict"] for c in r["conditions"]])

    r = z.check(
        read("boxoffice/marlowe.tex"),
        read("boxoffice/kurbel.tex"),
        read("boxoffice/retrieve.tex"),
        given_size=2,
        workers=2,
    )
    assert r["verdict"] == "fail", r["verdict"]
    failed = [c for c in r["conditions"] if c["verdict"] == "fail"]
    trace = [s["label"] for s in failed[0]["counterexample"]["trace"]]
    print("box office:", failed[0]["condition"], "fails via", " -> ".join(trace))

    sal = z.translate(read("setseq/concrete.tex"), context="c", nat_hi=3)
    assert sal.startswith("c : CONTEXT = BEGIN")
    assert "NAT : TYPE = [0..3];" in sal

    try:
        z.translate("\\begin{schema}{S}\n")
    except ValueError as e:
        print("error surfaced:", e)
    else:
        raise AssertionError("malformed input accepted")
    print("ok")


if __name__ == "__main__":
    main()
