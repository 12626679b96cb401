"""Smoke test for the Python bindings.

Build first:  cargo build --release -p floer-cube-py --features extension-module
"""

import importlib.util
import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    target = ROOT / "target" / "release"
    for name in ("libfloer_cube_py.so", "libfloer_cube_py.dylib", "floer_cube_py.dll"):
        lib = target / name
        if lib.exists():
            spec = importlib.util.spec_from_file_location("floer_cube_py", lib)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit(f"no built extension under {target}")


def main():
    fc = load()
    trefoil = sorted(fc.homfly("1 1 1", 2))
    assert trefoil == [(-4, 0, -1), (-2, -2, 1), (-2, 2, 1)], trefoil
    assert fc.homfly("", 1) == [(0, 0, 1)]

    page = json.loads(fc.compute("1 1 1", 2))
    assert page["comparison"]["match"] is True
    assert page["total_dim"] == 15

    eight = json.loads(fc.compute("1 -2 1 -2", 3, variant="reduced", edge=2))
    assert eight["comparison"]["match"] is True

    try:
        fc.compute("1 1", 2)
    except ValueError as e:
        assert "component" in str(e)
    else:
        raise AssertionError("a two-component link was accepted")
    print("ok")


if __name__ == "__main__":
    main()
