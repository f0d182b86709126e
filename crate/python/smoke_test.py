#!/usr/bin/env python3
"""Smoke test for the outerlab_py extension module.

Build the module first:

    cargo build -p outerlab-python --release

The script loads the cdylib straight from the cargo target directory, so no
installation step is needed.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path


def load_module():
    root = Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        lib = root / "target" / profile / "libouterlab_py.so"
        if lib.exists():
            staging = Path(tempfile.mkdtemp(prefix="outerlab_py_"))
            shutil.copy(lib, staging / "outerlab_py.so")
            sys.path.insert(0, str(staging))
            import outerlab_py

            return outerlab_py
    sys.exit("build the extension first: cargo build -p outerlab-python --release")


def main():
    ol = load_module()

    # exact two-roses distance
    s = ol.MarkedGraph.rose(["1/2", "1/2"])
    t = ol.MarkedGraph.rose(["1/3", "2/3"])
    fwd, fwd_w, bwd, bwd_w, d = ol.distance(s, t)
    assert (fwd, bwd) == ("4/3", "3/2"), (fwd, bwd)
    assert (fwd_w, bwd_w) == ("b", "a")
    assert abs(d - math.log(2)) < 1e-12

    # translation lengths and candidates
    assert t.translation_length("ab") == "1/1"
    assert t.systole() == "1/3"
    cands = dict((c, l) for c, _, l in t.candidates())
    assert cands["a"] == "1/3" and cands["b"] == "2/3"

    # automorphism action is isometric
    phi = ol.Automorphism.golden()
    assert phi.apply("a") == "ab"
    assert phi.iwip_heuristic()
    sa, ta = s.act(phi), t.act(phi)
    assert abs(ol.distance(sa, ta)[4] - d) < 1e-12

    # Whitehead primitivity and filling
    basis = ol.primitive_basis("aab", 2)
    assert basis is not None and len(basis) == 2, basis
    assert ol.primitive_basis("abab", 2) is None
    verdict, _ = ol.common_factor(["a", "ab"], 2)
    assert verdict == "fills"
    verdict, factor = ol.common_factor(["a", "b"], 3)
    assert verdict == "contained" and len(factor) == 2

    # exact minimization over the thick part
    g, value = ol.minimize([("abAB", "1/1")], "1/20", 2)
    assert value == "2/1", value
    round_trip = ol.MarkedGraph.from_json(g.to_json())
    assert ol.distance(g, round_trip)[4] == 0.0

    # shadow map
    cls, factor = ol.MarkedGraph.standard_rose(2).shadow()
    assert (cls, factor) == ("a", "a")

    # a small golden axis
    kappa, rows = ol.golden_axis(4, 1, "1/20")
    assert math.isfinite(kappa) and len(rows) == 9
    assert rows[4][0] == "0/1"

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
