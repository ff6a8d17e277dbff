#!/usr/bin/env python3
"""Smoke test for the nonclassical_py extension module.

Builds nothing itself: run `cargo build -p nonclassical-py` first, then
`python3 python/smoke_test.py`. The script copies the compiled cdylib into
a temp directory under the importable module name and exercises the main
entry points.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def locate_cdylib():
    names = ["libnonclassical_py.so", "libnonclassical_py.dylib", "nonclassical_py.dll"]
    candidates = []
    for profile in ("debug", "release"):
        for name in names:
            p = ROOT / "target" / profile / name
            if p.exists():
                candidates.append(p)
    if not candidates:
        sys.exit("extension not built; run: cargo build -p nonclassical-py")
    return max(candidates, key=lambda p: p.stat().st_mtime)


def main():
    lib = locate_cdylib()
    tmp = Path(tempfile.mkdtemp(prefix="nonclassical-py-"))
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    shutil.copy(lib, tmp / f"nonclassical_py{suffix}")
    sys.path.insert(0, str(tmp))
    import nonclassical_py as ncl

    bell = ncl.bell()
    assert bell.dims() == [2, 2]
    assert abs(bell.von_neumann_entropy()) < 1e-10
    assert abs(bell.mutual_information([0]) - 2.0) < 1e-10

    est = ncl.req(bell, grid=True)
    assert abs(est["value"] - 1.0) < 1e-3, est
    assert est["bound_kind"] == "exact"

    est = ncl.negativity_of_quantumness(ncl.werner(2, 0.5), grid=True)
    assert abs(est["value"] - 0.25) < 1e-3, est

    cls = ncl.classical_diagonal([0.5, 0.3, 0.15, 0.05], [2, 2])
    verdict = ncl.is_classical(cls)
    assert verdict["is_classical"] and verdict["method"] == "spectral_certificate"
    assert ncl.is_classical(ncl.mix2())["is_classical"] is False

    out = ncl.run_activation(bell)
    assert abs(out["e_distillable"] - 1.0) < 1e-10
    assert abs(out["negativity"] - 0.5) < 1e-10
    assert out["final_state"].dims() == [2, 2, 2, 2]

    m3 = ncl.maximally_entangled(3)
    est = ncl.req(m3, restarts=4)
    assert abs(est["value"] - math.log2(3)) < 1e-3, est

    rho = ncl.random_thm3(2, 2, seed=7)
    again = ncl.random_thm3(2, 2, seed=7)
    assert rho.matrix() == again.matrix()
    q = ncl.req(rho, grid=True)["value"]
    mi = rho.mutual_information([0])
    assert -1e-9 <= q <= mi + 1e-6

    assert ncl.default_m(4) == 16

    basis = ncl.ProductBasis.identity([2, 2])
    assert len(basis.locals()) == 2

    # constructor validation surfaces as ValueError
    try:
        ncl.DensityMatrix([[0.9, 0.0], [0.0, 0.0]], [2])
    except ValueError:
        pass
    else:
        raise AssertionError("invalid state was accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
