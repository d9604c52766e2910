#!/usr/bin/env python3
"""Smoke test for the kpztt_py extension module.

Build the extension first:

    cargo build --release -p kpztt-py

then run this script; it locates the cdylib in target/ and imports it
directly (no maturin needed for a smoke check).
"""

import math
import pathlib
import shutil
import sys
import tempfile


def locate_module() -> pathlib.Path:
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libkpztt_py.so", "libkpztt_py.dylib", "kpztt_py.dll")
    ]
    for c in candidates:
        if c.exists():
            return c
    sys.exit("build the extension first: cargo build --release -p kpztt-py")


def main() -> None:
    lib = locate_module()
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="kpztt-smoke-"))
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    shutil.copy2(lib, tmp / ("kpztt_py" + suffix))
    sys.path.insert(0, str(tmp))

    import kpztt_py as k

    checks = 0

    def expect(name, got, want, tol):
        nonlocal checks
        checks += 1
        if not math.isfinite(got) or abs(got - want) > tol:
            sys.exit(f"FAIL {name}: got {got!r}, want {want} +- {tol}")
        print(f"ok  {name}: {got:.12g}")

    expect("Ai(0)", k.airy_ai(0.0), 0.3550280538878172, 1e-12)
    expect("F2(0)", k.tracy_widom_f2(0.0), 0.9693728283552627, 1e-7)
    fp, fpp = k.f2_derivs(0.0)
    expect("F2'(0)", fp, 0.066975307, 1e-6)
    expect("psi(10, 0) ~ 10", k.short_time_psi(10.0), 10.0, 1e-8)
    expect("F0(5) ~ 1", k.baik_rains_f0(5.0), 1.0, 1e-4)

    value, residual = k.ftt(8.0, 0.0, 0.0, 0.0, 1.0, 32, 72)
    expect("F_tt marginal at xi1=8", value, k.tracy_widom_f2(0.0, 32), 1e-4)
    expect("u-integral imaginary residue", residual, 0.0, 1e-8)

    coeffs = k.long_time_coeffs(0.0, 0.0, 0.0, 0.0, 40)
    if not (coeffs["e1"] > 0 and math.isfinite(coeffs["e2"])):
        sys.exit(f"FAIL long_time_coeffs: {coeffs}")
    print(f"ok  e1 = {coeffs['e1']:.6g}, e2 = {coeffs['e2']:.6g}")
    checks += 1

    sim = k.simulate(samples=1500, t_scale=30.0, seed=7)
    if sim["alpha"] != 1.0 or len(sim["h1"]) != 1500:
        sys.exit(f"FAIL simulate: alpha={sim['alpha']} n={len(sim['h1'])}")
    mean_h1 = sum(sim["h1"]) / len(sim["h1"])
    # the Tracy-Widom mean is ~ -1.77; finite-T bias keeps this loose
    if not -3.0 < mean_h1 < 0.0:
        sys.exit(f"FAIL simulate: mean h1 = {mean_h1}")
    print(f"ok  simulate: mean rescaled height {mean_h1:.4f}")
    checks += 1

    print(f"kpztt_py {k.__version__}: all {checks} smoke checks passed")


if __name__ == "__main__":
    main()
