"""Smoke test of the bubblelab Python extension.

Build and install the extension first:

    pip install --no-build-isolation -e crates/bubblelab-py

then run ``python3 python/smoke_test.py``. Exits non-zero on the first
failed check.
"""

import copy
import math
import sys

import bubblelab

PARAMS = {
    "sigma": 1.0, "sigma_bar": 1.0, "mu_l": 1.0, "rho_l": 1.0,
    "kappa": 1.0, "c_g": 3.0, "R_spec": 2.0, "T_inf": 1.0,
}
GENERIC = {"params": PARAMS, "problem": {"M": 1.0, "V": 10.0}}
SMALL_V = {"params": PARAMS, "problem": {"M": 1.0, "V_ratio": 1e-3}}


def check(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    if not ok:
        sys.exit(1)


def main():
    eq = bubblelab.equilibrium(GENERIC)
    lo, hi = eq["bracket"]
    check("equilibrium radius inside bracket", lo < eq["r_star"] < hi,
          f"R = {eq['r_star']:.12g}")

    # M(0) against its closed form.
    r, rb = eq["r_star"], eq["rbar_star"]
    rt = PARAMS["R_spec"] * PARAMS["T_inf"]
    expected = 4 * math.pi / (3 * rt) * (4 / r**2 + 6 / (r * rb) - 2 * r**2 / rb**4)
    m0 = bubblelab.eval_m(GENERIC, 0j)
    check("M(0) closed form", abs(m0 - expected) <= 1e-12 * abs(expected),
          f"M(0) = {m0.real:.15g}")

    spec = bubblelab.spectrum(SMALL_V)
    unit = spec["pi2_kappa_bar"]
    check("small-volume real root in (-pi^2 kappa_bar, 0)",
          spec["gap"]["certified"] and -unit < spec["abscissa"] < 0,
          f"abscissa / unit = {spec['abscissa'] / unit:.6f}")
    check("matrix eigenvalues match the roots",
          spec["matrix_max_distance"] <= 1e-6,
          f"distance = {spec['matrix_max_distance']:.3e}")

    b = bubblelab.bounds(SMALL_V)
    check("0 < Theta1 <= Theta2 < 1", 0 < b["Theta1"] <= b["Theta2"] < 1)

    run = copy.deepcopy(GENERIC)
    run["solver"] = {"N": 32, "rtol": 1e-7, "atol": 1e-11}
    run["ic"] = {"shape": "slow-mode", "norm": 1e-4}
    traj = bubblelab.simulate(run)
    drift = max(abs(x) for x in traj["mass_drift"])
    check("mass conserved", drift <= 1e-8, f"drift = {drift:.2e}")
    e = traj["energy"]
    check("energy nonincreasing",
          all(b <= a + 1e-6 * abs(a) for a, b in zip(e, e[1:])))
    rate = traj["fitted_rate"]
    check("decay rate matches the spectrum",
          abs(rate - bubblelab.spectrum(GENERIC)["abscissa"]) <= 0.05 * abs(rate),
          f"rate = {rate:.6f}")

    bad = copy.deepcopy(GENERIC)
    del bad["params"]["sigma"]
    try:
        bubblelab.equilibrium(bad)
        check("missing key raises ValueError", False)
    except ValueError as err:
        check("missing key raises ValueError", "sigma" in str(err), str(err))

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
