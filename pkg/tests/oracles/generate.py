"""Independent high-precision reference values (mpmath), frozen into values.json.

Run by hand: ``python tests/oracles/generate.py``.  The test suite only reads
the JSON file.  Every quantity here is computed from its defining integral or
sum with mpmath quadrature and root finding, sharing no code with rispace.
"""

import json
import os

import mpmath as mp

mp.mp.dps = 40


def quad0(f, b=1):
    """int_0^b f(t) dt through t = b e^(-tau), which tames endpoint singularities."""
    b = mp.mpf(b)
    return mp.quad(lambda tau: f(b * mp.exp(-tau)) * b * mp.exp(-tau), [0, 1, 10, 100, mp.inf])


def lux(modular):
    """inf{s : modular(s) <= 1} by mpmath root finding on log s."""
    return mp.exp(mp.findroot(lambda ls: modular(mp.exp(ls)) - 1, 0))


def main():
    out = {}
    # orlicz modular of t^(-1/2) ln(e/t)^(-1) under t^2: int t^-1 ln(e/t)^-2
    out["orlicz_logpower_modular"] = quad0(lambda t: 1 / (t * mp.log(mp.e / t) ** 2))
    # luxemburg norm of t^(-1/3) on (0,1/2] plus 2 on (1/2,1] under y^2 ln(e+y)
    def mod_c(s):
        f = lambda y: y**2 * mp.log(mp.e + y)
        return quad0(lambda t: f(t ** (-mp.mpf(1) / 3) / s), mp.mpf(1) / 2) + f(2 / s) / 2
    out["luxemburg_mixed_powlog"] = lux(mod_c)
    # nakano norm of t^(-1/4) with p(t) = 2 + t
    def mod_d(s):
        return quad0(lambda t: (t ** (-mp.mpf(1) / 4) / s) ** (2 + t))
    out["nakano_affine_power"] = lux(mod_d)
    # marcinkiewicz norm of x* = 3 chi(0,1/4] + t^-1/2 ... rearranged: x = 3 chi_(0,1/4], 1 on (1/4,1], phi = t^(1/3)
    def R(t):
        prim = 3 * t if t <= mp.mpf(1) / 4 else mp.mpf(3) / 4 + (t - mp.mpf(1) / 4)
        return prim / t ** (mp.mpf(1) / 3)
    grid = [mp.mpf(k) / 4000 for k in range(1, 4001)]
    best = max(grid, key=R)
    tmax = mp.findroot(lambda t: mp.diff(R, t), best) if best not in (grid[0], grid[-1]) else best
    out["marcinkiewicz_step_cuberoot"] = max(R(best), R(tmax), R(mp.mpf(1)), R(mp.mpf(1) / 4))
    # lorentz norm of t^(-1/4) ln(e/t)^(1/2) (decreasing) under phi = t^(1/2) ln(e/t)^(1/2)
    out["lorentz_logpower_logphi"] = quad0(
        lambda t: t ** (-mp.mpf(1) / 4) * mp.sqrt(mp.log(mp.e / t))
        * (mp.log(mp.e / t) - 1) / (2 * mp.sqrt(t) * mp.sqrt(mp.log(mp.e / t))))
    # integral of phi' for phi = t^(1/2) ln(e/t) over (0, 1/4]
    out["phi_sqrt_log_quarter"] = mp.sqrt(mp.mpf(1) / 4) * mp.log(4 * mp.e)
    # luxemburg norm of the single-block index witness x_1 = (t - 1/4)^(-1/3) on (1/4, 1/2] under t^2
    out["index_block1_norm"] = mp.sqrt(quad0(lambda u: u ** (-mp.mpf(2) / 3), mp.mpf(1) / 4))
    # lorentz escape for x = t^-1/4, psi = t^1/2: F(1) = int t^-1/4 (1/2) t^-1/2
    out["escape_F1_power"] = quad0(lambda t: t ** (-mp.mpf(3) / 4) / 2)
    path = os.path.join(os.path.dirname(__file__), "values.json")
    with open(path, "w") as fh:
        json.dump({k: float(v) for k, v in out.items()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps({k: float(v) for k, v in out.items()}, indent=2))


if __name__ == "__main__":
    main()
