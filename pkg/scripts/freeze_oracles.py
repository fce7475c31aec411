"""Compute reference values with an independent 40-digit implementation and freeze them.

Nothing from the ``oms`` package is imported here: the steady state comes
from the polynomial roots of the full intensity cubic and the response from
a direct high-precision solve of the five sideband equations, both written
out from the equations of motion.  Parameters are in units of omega_m1.

    python scripts/freeze_oracles.py  # rewrites tests/data/oracles.json
"""

import json
import pathlib

import mpmath as mp

mp.mp.dps = 40
OUT = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "oracles.json"

W = mp.mpf("12.6e9")  # omega_m1 / 2 pi in Hz; every scenario rate is divided by it


def base(targets=("1", "1", "1")):
    r = lambda hz: mp.mpf(hz) / W
    return {
        "kappa": [r("73e6")] * 3,
        "omega_m": [mp.mpf(1), mp.mpf(1)],
        "gamma": [r("88e3")] * 2,
        "o": {"o_m1": r("1.5e6"), "o_m2": r("1.5e6"), "o_m31": r("1.5e6"), "o_m32": r("1.5e6")},
        "omega_d": [mp.mpf(2)] * 2,
        "omega_p": [mp.mpf("0.2")] * 2,
        "phi_d": [mp.mpf(0)] * 2,
        "phi_p": [mp.mpf(0)] * 2,
        "targets": [mp.mpf(t) for t in targets],
    }


def lorentz(p, j):
    return p["omega_m"][j] / (p["gamma"][j] ** 2 + p["omega_m"][j] ** 2)


def drive(p):
    return sum(p["omega_d"][k] * mp.expj(p["phi_d"][k]) for k in range(2))


def probe(p):
    return sum(p["omega_p"][k] * mp.expj(p["phi_p"][k]) for k in range(2))


def static_x(p, i3):
    # b_j + b_j^* for steady b_j = i O_m3j I3 / (gamma_j + i omega_mj)
    o = p["o"]
    return [2 * o[f"o_m3{j + 1}"] * i3 * lorentz(p, j) for j in range(2)]


def bare(p):
    """Bare detunings reproducing the effective targets."""
    d1, d2, d3 = p["targets"]
    i3 = abs(drive(p)) ** 2 / (p["kappa"][2] ** 2 + d3**2)
    x1, x2 = static_x(p, i3)
    o = p["o"]
    return [d1 + o["o_m1"] * x1, d2 + o["o_m2"] * x2, d3 + o["o_m31"] * x1 + o["o_m32"] * x2]


def intensity_roots(p, da):
    o = p["o"]
    beta = 2 * (o["o_m31"] ** 2 * lorentz(p, 0) + o["o_m32"] ** 2 * lorentz(p, 1))
    k3, d3, dd2 = p["kappa"][2], da[2], abs(drive(p)) ** 2
    # I (k^2 + (d - beta I)^2) - D^2 expanded in powers of I
    coeffs = [beta**2, -2 * d3 * beta, k3**2 + d3**2, -dd2]
    roots = mp.polyroots(coeffs, maxsteps=200, extraprec=200)
    real = sorted(mp.re(r) for r in roots if abs(mp.im(r)) < mp.mpf(10) ** -25 and mp.re(r) >= 0)
    return real


def steady(p, da, i3):
    o = p["o"]
    b = [1j * o[f"o_m3{j + 1}"] * i3 / (p["gamma"][j] + 1j * p["omega_m"][j]) for j in range(2)]
    x1, x2 = 2 * mp.re(b[0]), 2 * mp.re(b[1])
    eff = [da[0] - o["o_m1"] * x1, da[1] - o["o_m2"] * x2, da[2] - o["o_m31"] * x1 - o["o_m32"] * x2]
    a = [drive(p) / (p["kappa"][i] + 1j * eff[i]) for i in range(3)]
    return a, b, eff


def sideband(p, a, eff, x):
    """Direct solve of the five sideband equations in the omega_m1 frame."""
    o = p["o"]
    k = p["kappa"]
    u = [1j * x - 1j * (eff[i] - 1) - k[i] for i in range(3)]
    v = [1j * x - 1j * (p["omega_m"][j] - 1) - p["gamma"][j] for j in range(2)]
    a1, a2, a3 = a
    m = mp.matrix(5, 5)
    m[0, 0], m[0, 3] = -u[0], -1j * o["o_m1"] * a1
    m[1, 1], m[1, 4] = -u[1], -1j * o["o_m2"] * a2
    m[2, 2], m[2, 3], m[2, 4] = -u[2], -1j * o["o_m31"] * a3, -1j * o["o_m32"] * a3
    m[3, 2], m[3, 3] = -1j * o["o_m31"] * mp.conj(a3), -v[0]
    m[4, 2], m[4, 4] = -1j * o["o_m32"] * mp.conj(a3), -v[1]
    d = probe(p)
    z = mp.lu_solve(m, mp.matrix([d, d, d, 0, 0]))
    e1 = 2 * k[0] * z[0] - p["omega_p"][0]
    e2 = 2 * k[1] * z[1] - p["omega_p"][1]
    return z, abs(e1 / p["omega_p"][1]) ** 2, abs(e2 / p["omega_p"][0]) ** 2


def cplx(z):
    return [float(mp.re(z)), float(mp.im(z))]


def case(name, p, xs):
    da = bare(p)
    roots = intensity_roots(p, da)
    a, b, eff = steady(p, da, roots[0])
    points = []
    for x in xs:
        z, t21, t12 = sideband(p, a, eff, mp.mpf(x))
        points.append({"x": x, "t_21": float(t21), "t_12": float(t12), "delta": [cplx(v) for v in z]})
    return {
        "preset": name,
        "bare_detunings": [float(v) for v in da],
        "intensity_roots": [float(r) for r in roots],
        "a_s": [cplx(v) for v in a],
        "b_s": [cplx(v) for v in b],
        "points": points,
    }


def fig3(o1, o2):
    p = base()
    r = lambda hz: mp.mpf(hz) / W
    p["o"] = {"o_m1": r(o1), "o_m2": r(o2), "o_m31": r("48.5e6"), "o_m32": r("48.5e6")}
    return p


def fig4(k1, k2):
    p = base()
    p["kappa"] = [mp.mpf(k1) / W, mp.mpf(k2) / W, mp.mpf("73e6") / W]
    return p


def fig5c():
    p = base()
    p["phi_p"] = [-2 * mp.pi / 3, 2 * mp.pi / 3]
    return p


def geometry():
    omega_a = 2 * mp.pi * mp.mpf("193.4e12")
    length = mp.mpf("5.19e-3")
    m_eff = mp.mpf("20e-9")  # 20 micrograms in kg
    omega_m = 2 * mp.pi * mp.mpf("12.6e9")
    hbar = mp.mpf("1.054571817e-34")
    return float(omega_a / length * mp.sqrt(hbar / (m_eff * omega_m)))


def bistable():
    # kappa_3 = 0.1, Delta_a3 = 1, O = 0.1, gamma = 0.01, omega_m = 1, |D_d| = 1
    beta = 2 * (2 * mp.mpf("0.1") ** 2 * 1 / (mp.mpf("0.01") ** 2 + 1))
    roots = mp.polyroots([beta**2, -2 * beta, mp.mpf("0.01") + 1, -1], maxsteps=200, extraprec=200)
    return sorted(float(mp.re(r)) for r in roots if abs(mp.im(r)) < 1e-25)


def main():
    xs = [-0.15, -0.1, -0.0008, 0.0, 0.0008, 0.05, 0.1, 0.17]
    data = {
        "units": "omega_m1",
        "cases": [
            case("fig2a", base(), xs),
            case("fig2c", base(("1.1", "0.9", "1")), xs),
            case("fig3a", fig3("1e6", "60e6"), xs),
            case("fig4a", fig4("83e6", "3e6"), xs),
            case("fig5c", fig5c(), xs),
        ],
        "geometry_coupling_rad_per_s": geometry(),
        "bistable_intensity_roots": bistable(),
    }
    OUT.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
