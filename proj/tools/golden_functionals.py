"""Brute-force values of the weak-form functionals for an atomic fixture.

Writes the golden file compared against `nck functionals` in the unit tests.
Sums are plain Python loops; the x3 integrals use mpmath at 30 digits.
"""
import json
import sys

import mpmath as mp

mp.mp.dps = 30


def phi(x):  # phi_eps with eps = 1
    return (1 - x) ** 2 if x < 1 else mp.mpf(0)


def Phi(x):  # antiderivative of phi
    return (1 - (1 - x) ** 3) / 3 if x < 1 else mp.mpf(1) / 3


def lam(x, y):
    return phi(x + y) + phi(abs(x - y)) - 2 * phi(max(x, y))


def ell(x):
    return x * phi(x) - 2 * Phi(x)


def weight(x1, x2, x3):
    if x1 > 0 and x2 > 0 and x3 > 0:
        x4 = x1 + x2 - x3
        if x4 <= 0:
            return mp.mpf(0)
        return mp.sqrt(min(x1, x2, x3, x4)) / mp.sqrt(x1 * x2 * x3)
    if x3 == 0 and x1 > 0 and x2 > 0:
        return 1 / mp.sqrt(x1 * x2)
    if x2 == 0 and x1 > x3 > 0:
        return 1 / mp.sqrt(x1 * x3)
    if x1 == 0 and x2 > x3 > 0:
        return 1 / mp.sqrt(x2 * x3)
    return mp.mpf(0)


def dphi(x1, x2, x3):
    x4 = max(mp.mpf(0), x1 + x2 - x3)
    return phi(x4) + phi(x3) - phi(x2) - phi(x1)


def q4(atoms):
    cubic = mp.mpf(0)
    for x1, w1 in atoms:
        for x2, w2 in atoms:
            for x3, w3 in atoms:
                W = weight(x1, x2, x3)
                if W:
                    cubic += w1 * w2 * w3 * W * dphi(x1, x2, x3)
    cross = mp.mpf(0)
    for x1, w1 in atoms:
        for x2, w2 in atoms:
            top = x1 + x2
            if top == 0:
                continue
            pts = sorted({p for p in (mp.mpf(0), top, x1, x2, top / 2, mp.mpf(1), top - 1) if 0 <= p <= top})
            f = lambda x3: mp.sqrt(x3) * weight(x1, x2, x3) * dphi(x1, x2, x3) if 0 < x3 < top else mp.mpf(0)
            cross += w1 * w2 * mp.quad(f, pts) / 2
    return cubic + cross


def main(out):
    atom0 = mp.mpf("0.3")
    atoms = [(mp.mpf("0.4"), mp.mpf("1.0")), (mp.mpf("1.3"), mp.mpf("0.5")), (mp.mpf("2.2"), mp.mpf("0.8"))]
    quad = sum(lam(x, y) / mp.sqrt(x * y) * w * v for x, w in atoms for y, v in atoms)
    lin_t = sum(ell(x) / mp.sqrt(x) * w for x, w in atoms)
    lin = sum((ell(x) + x * phi(0)) / mp.sqrt(x) * w for x, w in atoms)
    full = q4([(mp.mpf(0), atom0)] + atoms)
    script = q4(atoms)
    measure = {"version": "nck-measure/1", "atom0": float(atom0), "atoms": [[float(x), float(w)] for x, w in atoms]}
    golden = {
        "phi": "phi_eps:1",
        "measure": measure,
        "q3_quadratic": float(quad),
        "q3_linear": float(lin),
        "q3_linear_tilde": float(lin_t),
        "q3": float(quad - lin),
        "q3_tilde": float(quad - lin_t),
        "q4_full": float(full),
        "q4_script": float(script),
    }
    with open(out, "w") as f:
        json.dump(golden, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1])
