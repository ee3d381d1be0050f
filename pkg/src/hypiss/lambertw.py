"""Real branch -1 of the Lambert W function on (-1/e, 0).

Used by the isothermal Euler equilibrium density, whose argument is of
order -225 exp(x - 225): far too small in magnitude for naive seeding but
comfortably inside the double range.  The solve runs on the substituted
equation u - ln u = -ln(-z) with u = -w >= 1, which is monotone and
convex, then polishes with Halley steps on w e^w = z itself so the
returned value satisfies the defining equation to near round-off.
"""

from __future__ import annotations

import math

__all__ = ["lambert_w_minus1"]

_INV_E = math.exp(-1.0)


def _branch_series(p: float) -> float:
    # Expansion about the branch point z = -1/e with p = sqrt(2(1 + e z)).
    return -1.0 - p * (1.0 + p * (1.0 / 3.0 + p * (11.0 / 72.0
                       + p * (43.0 / 540.0 + p * (769.0 / 17280.0)))))


def _halley_polish(w: float, z: float, iterations: int = 3) -> float:
    for _ in range(iterations):
        ew = math.exp(w)
        f = w * ew - z
        if f == 0.0:
            break
        w1 = w + 1.0
        denom = ew * w1 - (w + 2.0) * f / (2.0 * w1)
        step = f / denom
        w_next = w - step
        if w_next >= -1.0:
            # stay on the lower branch
            w_next = -1.0 - 1e-17
        w = w_next
        if abs(step) <= 1e-16 * (2.0 + abs(w)):
            break
    return w


def lambert_w_minus1(z: float) -> float:
    """w <= -1 with w * exp(w) = z, for z in (-1/e, 0).

    The branch point z = -1/e maps to -1.  Residuals |w e^w - z| stay
    below about 1e-13 |z| across the whole branch domain down to
    magnitudes near the double-precision floor.
    """
    z = float(z)
    if z >= 0.0:
        raise ValueError(f"branch -1 of Lambert W needs z in (-1/e, 0), got {z}")
    sigma = 1.0 + math.e * z
    if sigma < -1e-9:
        raise ValueError(f"z = {z} below the branch point -1/e")
    if sigma <= 0.0:
        return -1.0
    if sigma < 1e-6:
        p = math.sqrt(2.0 * sigma)
        w = _branch_series(p)
        if p > 1e-5:
            w = _halley_polish(w, z, iterations=2)
        return w
    # Newton on g(u) = u - ln u - L for u = -w, seeded above the root.
    L = -math.log(-z)
    u = L + math.log1p(L) + 0.5
    for _ in range(80):
        g = u - math.log(u) - L
        gp = 1.0 - 1.0 / u
        if gp <= 0.0:
            break
        step = g / gp
        u -= step
        if u < 1.0:
            u = 1.0 + 1e-12
        if abs(step) <= 1e-14 * u:
            break
    return _halley_polish(-u, z)
