"""Reference computations that share no code with the package.

Each oracle takes a different route to a quantity the package computes:
high-precision closed forms, brute-force enumeration, or classical
theorems with known answers.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np


def gram_mp(points, intervals, dps: int = 40) -> np.ndarray:
    """``G[j, k] = (1/2pi) int_S exp(i(l_k - l_j)t) dt`` from the endpoint formula in extended precision."""
    with mpmath.workdps(dps):
        pts = [mpmath.mpf(float(x)) for x in points]
        ivs = [(mpmath.mpf(float(a)), mpmath.mpf(float(b))) for a, b in intervals]
        n = len(pts)
        out = np.zeros((n, n), dtype=complex)
        for j in range(n):
            for k in range(n):
                w = pts[k] - pts[j]
                if w == 0:
                    val = sum(b - a for a, b in ivs)
                else:
                    val = sum((mpmath.expj(w * b) - mpmath.expj(w * a)) / (1j * w) for a, b in ivs)
                out[j, k] = complex(val / (2 * mpmath.pi))
    return out


def fourier_integral_quad(intervals, omega: float, dps: int = 30) -> complex:
    """``int_S exp(i omega t) dt`` by adaptive quadrature."""
    with mpmath.workdps(dps):
        f = lambda t: mpmath.expj(omega * t)  # noqa: E731
        return complex(sum(mpmath.quad(f, [a, b]) for a, b in intervals))


def window_density_brute(points, window, length: float, samples: int = 20001) -> tuple[float, float]:
    """Min and max of ``#(pts & [a, a+l)) / l`` over a fine scan of ``a`` plus all critical positions."""
    pts = sorted(points)
    w0, w1 = window
    hi = max(w0, w1 - length)
    cands = set(np.linspace(w0, hi, samples).tolist())
    for x in pts:
        for c in (x, x - length):
            for eps in (0.0, 1e-9, -1e-9):
                if w0 <= c + eps <= hi:
                    cands.add(c + eps)
    counts = [sum(1 for x in pts if a <= x < a + length) for a in cands]
    return min(counts) / length, max(counts) / length


def chebotarev_samples(n: int, lam, spec) -> bool:
    """For prime ``n`` every minor of the DFT matrix is nonzero (Chebotarev),
    so ``lam`` samples spectrum ``spec`` in Z_n exactly when it is at least as large."""
    assert all(n % d for d in range(2, int(math.isqrt(n)) + 1)), "needs a prime"
    return len(lam) >= len(spec)


def exact_rank_roots_of_unity(n: int, rows, cols) -> int:
    """Rank of ``exp(2 pi i r c / n)`` by Gaussian elimination over Q(zeta_n) via sympy."""
    import sympy

    z = sympy.exp(2 * sympy.pi * sympy.I / n)
    m = sympy.Matrix([[sympy.nsimplify(z ** ((r * c) % n)) for c in cols] for r in rows])
    return m.rank(simplify=True)


def poisson_partial_mp(eps: float, m: int, dps: int = 30) -> float:
    """``sum_{|n|<=m} (-1)^n (sin(eps n)/(eps n))^2`` in extended precision."""
    with mpmath.workdps(dps):
        e = mpmath.mpf(eps)
        acc = mpmath.mpf(1)
        for k in range(1, m + 1):
            x = e * k
            acc += 2 * (-1) ** k * (mpmath.sin(x) / x) ** 2
        return float(acc)


def poisson_partial_half_pi(m: int) -> float:
    """Closed form at ``eps = pi/2`` and even ``m``: only odd ``n`` contribute,
    and the remaining tail is a trigamma value."""
    assert m % 2 == 0
    with mpmath.workdps(30):
        return float(2 / mpmath.pi**2 * mpmath.psi(1, mpmath.mpf(m + 1) / 2))


def periodic_instances(max_steps: int):
    """Every nonempty proper and full subset of ``{0, .., n-1}`` for ``n <= max_steps``."""
    for n in range(1, max_steps + 1):
        for k in range(0, n + 1):
            for sub in itertools.combinations(range(n), k):
                yield n, sub


def complementarity_expected(n: int, subset, delta: Fraction) -> tuple[Fraction, Fraction]:
    """Exact lower density of ``subset*delta + n*delta*Z`` and upper density of its lattice complement."""
    period = n * delta
    return Fraction(len(subset)) / period, Fraction(n - len(subset)) / period
