"""Uniformly discrete point sets: separation, uniform densities, lattice tools.

Two representations are supported.  A *window* set is a finite list of
points observed inside an interval ``[w0, w1]``; densities computed from it
are finite-window estimates.  A *periodic* set ``offsets + pZ`` is infinite,
and its densities are exact rationals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

__all__ = [
    "UDSet",
    "DensityEstimate",
    "Perturbation",
    "ComplementarityReport",
    "SetError",
    "as_fraction",
    "separation_constant",
    "lower_density",
    "on_lattice",
    "upper_density",
    "complement_in_lattice",
    "check_complementarity",
    "perturb",
    "round_to_lattice",
    "is_delta_perturbation",
]

LATTICE_RTOL = 1e-12


class SetError(ValueError):
    pass


def as_fraction(x) -> Fraction:
    """Rational value of ``x``.

    Floats snap to the nearest fraction with denominator <= 1e9 when that
    reproduces the float to a few ulps, so ``0.1`` and ``1/3`` come out as
    1/10 and 1/3.  Strings such as ``"2/3"`` are accepted.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    xf = float(x)
    if not math.isfinite(xf):
        raise SetError(f"non-finite value {x!r}")
    snapped = Fraction(xf).limit_denominator(10**9)
    if abs(float(snapped) - xf) <= 4 * np.finfo(float).eps * abs(xf):
        return snapped
    return Fraction(xf)


def _strictly_increasing(values: Sequence[float]) -> bool:
    return all(b > a for a, b in zip(values, values[1:]))


@dataclass(frozen=True)
class UDSet:
    """A uniformly discrete set, either a finite window or ``offsets + pZ``."""

    kind: str
    points: tuple[float, ...] = ()
    window: tuple[float, float] | None = None
    period: float | None = None
    offsets: tuple[float, ...] = ()
    period_exact: Fraction | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind == "window":
            pts = tuple(float(x) for x in self.points)
            if not _strictly_increasing(pts):
                raise SetError("points must be strictly increasing")
            if self.window is None:
                if not pts:
                    raise SetError("an empty window set needs an explicit window")
                win = (pts[0], pts[-1])
            else:
                win = (float(self.window[0]), float(self.window[1]))
            if win[0] > win[1]:
                raise SetError(f"bad window {win}")
            if pts and (pts[0] < win[0] or pts[-1] > win[1]):
                raise SetError(f"points fall outside window {win}")
            object.__setattr__(self, "points", pts)
            object.__setattr__(self, "window", win)
        elif self.kind == "periodic":
            if self.period is None:
                raise SetError("periodic set needs a period")
            pq = self.period_exact if self.period_exact is not None else as_fraction(self.period)
            if pq <= 0:
                raise SetError("period must be positive")
            p = float(pq)
            offs = tuple(float(x) for x in self.offsets)
            if not _strictly_increasing(offs):
                raise SetError("offsets must be strictly increasing")
            if offs and (offs[0] < 0 or offs[-1] >= p):
                raise SetError(f"offsets must lie in [0, {p})")
            object.__setattr__(self, "period", p)
            object.__setattr__(self, "period_exact", pq)
            object.__setattr__(self, "offsets", offs)
        else:
            raise SetError(f"unknown kind {self.kind!r}")

    # constructors

    @classmethod
    def from_points(cls, points: Sequence[float], window: Sequence[float] | None = None) -> "UDSet":
        pts = sorted(float(x) for x in points)
        return cls("window", tuple(pts), None if window is None else tuple(window))

    @classmethod
    def periodic_set(cls, period, offsets: Sequence[float]) -> "UDSet":
        pq = as_fraction(period)
        p = float(pq)
        offs = sorted({float(x) % p for x in offsets})
        return cls("periodic", period=p, offsets=tuple(offs), period_exact=pq)

    @classmethod
    def lattice(cls, spacing, shift: float = 0.0) -> "UDSet":
        """The set ``shift + spacing*Z``."""
        return cls.periodic_set(spacing, [shift])

    @classmethod
    def from_dict(cls, obj: Mapping) -> "UDSet":
        kind = obj.get("kind")
        if kind == "window":
            return cls.from_points(obj.get("points", []), obj.get("window"))
        if kind == "periodic":
            if "period" not in obj:
                raise SetError("periodic set JSON needs 'period'")
            return cls.periodic_set(obj["period"], obj.get("offsets", []))
        raise SetError(f"unknown set kind {kind!r}")

    @classmethod
    def from_json(cls, text: str) -> "UDSet":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        if self.kind == "window":
            return {"kind": "window", "points": list(self.points), "window": list(self.window)}
        return {"kind": "periodic", "period": self.period, "offsets": list(self.offsets)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    # views

    @property
    def is_periodic(self) -> bool:
        return self.kind == "periodic"

    def __len__(self) -> int:
        if self.is_periodic:
            raise TypeError("a periodic set is infinite")
        return len(self.points)

    def truncate(self, lo: float, hi: float) -> "UDSet":
        """Window set of the points in ``[lo, hi]``."""
        if self.is_periodic:
            p = self.period
            kmin = math.floor(lo / p) - 1
            kmax = math.ceil(hi / p) + 1
            pts = [k * p + o for k in range(kmin, kmax + 1) for o in self.offsets]
            pts = sorted(x for x in pts if lo <= x <= hi)
        else:
            pts = [x for x in self.points if lo <= x <= hi]
        return UDSet("window", tuple(pts), (float(lo), float(hi)))

    def as_array(self) -> np.ndarray:
        if self.is_periodic:
            raise TypeError("truncate a periodic set before asking for its points")
        return np.asarray(self.points, dtype=float)


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    window_length: float | None
    exact: bool
    exact_value: Fraction | None = None

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class Perturbation:
    """Displacements ``eps[x]`` with ``|eps[x]| <= delta``.

    Keys are the points of a window set, or the offsets of a periodic set
    (in which case the perturbed set stays periodic).
    """

    delta: float
    shifts: Mapping[float, float]

    def __post_init__(self) -> None:
        if self.delta < 0:
            raise SetError("delta must be nonnegative")
        worst = max((abs(v) for v in self.shifts.values()), default=0.0)
        if worst > self.delta * (1 + 1e-12):
            raise SetError(f"shift {worst} exceeds bound delta={self.delta}")

    @classmethod
    def from_rule(cls, base: UDSet, rule: Callable[[float], float], delta: float) -> "Perturbation":
        keys = base.offsets if base.is_periodic else base.points
        return cls(float(delta), {x: float(rule(x)) for x in keys})

    @classmethod
    def random(cls, base: UDSet, delta: float, seed: int) -> "Perturbation":
        """Independent uniform shifts in ``[-delta, delta]``.

        Shifts are ``delta * u`` with ``u`` drawn from the seed alone, so the
        same seed at two values of delta gives proportional perturbations.
        """
        keys = base.offsets if base.is_periodic else base.points
        u = np.random.default_rng(seed).uniform(-1.0, 1.0, size=len(keys))
        return cls(float(delta), {x: float(delta * ui) for x, ui in zip(keys, u)})

    def shift_array(self, keys: Sequence[float]) -> np.ndarray:
        try:
            return np.array([self.shifts[x] for x in keys], dtype=float)
        except KeyError as exc:
            raise SetError(f"no shift given for point {exc.args[0]!r}") from None


@dataclass(frozen=True)
class ComplementarityReport:
    lower: Fraction
    upper_complement: Fraction
    total: Fraction
    expected: Fraction
    passes: bool

    def to_dict(self) -> dict:
        return {
            "lower_density": str(self.lower),
            "upper_density_complement": str(self.upper_complement),
            "sum": str(self.total),
            "one_over_delta": str(self.expected),
            "passes": self.passes,
        }


def separation_constant(lam: UDSet) -> float:
    """Infimum of distances between distinct points."""
    if lam.is_periodic:
        if not lam.offsets:
            raise SetError("separation undefined for the empty set")
        offs = lam.offsets
        gaps = [b - a for a, b in zip(offs, offs[1:])]
        gaps.append(lam.period - offs[-1] + offs[0])
        return min(gaps)
    if len(lam.points) < 2:
        raise SetError("separation undefined for fewer than two points")
    return float(np.min(np.diff(lam.points)))


def _window_counts(lam: UDSet, length: float) -> np.ndarray:
    w0, w1 = lam.window
    if length > (w1 - w0) * (1 + 1e-15):
        raise SetError(f"window length {length} exceeds the observation window {w1 - w0}")
    pts = np.asarray(lam.points, dtype=float)
    shifted = pts - length
    # count(a) = #{x : a <= x < a + l} = #{x : x - l < a <= x}; it is constant on
    # pieces (c_i, c_{i+1}] whose right ends are the critical positions below.
    hi = max(w0, w1 - length)
    cand = np.concatenate(([w0, hi], pts, shifted))
    cand = np.unique(cand[(cand >= w0) & (cand <= hi)])
    return np.searchsorted(shifted, cand, side="left") - np.searchsorted(pts, cand, side="left")


def _density(lam: UDSet, length: float | None, pick) -> DensityEstimate:
    if lam.is_periodic:
        q = Fraction(len(lam.offsets)) / lam.period_exact
        return DensityEstimate(float(q), None, True, q)
    if length is None:
        raise SetError("window sets need a window length l")
    if length <= 0:
        raise SetError("window length must be positive")
    counts = _window_counts(lam, float(length))
    return DensityEstimate(float(pick(counts)) / length, float(length), False)


def lower_density(lam: UDSet, length: float | None = None) -> DensityEstimate:
    """``min_a #(lam & [a, a+l)) / l`` over windows inside the observation window.

    Exact ``#offsets / p`` for periodic sets, where ``length`` is ignored.
    """
    if length is not None and length <= 0:
        raise SetError("window length must be positive")
    return _density(lam, length, np.min)


def upper_density(lam: UDSet, length: float | None = None) -> DensityEstimate:
    if length is not None and length <= 0:
        raise SetError("window length must be positive")
    return _density(lam, length, np.max)


def _lattice_index(x: float, delta: float) -> int:
    r = x / delta
    k = round(r)
    if abs(r - k) > LATTICE_RTOL * max(1.0, abs(r)):
        raise SetError(f"point {x!r} is not on the lattice {delta!r}Z")
    return int(k)


def _periods_per_step(lam: UDSet, delta: float) -> int:
    ratio = lam.period / delta
    n = round(ratio)
    if n < 1 or abs(ratio - n) > LATTICE_RTOL * max(1.0, ratio):
        raise SetError(f"period {lam.period!r} is not a multiple of delta={delta!r}")
    return int(n)


def complement_in_lattice(lam: UDSet, delta: float) -> UDSet:
    """``delta*Z \\ lam``; within the window for window sets, per period otherwise."""
    if delta <= 0:
        raise SetError("delta must be positive")
    if lam.is_periodic:
        n = _periods_per_step(lam, delta)
        taken = {_lattice_index(o, delta) % n for o in lam.offsets}
        step = lam.period_exact / n
        offs = [float(k * step) for k in range(n) if k not in taken]
        return UDSet("periodic", period=lam.period, offsets=tuple(offs), period_exact=lam.period_exact)
    taken = {_lattice_index(x, delta) for x in lam.points}
    w0, w1 = lam.window
    kmin = math.ceil(w0 / delta - LATTICE_RTOL * max(1.0, abs(w0 / delta)))
    kmax = math.floor(w1 / delta + LATTICE_RTOL * max(1.0, abs(w1 / delta)))
    pts = [k * delta for k in range(kmin, kmax + 1) if k not in taken]
    pts = [min(max(x, w0), w1) for x in pts]
    return UDSet("window", tuple(pts), lam.window)


def check_complementarity(lam: UDSet, delta: float) -> ComplementarityReport:
    """Lower density of ``lam`` plus upper density of its lattice complement.

    Everything is an integer count over the rational period, so the
    comparison against ``1/delta`` is exact.
    """
    if not lam.is_periodic:
        raise SetError("complementarity is checked exactly for periodic sets only")
    gamma = complement_in_lattice(lam, delta)
    n = _periods_per_step(lam, delta)
    lo = lower_density(lam).exact_value
    up = upper_density(gamma).exact_value
    # the lattice step implied by the period; equals delta to LATTICE_RTOL
    expected = Fraction(n) / lam.period_exact
    total = lo + up
    return ComplementarityReport(lo, up, total, expected, total == expected)


def _check_regime(lam: UDSet, delta: float, factor: float, message: str) -> float:
    try:
        d = separation_constant(lam)
    except SetError:
        return math.inf
    if delta >= d / factor:
        raise SetError(f"{message}: delta={delta} >= d/{factor:g} = {d / factor}")
    return d


def perturb(lam: UDSet, rule: Perturbation | float, seed: int | None = None) -> UDSet:
    """Apply a perturbation, or a seeded uniform one when ``rule`` is a bound."""
    if not isinstance(rule, Perturbation):
        if seed is None:
            raise SetError("a random perturbation needs a seed")
        rule = Perturbation.random(lam, float(rule), seed)
    d = _check_regime(lam, rule.delta, 4.0, "perturbation too large")
    if lam.is_periodic:
        eps = rule.shift_array(lam.offsets)
        new = np.asarray(lam.offsets) + eps
        out = UDSet.periodic_set(lam.period_exact, new.tolist())
        if len(out.offsets) != len(lam.offsets):
            raise SetError("perturbation merged two points")
    else:
        eps = rule.shift_array(lam.points)
        new = np.sort(np.asarray(lam.points) + eps)
        w0, w1 = lam.window
        out = UDSet("window", tuple(new.tolist()), (w0 - rule.delta, w1 + rule.delta))
    if math.isfinite(d) and separation_constant(out) < d - 2 * rule.delta - 1e-12:
        raise SetError("perturbed set lost separation")  # unreachable under the regime
    return out


def on_lattice(lam: UDSet, delta: float) -> bool:
    """Whether ``lam`` lies in ``delta*Z``; periodic sets also need a period in ``delta*Z``."""
    if delta <= 0:
        raise SetError("delta must be positive")

    def near(r: float) -> bool:
        return abs(r - round(r)) <= LATTICE_RTOL * max(1.0, abs(r))

    if lam.is_periodic and not (near(lam.period / delta) and round(lam.period / delta) >= 1):
        return False
    pts = lam.offsets if lam.is_periodic else lam.points
    return all(near(x / delta) for x in pts)


def _round_index(x: float, delta: float) -> int:
    # nearest multiple, exact halves toward -inf
    return int(math.ceil(x / delta - 0.5))


def round_to_lattice(lam: UDSet, delta: float) -> UDSet:
    """Move each point to the nearest multiple of ``delta``.

    Needs ``delta < d(lam)/2`` unless ``lam`` already lies in ``delta*Z``,
    in which case it is returned unchanged.
    """
    if on_lattice(lam, delta):
        return lam
    _check_regime(lam, delta, 2.0, "lattice too coarse for rounding")
    if lam.is_periodic:
        n = _periods_per_step(lam, delta)
        ks = [_round_index(o, delta) % n for o in lam.offsets]
        if len(set(ks)) != len(ks):
            raise RuntimeError("collision after rounding to the lattice")
        step = lam.period_exact / n
        offs = sorted(float(k * step) for k in ks)
        return UDSet("periodic", period=lam.period, offsets=tuple(offs), period_exact=lam.period_exact)
    ks = [_round_index(x, delta) for x in lam.points]
    if len(set(ks)) != len(ks):
        raise RuntimeError("collision after rounding to the lattice")
    w0, w1 = lam.window
    window = (math.floor(w0 / delta) * delta, math.ceil(w1 / delta) * delta)
    return UDSet("window", tuple(k * delta for k in ks), window)


def is_delta_perturbation(candidate: UDSet, base: UDSet, delta: float) -> bool:
    """Whether the order-matched displacement from ``base`` is at most ``delta``.

    For periodic sets offsets are compared cyclically within one period.
    """
    if candidate.is_periodic != base.is_periodic:
        return False
    if base.is_periodic:
        if len(candidate.offsets) != len(base.offsets) or not math.isclose(candidate.period, base.period):
            return False
        if not base.offsets:
            return True
        a = np.asarray(base.offsets)
        b = np.asarray(candidate.offsets)
        p = base.period
        return any(
            np.all(np.abs(((np.roll(b, r) - a + p / 2) % p) - p / 2) <= delta * (1 + 1e-12))
            for r in range(len(b))
        )
    if len(candidate.points) != len(base.points):
        return False
    diff = np.abs(np.asarray(candidate.points) - np.asarray(base.points))
    return bool(np.all(diff <= delta * (1 + 1e-12) + 1e-15))
