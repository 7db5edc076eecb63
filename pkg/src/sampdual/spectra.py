"""Spectra as finite unions of disjoint closed intervals on the real line."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = ["Spectrum", "SpectrumError", "measure", "translate", "complement_within", "parse_real"]

# numbers like "pi", "-pi/2", "2pi", "1.5*pi", "3pi/4"
_PI_TOKEN = re.compile(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\*?pi(?:/((?:\d+(?:\.\d*)?|\.\d+)))?$")


class SpectrumError(ValueError):
    pass


def parse_real(token: str) -> float:
    """A float, or a multiple of pi such as ``pi``, ``-pi/2``, ``2*pi``, ``0.5pi/3``."""
    token = token.strip().lower()
    try:
        return float(token)
    except ValueError:
        pass
    m = _PI_TOKEN.match(token)
    if m is None:
        raise SpectrumError(f"cannot parse spectrum endpoint {token!r}")
    coef, denom = m.groups()
    if coef in (None, "", "+"):
        c = 1.0
    elif coef == "-":
        c = -1.0
    else:
        c = float(coef)
    return c * math.pi / (float(denom) if denom else 1.0)


@dataclass(frozen=True)
class Spectrum:
    """Disjoint closed intervals ``[a_i, b_i]`` in increasing order.

    Overlapping or touching intervals are merged on construction;
    degenerate intervals (``a >= b``) are rejected.
    """

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        raw = []
        for iv in self.intervals:
            a, b = (float(x) for x in iv)
            if not (math.isfinite(a) and math.isfinite(b)):
                raise SpectrumError(f"unbounded interval [{a}, {b}]")
            if not a < b:
                raise SpectrumError(f"degenerate interval [{a}, {b}]")
            raw.append((a, b))
        raw.sort()
        merged: list[tuple[float, float]] = []
        for a, b in raw:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def interval(cls, a: float, b: float) -> "Spectrum":
        return cls(((a, b),))

    @classmethod
    def symmetric(cls, sigma: float) -> "Spectrum":
        return cls(((-sigma, sigma),))

    @classmethod
    def parse(cls, text: str) -> "Spectrum":
        """Parse the shorthand ``"a:b,c:d"``; endpoints may use ``pi``."""
        text = text.strip()
        if not text:
            return cls()
        ivs = []
        for part in text.split(","):
            pieces = part.split(":")
            if len(pieces) != 2:
                raise SpectrumError(f"bad interval {part!r}, expected 'a:b'")
            ivs.append((parse_real(pieces[0]), parse_real(pieces[1])))
        return cls(tuple(ivs))

    def to_dict(self) -> dict:
        return {"intervals": [[a, b] for a, b in self.intervals]}

    @classmethod
    def from_dict(cls, obj: dict) -> "Spectrum":
        if "intervals" not in obj:
            raise SpectrumError("spectrum JSON needs an 'intervals' field")
        return cls(tuple(tuple(iv) for iv in obj["intervals"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Spectrum":
        return cls.from_dict(json.loads(text))

    def shorthand(self) -> str:
        return ",".join(f"{a!r}:{b!r}" for a, b in self.intervals)

    @property
    def measure(self) -> float:
        return math.fsum(b - a for a, b in self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def sigma(self) -> float:
        """Smallest ``s`` with the spectrum inside ``[-s, s]``."""
        if not self.intervals:
            return 0.0
        return max(abs(self.intervals[0][0]), abs(self.intervals[-1][1]))

    @property
    def hull(self) -> tuple[float, float]:
        if not self.intervals:
            raise SpectrumError("empty spectrum has no hull")
        return self.intervals[0][0], self.intervals[-1][1]

    def contains(self, t: float) -> bool:
        return any(a <= t <= b for a, b in self.intervals)

    def scaled(self, s: float) -> "Spectrum":
        if s <= 0:
            raise SpectrumError("scale factor must be positive")
        return Spectrum(tuple((s * a, s * b) for a, b in self.intervals))

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)


def measure(spectrum: Spectrum) -> float:
    return spectrum.measure


def translate(spectrum: Spectrum, shift: float) -> Spectrum:
    return Spectrum(tuple((a + shift, b + shift) for a, b in spectrum.intervals))


def complement_within(
    spectrum: Spectrum, ambient: Sequence[float], tol: float = 1e-12
) -> Spectrum:
    """Closure of ``ambient \\ spectrum``.

    ``tol`` (relative to the ambient length) absorbs endpoints produced by
    floating-point arithmetic such as ``2*pi/delta``.
    """
    lo, hi = (float(x) for x in ambient)
    if not lo < hi:
        raise SpectrumError(f"degenerate ambient interval [{lo}, {hi}]")
    slack = tol * max(1.0, hi - lo)
    for a, b in spectrum.intervals:
        if a < lo - slack or b > hi + slack:
            raise SpectrumError(
                f"interval [{a}, {b}] is not contained in ambient [{lo}, {hi}]"
            )
    out: list[tuple[float, float]] = []
    cursor = lo
    for a, b in spectrum.intervals:
        a, b = max(a, lo), min(b, hi)
        if a - cursor > slack:
            out.append((cursor, a))
        cursor = max(cursor, b)
    if hi - cursor > slack:
        out.append((cursor, hi))
    return Spectrum(tuple(out))


def union(spectra: Iterable[Spectrum]) -> Spectrum:
    return Spectrum(tuple(iv for s in spectra for iv in s.intervals))
