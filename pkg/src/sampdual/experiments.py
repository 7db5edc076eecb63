"""Batch experiments: configuration, execution and deterministic reports.

Every experiment is a pure function of a validated ``ExperimentConfig``
returning an ``ExperimentResult``: named tables (written as CSV), named
records (written as JSON) and named assertions.  ``run`` writes these
plus a manifest; a run passes when every assertion holds.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .duality import DiscreteModel, discrete_duality_verify, exhaustive_duality_scan, worker_count
from .exponential import bessel_bound_estimate, frame_bounds_grid, gram_matrix, riesz_bound_estimates
from .quadrature import min_resolution
from .sets import (
    SetError,
    UDSet,
    as_fraction,
    complement_in_lattice,
    is_delta_perturbation,
    lower_density,
    on_lattice,
    round_to_lattice,
    upper_density,
)
from .spectra import Spectrum, SpectrumError, complement_within, parse_real
from .stability import stability_margin_experiment

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "ClaimReport",
    "PoissonReport",
    "KINDS",
    "claim_pipeline",
    "density_sweep",
    "disconnected_spectrum_demo",
    "load_witnesses",
    "poisson_sum_check",
    "run",
    "run_experiment",
    "search_witness",
]

log = logging.getLogger(__name__)

TRANSITION_MARGIN = 0.1
BOUNDARY_TOL = 1e-12


class ConfigError(ValueError):
    """Invalid experiment configuration; the message starts with the field name."""


# configuration


_REQUIRED = object()


def _float(name: str, v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ConfigError(f"{name}: expected a number, got {v!r}")
    try:
        x = parse_real(v) if isinstance(v, str) else float(v)
    except SpectrumError as exc:
        raise ConfigError(f"{name}: {exc}") from None
    if not math.isfinite(x):
        raise ConfigError(f"{name}: must be finite")
    return x


def _positive(name: str, v) -> float:
    x = _float(name, v)
    if x <= 0:
        raise ConfigError(f"{name}: must be positive, got {x}")
    return x


def _int(name: str, v, lo: int = 0) -> int:
    if isinstance(v, str) and v.strip().lstrip("+-").isdigit():
        v = int(v)
    if isinstance(v, bool) or not isinstance(v, int) and not (isinstance(v, float) and v.is_integer()):
        raise ConfigError(f"{name}: expected an integer, got {v!r}")
    if int(v) < lo:
        raise ConfigError(f"{name}: must be >= {lo}, got {v}")
    return int(v)


def _list(item: Callable[[str, Any], Any], nonempty: bool = True):
    def parse(name: str, v):
        if isinstance(v, str):
            v = [t for t in v.split(",") if t.strip()]
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            v = [v]
        if not isinstance(v, (list, tuple)):
            raise ConfigError(f"{name}: expected a list, got {v!r}")
        if nonempty and not v:
            raise ConfigError(f"{name}: must not be empty")
        return [item(f"{name}[{i}]", x) for i, x in enumerate(v)]

    return parse


def _spectrum(name: str, v) -> str:
    try:
        s = Spectrum.from_dict(v) if isinstance(v, Mapping) else Spectrum.parse(str(v))
    except (SpectrumError, TypeError, KeyError) as exc:
        raise ConfigError(f"{name}: {exc}") from None
    if s.is_empty:
        raise ConfigError(f"{name}: spectrum is empty")
    return s.shorthand()


def _udset(name: str, v) -> dict:
    # a bare list of numbers is a finite set
    if isinstance(v, (list, tuple)) and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        v = {"kind": "window", "points": list(v)}
    if not isinstance(v, Mapping):
        raise ConfigError(f"{name}: expected a set object, got {v!r}")
    try:
        return UDSet.from_dict(v).to_dict()
    except (SetError, TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def _choice(*options: str):
    def parse(name: str, v):
        if v not in options:
            raise ConfigError(f"{name}: expected one of {', '.join(options)}, got {v!r}")
        return v

    return parse


def _optional(parser):
    def parse(name: str, v):
        return None if v is None else parser(name, v)

    return parse


def _bool(name: str, v) -> bool:
    if not isinstance(v, bool):
        raise ConfigError(f"{name}: expected true or false, got {v!r}")
    return v


_SCHEMAS: dict[str, dict[str, tuple[Callable, Any]]] = {
    "density": {
        "set": (_udset, _REQUIRED),
        "length": (_optional(_positive), None),
    },
    "gram": {
        "set": (_udset, _REQUIRED),
        "spectrum": (_spectrum, _REQUIRED),
        "window": (_optional(_positive), None),
        "resolution": (_optional(_positive), None),
    },
    "density_sweep": {
        "alphas": (_list(_positive), _REQUIRED),
        "sigma": (_positive, math.pi),
        "window": (_positive, 50.0),
        "resolution": (_optional(_positive), None),
    },
    "claim": {
        "set": (_udset, _REQUIRED),
        "spectrum": (_spectrum, _REQUIRED),
        "delta": (_positive, _REQUIRED),
        "ambient": (_optional(_spectrum), None),
        "length": (_optional(_positive), None),
    },
    "disconnected": {
        "spectrum": (_spectrum, _REQUIRED),
        "first": (_udset, _REQUIRED),
        "second": (_udset, _REQUIRED),
        "windows": (_list(_positive), [15.0, 30.0, 60.0]),
    },
    "poisson": {
        "eps": (_list(_positive), _REQUIRED),
        "truncations": (_list(lambda n, v: _int(n, v, 100)), _REQUIRED),
    },
    "stability": {
        "lambda_kind": (_choice("integer", "lattice", "set"), "integer"),
        "spacing": (_positive, 1.0),
        "set": (_optional(_udset), None),
        "spectrum": (_spectrum, _REQUIRED),
        "window": (_positive, 40.0),
        "deltas": (_list(_positive), _REQUIRED),
        "seeds": (lambda n, v: _int(n, v, 1), 10),
        "resolution": (_optional(_positive), None),
    },
    "duality_scan": {
        "nmax": (lambda n, v: _int(n, v, 1), _REQUIRED),
    },
    "duality_check": {
        "n": (lambda n, v: _int(n, v, 1), _REQUIRED),
        "lambda": (_list(lambda n, v: _int(n, v, 0), nonempty=False), _REQUIRED),
        "s": (_list(lambda n, v: _int(n, v, 0), nonempty=False), _REQUIRED),
    },
}

KINDS = tuple(_SCHEMAS)


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment description.

    ``params`` holds the kind-specific fields in canonical form (defaults
    filled in, spectra as shorthand strings, sets as JSON objects), so a
    config equals its own JSON round trip.
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    figures: bool = False

    def __post_init__(self) -> None:
        if self.kind not in _SCHEMAS:
            raise ConfigError(f"kind: unknown experiment kind {self.kind!r} (known: {', '.join(KINDS)})")
        schema = _SCHEMAS[self.kind]
        unknown = sorted(set(self.params) - set(schema))
        if unknown:
            raise ConfigError(f"{unknown[0]}: not a parameter of {self.kind!r}")
        clean = {}
        for name, (parse, default) in schema.items():
            if name in self.params:
                clean[name] = parse(name, self.params[name])
            elif default is _REQUIRED:
                raise ConfigError(f"{name}: required for {self.kind!r}")
            else:
                clean[name] = default
        object.__setattr__(self, "params", clean)
        object.__setattr__(self, "seed", _int("seed", self.seed))
        object.__setattr__(self, "figures", _bool("figures", self.figures))
        if self.out is not None and not isinstance(self.out, str):
            raise ConfigError(f"out: expected a path string, got {self.out!r}")
        _check_cross_fields(self)

    @classmethod
    def from_dict(cls, obj: Mapping) -> "ExperimentConfig":
        if not isinstance(obj, Mapping):
            raise ConfigError("config: expected a JSON object")
        if "kind" not in obj:
            raise ConfigError("kind: missing")
        top = {"kind", "params", "seed", "out", "figures"}
        params = dict(obj.get("params", {}))
        params.update({k: v for k, v in obj.items() if k not in top})
        return cls(obj["kind"], params, obj.get("seed", 0), obj.get("out"), obj.get("figures", False))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: not valid JSON ({exc})") from None
        return cls.from_dict(obj)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
        return cls.from_json(text)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params, "seed": self.seed, "out": self.out, "figures": self.figures}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def replace(self, **changes) -> "ExperimentConfig":
        d = self.to_dict() | changes
        return ExperimentConfig(d["kind"], d["params"], d["seed"], d["out"], d["figures"])


def _check_cross_fields(cfg: ExperimentConfig) -> None:
    p = cfg.params
    if cfg.kind == "stability" and p["lambda_kind"] == "set" and p["set"] is None:
        raise ConfigError("set: required when lambda_kind is 'set'")
    if cfg.kind == "duality_check":
        for name in ("lambda", "s"):
            bad = [k for k in p[name] if k >= p["n"]]
            if bad:
                raise ConfigError(f"{name}: index {bad[0]} outside Z_{p['n']}")
    if cfg.kind == "poisson":
        for i, e in enumerate(p["eps"]):
            if e > math.pi / 2 * (1 + 1e-15):
                raise ConfigError(f"eps[{i}]: must lie in (0, pi/2], got {e}")


# results


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


@dataclass
class ExperimentResult:
    kind: str
    tables: dict[str, Table] = field(default_factory=dict)
    records: dict[str, Any] = field(default_factory=dict)
    assertions: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.assertions.values())

    def summary(self) -> dict:
        # raw CSV records are written to disk, not echoed
        records = {name: rec for name, rec in self.records.items() if not isinstance(rec, str)}
        return {"kind": self.kind, "passed": self.passed, "assertions": self.assertions} | records


def _ordered_map(fn, items: Sequence, workers: int | None = None) -> list:
    # results come back in input order whatever the worker count
    n = min(worker_count() if workers is None else workers, len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(n) as pool:
        return list(pool.map(fn, items))


def _default_resolution(points: np.ndarray) -> float:
    return max(16.0, float(math.ceil(2 * min_resolution(points))))


# density sweep


def _sweep_row(args: tuple[float, float, float, float | None]) -> tuple:
    alpha, sigma, window, resolution = args
    lam = UDSet.lattice(alpha)
    pts = lam.truncate(-window, window).as_array()
    spec = Spectrum.symmetric(sigma)
    res = resolution if resolution is not None else _default_resolution(pts)
    riesz = riesz_bound_estimates(pts, spec)
    frame = frame_bounds_grid(pts, spec, res, window=(-window, window))
    bessel = bessel_bound_estimate(pts, spec).upper
    return (
        alpha,
        float(upper_density(lam).exact_value),
        float(lower_density(lam).exact_value),
        riesz.lower,
        frame.lower,
        bessel,
        riesz.upper,
        frame.upper,
        frame.edge_caveat,
    )


SWEEP_COLUMNS = ("alpha", "D_upper", "D_lower", "riesz_lower", "frame_lower", "bessel")


def density_sweep(cfg: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    """Riesz, frame and Bessel estimates for ``alpha*Z & [-T, T]`` on ``[-sigma, sigma]``.

    The critical spacing is ``pi / sigma``.  Rows with spacing clearly above
    it must keep a positive Riesz lower bound, rows clearly below it a
    positive frame lower bound.  Both are asserted.
    """
    if cfg.kind != "density_sweep":
        raise ConfigError(f"kind: expected 'density_sweep', got {cfg.kind!r}")
    p = cfg.params
    jobs = [(a, p["sigma"], p["window"], p["resolution"]) for a in p["alphas"]]
    full = _ordered_map(_sweep_row, jobs, workers)
    crit = math.pi / p["sigma"]
    result = ExperimentResult("density_sweep")
    result.tables["density_sweep"] = Table(SWEEP_COLUMNS, [r[:6] for r in full])
    result.records["transition"] = {
        "critical_alpha": crit,
        "margin": TRANSITION_MARGIN,
        "riesz_upper": [r[6] for r in full],
        "frame_upper": [r[7] for r in full],
        "frame_edge_caveat": [r[8] for r in full],
    }
    above = [r for r in full if r[0] > crit * (1 + TRANSITION_MARGIN)]
    below = [r for r in full if r[0] < crit * (1 - TRANSITION_MARGIN)]
    result.assertions["bounds_ordered"] = all(r[3] <= r[6] and r[4] <= r[7] for r in full)
    result.assertions["interpolation_side_positive"] = all(r[3] > 0 for r in above)
    result.assertions["sampling_side_positive"] = all(r[4] > 0 for r in below)
    return result


# claim pipeline


@dataclass(frozen=True)
class ClaimReport:
    """Every computable quantity the lattice-rounding argument passes through.

    ``status`` compares ``D+(lam)`` with ``mes(S)/2pi``; ``status_dual``
    compares ``D-(Gamma)`` with ``mes(G)/2pi`` in the reversed sense.  The
    two must agree, which is the statement that either inequality can be
    read off from the other.
    """

    delta: float
    exact: bool
    rounded: bool
    density_upper: Fraction | float
    rounded_upper: Fraction | float
    complement_lower: Fraction | float
    identity_sum: Fraction | float
    one_over_delta: Fraction
    identity_holds: bool
    rounding_within_half_delta: bool
    density_preserved: bool
    measure_ratio: float
    complement_measure_ratio: float
    measures_sum_ok: bool
    status: str
    status_dual: str
    rounded_set: dict = field(compare=False)
    complement_set: dict = field(compare=False)
    complement_spectrum: str = ""

    @property
    def passes(self) -> bool:
        return (
            self.identity_holds
            and self.rounding_within_half_delta
            and (self.density_preserved or not self.exact)
            and self.measures_sum_ok
            and self.status == self.status_dual
        )

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["passes"] = self.passes
        return _jsonable(out)


def _compare(value: float, bound: float) -> str:
    if abs(value - bound) <= BOUNDARY_TOL * max(1.0, abs(bound)):
        return "boundary"
    return "consistent" if value < bound else "exceeds"


def _window_count_density(lam: UDSet, length: float, upper: bool) -> Fraction:
    est = (upper_density if upper else lower_density)(lam, length)
    return Fraction(round(est.value * length)) / as_fraction(length)


def claim_pipeline(
    lam: UDSet, spectrum: Spectrum, delta: float, ambient: Spectrum | None = None, length: float | None = None
) -> ClaimReport:
    """Round ``lam`` to ``delta*Z``, pass to complements and compare densities with measures.

    A set already inside ``delta*Z`` is used as is; otherwise it is rounded
    to the nearest multiples, which needs ``delta < d(lam)/2``.

    ``status`` reports where ``D+(lam')`` sits relative to ``mes(S)/2pi``:
    ``consistent`` (below), ``boundary`` (equal to 1e-12) or ``exceeds``.
    An interpolating set cannot exceed; the pipeline only reports.

    Periodic sets give exact rational densities.  Window sets need a
    window ``length`` that is a multiple of ``delta``; their counts are
    integers, so the identity is still exact for the window estimates.
    """
    if delta <= 0:
        raise SetError("delta must be positive")
    if ambient is None:
        ambient = Spectrum.interval(0.0, 2 * math.pi / delta)
    elif len(ambient) != 1 or abs(ambient.measure * delta / (2 * math.pi) - 1) > BOUNDARY_TOL:
        raise SpectrumError(f"ambient must be one interval of length 2pi/delta, got {ambient.shorthand()}")
    g = complement_within(spectrum, ambient.hull)
    already = on_lattice(lam, delta)
    rounded = round_to_lattice(lam, delta)
    gamma = complement_in_lattice(rounded, delta)
    dq = as_fraction(delta)
    if lam.is_periodic:
        d_lam = upper_density(lam).exact_value
        d_rnd = upper_density(rounded).exact_value
        d_gam = lower_density(gamma).exact_value
    else:
        if length is None:
            raise SetError("window sets need a window length l")
        if (as_fraction(length) / dq).denominator != 1:
            raise SetError(f"window length {length} is not a multiple of delta={delta}")
        d_lam = _window_count_density(lam, length, True)
        d_rnd = _window_count_density(rounded, length, True)
        d_gam = _window_count_density(gamma, length, False)
    total = d_rnd + d_gam
    mes_s = spectrum.measure / (2 * math.pi)
    mes_g = g.measure / (2 * math.pi)
    status = _compare(float(d_rnd), mes_s)
    # D+(lam') <= mes(S)/2pi  <=>  D-(Gamma) >= mes(G)/2pi
    flipped = {"consistent": "exceeds", "exceeds": "consistent", "boundary": "boundary"}
    status_dual = flipped[_compare(float(d_gam), mes_g)]
    return ClaimReport(
        delta=float(delta),
        exact=lam.is_periodic,
        rounded=not already,
        density_upper=d_lam,
        rounded_upper=d_rnd,
        complement_lower=d_gam,
        identity_sum=total,
        one_over_delta=1 / dq,
        identity_holds=total == 1 / dq,
        rounding_within_half_delta=is_delta_perturbation(rounded, lam, delta / 2),
        density_preserved=d_rnd == d_lam,
        measure_ratio=mes_s,
        complement_measure_ratio=mes_g,
        measures_sum_ok=abs(mes_s + mes_g - 1 / delta) <= BOUNDARY_TOL * max(1.0, 1 / delta),
        status=status,
        status_dual=status_dual,
        rounded_set=rounded.to_dict(),
        complement_set=gamma.to_dict(),
        complement_spectrum=g.shorthand() if not g.is_empty else "",
    )


def _claim(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    amb = None if p["ambient"] is None else Spectrum.parse(p["ambient"])
    rep = claim_pipeline(UDSet.from_dict(p["set"]), Spectrum.parse(p["spectrum"]), p["delta"], amb, p["length"])
    result = ExperimentResult("claim")
    result.records["claim"] = rep.to_dict()
    result.assertions["identity_exact"] = rep.identity_holds
    result.assertions["rounding_within_half_delta"] = rep.rounding_within_half_delta
    result.assertions["density_preserved"] = rep.density_preserved or not rep.exact
    result.assertions["measures_complementary"] = rep.measures_sum_ok
    result.assertions["dual_statements_agree"] = rep.status == rep.status_dual
    return result


# disconnected spectrum


def load_witnesses() -> list[dict]:
    text = resources.files("sampdual").joinpath("data/witnesses.json").read_text()
    return json.loads(text)["disconnected_spectrum"]


DEMO_COLUMNS = ("set", "window", "points", "riesz_lower", "riesz_upper")


def disconnected_spectrum_demo(
    spectrum: Spectrum, first: UDSet, second: UDSet, windows: Sequence[float] = (15.0, 30.0, 60.0)
) -> ExperimentResult:
    """Riesz bounds of two sets with identical densities on the same spectrum."""
    if not (first.is_periodic and second.is_periodic):
        raise SetError("densities are compared exactly, so both sets must be periodic")
    for name, fn in (("upper", upper_density), ("lower", lower_density)):
        a, b = fn(first).exact_value, fn(second).exact_value
        if a != b:
            raise SetError(f"{name} densities differ: {a} != {b}")
    rows = []
    for label, lam in (("first", first), ("second", second)):
        for t in windows:
            pts = lam.truncate(-t, t).as_array()
            est = riesz_bound_estimates(pts, spectrum)
            rows.append((label, float(t), int(pts.size), est.lower, est.upper))
    last = {r[0]: r[3] for r in rows if r[1] == max(windows)}
    lo, hi = sorted(last.values())
    result = ExperimentResult("disconnected")
    result.tables["disconnected"] = Table(DEMO_COLUMNS, rows)
    result.records["disconnected"] = {
        "spectrum": spectrum.shorthand(),
        "density": upper_density(first).exact_value,
        "measure_ratio": spectrum.measure / (2 * math.pi),
        "largest_window": max(windows),
        "riesz_lower": last,
        "ratio": hi / lo if lo > 0 else None,
        "factor_over_5": hi > 5 * lo,
    }
    result.assertions["densities_equal"] = True
    return result


def search_witness(
    spectrum: Spectrum, period: float = 2.0, steps: int = 39, windows: Sequence[float] = (30.0, 60.0)
) -> tuple[float, list[tuple[float, float]]]:
    """Best second offset ``a`` for the pattern ``{0, a} + period*Z``.

    Scans ``a = k*period/(steps+1)`` and scores each by its smallest Riesz
    lower estimate across ``windows``.  Returns the best offset and all
    ``(a, score)`` pairs.
    """
    scores = []
    for k in range(1, steps + 1):
        a = round(k * period / (steps + 1), 12)
        lam = UDSet.periodic_set(period, [0.0, a])
        score = min(riesz_bound_estimates(lam.truncate(-t, t).as_array(), spectrum).lower for t in windows)
        scores.append((a, score))
    # scores equal to 1e-9 are ties; the smaller offset wins
    best = max(scores, key=lambda s: (round(s[1], 9), -s[0]))
    return best[0], scores


def _disconnected(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    return disconnected_spectrum_demo(
        Spectrum.parse(p["spectrum"]), UDSet.from_dict(p["first"]), UDSet.from_dict(p["second"]), p["windows"]
    )


# Poisson-type sum


@dataclass(frozen=True)
class PoissonReport:
    eps: float
    truncation: int
    partial_sum: complex
    tail_bound: float
    rounding_allowance: float
    passes: bool

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "truncation": self.truncation,
            "partial_sum_re": self.partial_sum.real,
            "partial_sum_im": self.partial_sum.imag,
            "abs_partial_sum": abs(self.partial_sum),
            "tail_bound": self.tail_bound,
            "rounding_allowance": self.rounding_allowance,
            "passes": self.passes,
        }


def poisson_sum_check(eps: float, truncation: int) -> PoissonReport:
    """Partial sums of ``f(n) = exp(i pi n) (sin(eps n)/(eps n))^2`` over ``|n| <= M``.

    The spectrum of ``f`` sits in ``[pi - 2 eps, pi + 2 eps]`` inside
    ``[0, 2 pi]``, so the full sum over Z vanishes.  The partial sum is
    minus the tail, bounded by ``sum_{|n|>M} (eps n)^-2 <= 2/(eps^2 M)``.
    Terms are real at integers; the imaginary part is reported as 0.
    """
    if not 0 < eps <= math.pi / 2 * (1 + 1e-15):
        raise ValueError(f"eps must lie in (0, pi/2], got {eps}")
    if isinstance(truncation, bool) or int(truncation) != truncation or truncation < 100:
        raise ValueError(f"truncation M must be an integer >= 100, got {truncation}")
    m = int(truncation)
    n = np.arange(1, m + 1, dtype=float)
    x = eps * n
    terms = np.where(n % 2 == 0, 1.0, -1.0) * (np.sin(x) / x) ** 2
    partial = math.fsum([1.0, *(2 * terms).tolist()])
    tail = 2.0 / (eps * eps * m)
    # each term carries a few ulps of relative error; fsum adds no more
    allowance = 8 * np.finfo(float).eps * (1.0 + 2 * float(np.sum(np.abs(terms))))
    return PoissonReport(float(eps), m, complex(partial, 0.0), tail, allowance, abs(partial) <= tail + allowance)


POISSON_COLUMNS = ("eps", "M", "partial_sum", "abs_partial_sum", "tail_bound", "passes")


def _poisson(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    reps = [poisson_sum_check(e, m) for e in p["eps"] for m in p["truncations"]]
    result = ExperimentResult("poisson")
    result.tables["poisson"] = Table(
        POISSON_COLUMNS,
        [(r.eps, r.truncation, r.partial_sum.real, abs(r.partial_sum), r.tail_bound, r.passes) for r in reps],
    )
    result.assertions["all_within_tail_bound"] = all(r.passes for r in reps)
    return result


# stability, duality, density and Gram wrappers


def _stability_set(p: dict) -> UDSet:
    if p["lambda_kind"] == "integer":
        base = UDSet.lattice(1.0)
    elif p["lambda_kind"] == "lattice":
        base = UDSet.lattice(p["spacing"])
    else:
        base = UDSet.from_dict(p["set"])
    return base.truncate(-p["window"], p["window"]) if base.is_periodic else base


def _stability(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    lam = _stability_set(p)
    spec = Spectrum.parse(p["spectrum"])
    res = p["resolution"] if p["resolution"] is not None else _default_resolution(lam.as_array())
    # seeds are offset by the config seed so distinct runs draw distinct perturbations
    seeds = [cfg.seed + k for k in range(p["seeds"])]
    table = stability_margin_experiment(lam, spec, p["deltas"], seeds, res)
    result = ExperimentResult("stability")
    result.tables["stability"] = Table(
        table.columns, [(r.delta, r.seed, r.measured_norm, r.bound, r.A_est) for r in table.rows]
    )
    summary = table.summary()
    result.records["stability"] = summary | {"resolution": res, "points": len(lam)}
    result.assertions["operator_bound_holds"] = summary["all_bounds_hold"]
    return result


def _duality_scan(cfg: ExperimentConfig) -> ExperimentResult:
    stats = exhaustive_duality_scan(cfg.params["nmax"], raise_on_failure=False)
    result = ExperimentResult("duality_scan")
    result.records["duality_scan"] = stats.to_dict()
    result.assertions["no_violations"] = not stats.failures
    return result


def _duality_check(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    rep = discrete_duality_verify(DiscreteModel(p["n"], tuple(p["lambda"]), tuple(p["s"])), strict=False)
    result = ExperimentResult("duality_check")
    result.records["duality_check"] = rep.to_dict()
    result.assertions["consistent"] = rep.consistent
    return result


def _density(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    lam = UDSet.from_dict(p["set"])
    lo, up = lower_density(lam, p["length"]), upper_density(lam, p["length"])
    rec = {"lower": lo.value, "upper": up.value, "exact": lo.exact, "length": p["length"]}
    if lo.exact:
        rec |= {"lower_exact": lo.exact_value, "upper_exact": up.exact_value}
    result = ExperimentResult("density")
    result.records["density"] = rec
    result.assertions["lower_le_upper"] = lo.value <= up.value
    return result


def _gram(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    lam = UDSet.from_dict(p["set"])
    if lam.is_periodic:
        if p["window"] is None:
            raise ConfigError("window: required for a periodic set")
        lam = lam.truncate(-p["window"], p["window"])
    spec = Spectrum.parse(p["spectrum"])
    pts = lam.as_array()
    gram = gram_matrix(pts, spec)
    riesz = riesz_bound_estimates(pts, spec)
    rec = {"points": int(pts.size), "riesz": riesz.to_dict(), "bessel": bessel_bound_estimate(pts, spec).upper}
    if p["resolution"] is not None:
        rec["frame"] = frame_bounds_grid(pts, spec, p["resolution"], window=lam.window).to_dict()
    result = ExperimentResult("gram")
    result.records["gram"] = rec
    result.records["gram.csv"] = gram.to_csv()
    result.assertions["hermitian"] = bool(np.allclose(gram.entries, gram.entries.conj().T, rtol=0, atol=1e-15))
    return result


_RUNNERS: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "density": _density,
    "gram": _gram,
    "density_sweep": density_sweep,
    "claim": _claim,
    "disconnected": _disconnected,
    "poisson": _poisson,
    "stability": _stability,
    "duality_scan": _duality_scan,
    "duality_check": _duality_check,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return _RUNNERS[cfg.kind](cfg)


# artifacts


def _versions() -> dict:
    from . import __version__

    return {"sampdual": __version__, "numpy": np.__version__, "python": platform.python_version()}


def _artifact_paths(out: Path, result: ExperimentResult) -> tuple[Path, str, dict[str, Path]]:
    """Output directory, file prefix and file names.

    An ``out`` ending in .csv names the main table; everything else lands
    next to it, prefixed with its stem.
    """
    if out.suffix == ".csv":
        base, prefix = out.parent, out.stem + "."
    else:
        base, prefix = out, ""
    names: dict[str, Path] = {}
    for i, t in enumerate(result.tables):
        names[f"table:{t}"] = out if (prefix and i == 0) else base / f"{prefix}{t}.csv"
    for r in result.records:
        names[f"record:{r}"] = base / (f"{prefix}{r}" if r.endswith(".csv") else f"{prefix}{r}.json")
    names["manifest"] = base / f"{prefix}manifest.json"
    return base, prefix, names


def write_artifacts(
    cfg: ExperimentConfig, result: ExperimentResult, out: str | Path, timings: dict | None = None
) -> dict[str, Path]:
    """Write tables, records, optional figures and the manifest.

    Everything written is a function of the config alone, except the
    ``timings`` block that callers may ask to include.
    """
    base, prefix, names = _artifact_paths(Path(out), result)
    try:
        base.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"output path {base} is not writable: {exc.strerror}") from None
    blobs: dict[str, bytes] = {}
    for t, table in result.tables.items():
        blobs[f"table:{t}"] = table.to_csv().encode()
    for r, rec in result.records.items():
        blobs[f"record:{r}"] = rec.encode() if isinstance(rec, str) else dumps(rec).encode()
    if cfg.figures:
        from .plotting import render_figures

        for name, data in render_figures(result).items():
            names[f"figure:{name}"] = base / f"{prefix}{name}.png"
            blobs[f"figure:{name}"] = data
    written = {}
    for key, data in blobs.items():
        path = names[key]
        try:
            path.write_bytes(data)
        except OSError as exc:
            raise OSError(f"output path {path} is not writable: {exc.strerror}") from None
        written[key] = path
    manifest = {
        # the output location is left out so moving a run does not change its bytes
        "config": {k: v for k, v in cfg.to_dict().items() if k != "out"},
        "versions": _versions(),
        "outputs": {names[k].name: hashlib.sha256(blobs[k]).hexdigest() for k in sorted(blobs)},
        "assertions": result.assertions,
        "passed": result.passed,
    }
    if timings is not None:
        manifest["timings"] = timings
    names["manifest"].write_text(dumps(manifest))
    written["manifest"] = names["manifest"]
    return written


def run(config: ExperimentConfig | str | Path, out: str | Path | None = None, timings: bool = False) -> ExperimentResult:
    """Load, validate, execute and (when an output path is known) write an experiment."""
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.load(config)
    target = out if out is not None else cfg.out
    t0 = time.perf_counter()
    result = run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    log.info("%s finished in %.3f s", cfg.kind, elapsed)
    if target is not None:
        write_artifacts(cfg, result, target, {"run_seconds": elapsed} if timings else None)
    return result
