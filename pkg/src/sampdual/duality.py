"""Frame / Riesz duality in finite dimensions and its discrete Fourier form.

Let ``U`` be an orthonormal basis of ``C^N`` split as ``V | W`` and ``P`` an
orthogonal projector.  Then ``{P v : v in V}`` is a frame for ``range(P)``
exactly when ``{(I - P) w : w in W}`` is a Riesz sequence in ``ker(P)``, and a
lower frame bound ``A`` forces a lower Riesz bound ``c^2 >= A / (1 + A)``.

With ``U`` the characters of ``Z_N`` and ``P`` the coordinate projector onto
a frequency set ``S``, the frame side is "``Lam`` samples the signals with
spectrum in ``S``" and the Riesz side is "``Z_N \\ Lam`` interpolates on the
complementary spectrum".  Indices are 0-based throughout.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exponential import BoundsEstimate

__all__ = [
    "OrthoDecomposition",
    "DiscreteModel",
    "DualityReport",
    "DualityViolation",
    "riesz_bounds_vectors",
    "frame_bounds_subspace",
    "prop4_verify",
    "character_matrix",
    "discrete_sampling_check",
    "discrete_interpolation_check",
    "discrete_duality_verify",
    "exhaustive_duality_scan",
]

EPS = np.finfo(float).eps
PROJECTOR_TOL = 1e-12
PROJECTOR_REPAIR_TOL = 1e-8
QUANTITATIVE_SLACK = 1e-9
ORACLE_TOL = 1e-10


class DualityViolation(AssertionError):
    """A verdict mismatch: the duality holds in exact arithmetic, so this points to a bug."""

    def __init__(self, message: str, instance: dict):
        super().__init__(f"{message}: {json.dumps(instance)}")
        self.instance = instance


def _tol(n: int, smax: float) -> float:
    return n * EPS * smax


def _stack(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        return vectors.astype(complex)
    vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    return np.column_stack(vecs) if vecs else np.zeros((0, 0), dtype=complex)


@dataclass(frozen=True)
class OrthoDecomposition:
    """``C^N = range(P) + ker(P)`` with basis columns ``U`` split into ``V | W``.

    ``basis`` defaults to the standard basis.  Projectors that are off by at
    most 1e-8 are snapped to the nearest one through their eigenvalues.
    """

    projector: np.ndarray
    partition: tuple[int, ...]
    basis: np.ndarray | None = None

    def __post_init__(self) -> None:
        p = np.asarray(self.projector, dtype=complex)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("projector must be square")
        n = p.shape[0]
        err = max(np.linalg.norm(p @ p - p, 2), np.linalg.norm(p - p.conj().T, 2)) if n else 0.0
        if err > PROJECTOR_REPAIR_TOL:
            raise ValueError(f"not an orthogonal projector (defect {err:.2e})")
        if err > PROJECTOR_TOL:
            w, v = np.linalg.eigh((p + p.conj().T) / 2)
            keep = v[:, w > 0.5]
            p = keep @ keep.conj().T
        part = tuple(sorted({int(i) for i in self.partition}))
        if part and (part[0] < 0 or part[-1] >= n):
            raise ValueError(f"partition indices must lie in 0..{n - 1}")
        u = np.eye(n, dtype=complex) if self.basis is None else np.asarray(self.basis, dtype=complex)
        if u.shape != (n, n) or (n and np.linalg.norm(u.conj().T @ u - np.eye(n), 2) > 1e-10):
            raise ValueError("basis must be a unitary matrix of matching size")
        object.__setattr__(self, "projector", p)
        object.__setattr__(self, "partition", part)
        object.__setattr__(self, "basis", u)

    @property
    def dimension(self) -> int:
        return self.projector.shape[0]

    @property
    def V(self) -> tuple[int, ...]:
        return self.partition

    @property
    def W(self) -> tuple[int, ...]:
        chosen = set(self.partition)
        return tuple(i for i in range(self.dimension) if i not in chosen)

    @property
    def rank(self) -> int:
        return int(round(float(np.trace(self.projector).real)))

    def mirrored(self) -> "OrthoDecomposition":
        """The swapped instance ``(I - P, W)``."""
        n = self.dimension
        return OrthoDecomposition(np.eye(n) - self.projector, self.W, self.basis)

    def to_dict(self) -> dict:
        def enc(m):
            return [[[z.real, z.imag] for z in row] for row in m]

        return {"projector": enc(self.projector), "partition": list(self.partition), "basis": enc(self.basis)}


def _range_basis(projector: np.ndarray) -> np.ndarray:
    if projector.size == 0:
        return np.zeros((0, 0), dtype=complex)
    w, v = np.linalg.eigh((projector + projector.conj().T) / 2)
    return v[:, w > 0.5]


def _bounds_from_singular(sv: np.ndarray, count: int) -> tuple[float, float, np.ndarray]:
    """Eigenvalue extremes of a ``count x count`` Gram-type matrix from singular values."""
    ev = np.zeros(count)
    ev[: sv.size] = sv[:count] ** 2
    ev = np.sort(ev)
    return float(ev[0]), float(ev[-1]), ev


def riesz_bounds_vectors(vectors) -> BoundsEstimate:
    """Extreme eigenvalues of the Gram matrix of ``vectors``.

    The lower value is positive exactly when the vectors are independent.
    """
    mat = _stack(vectors)
    if mat.shape[1] == 0:
        raise ValueError("need at least one vector")
    sv = np.linalg.svd(mat, compute_uv=False)
    lo, hi, _ = _bounds_from_singular(sv, mat.shape[1])
    if math.sqrt(lo) <= _tol(mat.shape[0], sv[0]):
        lo = 0.0
    return BoundsEstimate(lo, hi, "riesz")


def frame_bounds_subspace(vectors, projector) -> BoundsEstimate:
    """Frame bounds of ``{P v}`` in ``range(P)``, computed in an orthonormal basis of it."""
    p = np.asarray(projector, dtype=complex)
    q = _range_basis(p)
    if q.shape[1] == 0:
        raise ValueError("trivial subspace")
    mat = _stack(vectors)
    if mat.shape[1] == 0:
        return BoundsEstimate(0.0, 0.0, "frame")
    coords = q.conj().T @ mat
    sv = np.linalg.svd(coords, compute_uv=False)
    lo, hi, _ = _bounds_from_singular(sv, q.shape[1])
    if math.sqrt(lo) <= _tol(p.shape[0], sv[0]):
        lo = 0.0
    return BoundsEstimate(lo, hi, "frame")


@dataclass(frozen=True)
class DualityReport:
    frame_verdict: bool
    riesz_verdict: bool
    A: float | None
    c2: float | None
    quantitative_ok: bool
    equivalent: bool
    oracle_frame: bool
    oracle_riesz: bool
    frame_singular_values: np.ndarray = field(repr=False, compare=False)
    riesz_singular_values: np.ndarray = field(repr=False, compare=False)

    @property
    def oracle_ok(self) -> bool:
        return self.oracle_frame == self.frame_verdict and self.oracle_riesz == self.riesz_verdict

    @property
    def ok(self) -> bool:
        return self.equivalent and self.oracle_ok and self.quantitative_ok

    def to_dict(self) -> dict:
        return {
            "frame_verdict": self.frame_verdict,
            "riesz_verdict": self.riesz_verdict,
            "A": self.A,
            "c2": self.c2,
            "quantitative_ok": self.quantitative_ok,
            "equivalent": self.equivalent,
            "oracle_ok": self.oracle_ok,
        }


def prop4_verify(decomp: OrthoDecomposition, strict: bool = True) -> DualityReport:
    """Frame verdict for ``P V`` and Riesz verdict for ``(I - P) W``, checked against each other.

    Empty families follow the conventions: an empty family is a frame only
    for the zero subspace and is always a Riesz sequence.  Both verdicts are
    re-derived from ``numpy.linalg.matrix_rank`` on the ambient vectors.
    """
    n = decomp.dimension
    p = decomp.projector
    u = decomp.basis
    v_idx, w_idx = list(decomp.V), list(decomp.W)
    q1 = _range_basis(p)
    q2 = _range_basis(np.eye(n) - p)
    r1, r2 = q1.shape[1], q2.shape[1]

    # frame side: columns of q1^* U[:, V] in range(P)
    b = q1.conj().T @ u[:, v_idx]
    sv_b = np.linalg.svd(b, compute_uv=False) if b.size else np.zeros(0)
    if r1 == 0:
        frame, a_val = True, None
    elif not v_idx:
        frame, a_val = False, 0.0
    else:
        a_val, _, _ = _bounds_from_singular(sv_b, r1)
        frame = bool(math.sqrt(a_val) > _tol(n, sv_b[0]))
        if not frame:
            a_val = 0.0

    # Riesz side: columns of q2^* U[:, W] in ker(P)
    c = q2.conj().T @ u[:, w_idx]
    sv_c = np.linalg.svd(c, compute_uv=False) if c.size else np.zeros(0)
    if not w_idx:
        riesz, c2_val = True, None
    elif r2 == 0:
        riesz, c2_val = False, 0.0
    else:
        c2_val, _, _ = _bounds_from_singular(sv_c, len(w_idx))
        riesz = bool(math.sqrt(c2_val) > _tol(n, sv_c[0]))
        if not riesz:
            c2_val = 0.0

    quantitative = True
    if frame and a_val is not None and c2_val is not None and a_val > 0:
        quantitative = bool(c2_val >= a_val / (1 + a_val) - QUANTITATIVE_SLACK)

    # rank oracle on the ambient (un-rotated) vectors
    pv = p @ u[:, v_idx]
    qw = (np.eye(n) - p) @ u[:, w_idx]
    # basis vectors are unit length, so an absolute cutoff is scale-correct here
    oracle_frame = bool((np.linalg.matrix_rank(pv, tol=ORACLE_TOL) if pv.size else 0) == decomp.rank)
    oracle_riesz = bool((np.linalg.matrix_rank(qw, tol=ORACLE_TOL) if qw.size else 0) == len(w_idx))

    report = DualityReport(
        frame, riesz, a_val, c2_val, quantitative, frame == riesz, oracle_frame, oracle_riesz, sv_b, sv_c
    )
    if strict and not report.ok:
        raise DualityViolation("frame/Riesz duality check failed", decomp.to_dict() | report.to_dict())
    return report


# discrete model over Z_N


@dataclass(frozen=True)
class DiscreteModel:
    N: int
    lam: tuple[int, ...]
    spec: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("N must be positive")
        for name in ("lam", "spec"):
            vals = tuple(int(x) for x in getattr(self, name))
            if len(set(vals)) != len(vals):
                raise ValueError(f"{name} has duplicates")
            if any(x < 0 or x >= self.N for x in vals):
                raise ValueError(f"{name} must lie in 0..{self.N - 1}")
            object.__setattr__(self, name, tuple(sorted(vals)))

    def complement(self) -> "DiscreteModel":
        full = range(self.N)
        return DiscreteModel(
            self.N, tuple(i for i in full if i not in self.lam), tuple(i for i in full if i not in self.spec)
        )

    def to_dict(self) -> dict:
        return {"N": self.N, "lambda": list(self.lam), "S": list(self.spec)}


def character_matrix(n: int, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """``E[j, k] = exp(2 pi i rows[j] cols[k] / n) / sqrt(n)``."""
    r = np.asarray(rows, dtype=np.int64).reshape(-1, 1)
    c = np.asarray(cols, dtype=np.int64).reshape(1, -1)
    phase = (r * c) % n  # reduce before exponentiating: exact integer phases
    return np.exp(2j * np.pi * phase / n) / math.sqrt(n)


@dataclass(frozen=True)
class SamplingReport:
    verdict: bool
    sigma_min: float
    sigma_max: float


@dataclass(frozen=True)
class InterpolationReport:
    verdict: bool
    sigma_min_row: float
    sigma_max: float


def _padded_sv(mat: np.ndarray, count: int) -> tuple[float, float]:
    sv = np.linalg.svd(mat, compute_uv=False)
    smax = float(sv[0]) if sv.size else 0.0
    smin = float(sv[count - 1]) if sv.size >= count else 0.0
    return smin, smax


def discrete_sampling_check(m: DiscreteModel) -> SamplingReport:
    """Injectivity (stable) of restricting spectrum-``S`` signals to ``Lam``.

    With ``S`` empty the signal space is zero and every ``Lam`` samples it.
    """
    if not m.spec:
        return SamplingReport(True, 0.0, 0.0)
    if not m.lam:
        return SamplingReport(False, 0.0, 0.0)
    smin, smax = _padded_sv(character_matrix(m.N, m.lam, m.spec), len(m.spec))
    return SamplingReport(bool(smin > _tol(m.N, smax)), smin, smax)


def discrete_interpolation_check(m: DiscreteModel) -> InterpolationReport:
    """Surjectivity of the same restriction: full row rank of the submatrix."""
    if not m.lam:
        return InterpolationReport(True, 0.0, 0.0)
    if not m.spec:
        return InterpolationReport(False, 0.0, 0.0)
    smin, smax = _padded_sv(character_matrix(m.N, m.lam, m.spec), len(m.lam))
    return InterpolationReport(bool(smin > _tol(m.N, smax)), smin, smax)


@dataclass(frozen=True)
class DiscreteDualityReport:
    model: DiscreteModel
    sampling: bool
    interpolation_complement: bool
    prop4_frame: bool
    prop4_riesz: bool
    sigma_min: float
    sigma_min_row_complement: float

    @property
    def consistent(self) -> bool:
        return self.sampling == self.interpolation_complement == self.prop4_frame == self.prop4_riesz

    def to_dict(self) -> dict:
        return self.model.to_dict() | {
            "sampling": self.sampling,
            "interpolation_complement": self.interpolation_complement,
            "prop4_frame": self.prop4_frame,
            "prop4_riesz": self.prop4_riesz,
            "sigma_min": self.sigma_min,
            "sigma_min_row_complement": self.sigma_min_row_complement,
            "consistent": self.consistent,
        }


def discrete_duality_verify(m: DiscreteModel, strict: bool = True) -> DiscreteDualityReport:
    """``Lam`` samples ``S``  <=>  ``Z_N \\ Lam`` interpolates ``Z_N \\ S``.

    The same pair of verdicts is also obtained from ``prop4_verify`` with the
    character basis and the coordinate projector onto ``S``.
    """
    samp = discrete_sampling_check(m)
    interp = discrete_interpolation_check(m.complement())
    n = m.N
    diag = np.zeros(n)
    diag[list(m.spec)] = 1.0
    decomp = OrthoDecomposition(np.diag(diag), m.lam, character_matrix(n, range(n), range(n)).T)
    p4 = prop4_verify(decomp, strict=False)
    report = DiscreteDualityReport(
        m, samp.verdict, interp.verdict, p4.frame_verdict, p4.riesz_verdict, samp.sigma_min, interp.sigma_min_row
    )
    if strict and not (report.consistent and p4.ok):
        raise DualityViolation("discrete sampling/interpolation duality failed", report.to_dict())
    return report


def _subset(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)


def _scan_one(n: int) -> tuple[int, int, list[dict]]:
    failures = []
    sampling_true = 0
    for lm in range(1 << n):
        lam = _subset(lm, n)
        for sm in range(1 << n):
            rep = discrete_duality_verify(DiscreteModel(n, lam, _subset(sm, n)), strict=False)
            sampling_true += rep.sampling
            if not rep.consistent:
                failures.append(rep.to_dict())
    return 1 << (2 * n), sampling_true, failures


@dataclass(frozen=True)
class ScanStatistics:
    n_max: int
    pairs: dict[int, int]
    sampling_pairs: dict[int, int]
    failures: tuple[dict, ...]

    @property
    def total(self) -> int:
        return sum(self.pairs.values())

    def to_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "pairs": {str(k): v for k, v in self.pairs.items()},
            "sampling_pairs": {str(k): v for k, v in self.sampling_pairs.items()},
            "total": self.total,
            "failures": list(self.failures),
        }


def worker_count(default: int | None = None) -> int:
    env = os.environ.get("SAMPDUAL_WORKERS")
    if env:
        return max(1, int(env))
    return default if default is not None else (os.cpu_count() or 1)


def exhaustive_duality_scan(n_max: int, workers: int | None = None, raise_on_failure: bool = True) -> ScanStatistics:
    """Every ``(Lam, S)`` pair for every ``N <= n_max``."""
    if not 1 <= n_max <= 12:
        raise ValueError("n_max must lie in 1..12")
    sizes = list(range(1, n_max + 1))
    nworkers = min(worker_count() if workers is None else workers, len(sizes))
    if nworkers > 1:
        with ProcessPoolExecutor(nworkers) as pool:
            results = list(pool.map(_scan_one, sizes))
    else:
        results = [_scan_one(n) for n in sizes]
    failures = tuple(
        sorted((f for _, _, fs in results for f in fs), key=lambda d: (d["N"], d["lambda"], d["S"]))
    )
    stats = ScanStatistics(
        n_max,
        {n: r[0] for n, r in zip(sizes, results)},
        {n: r[1] for n, r in zip(sizes, results)},
        failures,
    )
    if raise_on_failure and failures:
        raise DualityViolation("exhaustive scan found a counterexample", failures[0])
    return stats


def iter_coordinate_instances(n: int) -> Iterable[OrthoDecomposition]:
    """All coordinate projectors with all partitions of the standard basis."""
    for pm in range(1 << n):
        proj = np.diag([float(pm >> i & 1) for i in range(n)])
        for vm in range(1 << n):
            yield OrthoDecomposition(proj, _subset(vm, n))


def random_instance(n: int, rng: np.random.Generator) -> OrthoDecomposition:
    """Projector onto a random subspace, random basis, random partition."""
    k = int(rng.integers(0, n + 1))
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, _ = np.linalg.qr(z)
    span = q[:, :k]
    proj = span @ span.conj().T
    zb = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    basis, _ = np.linalg.qr(zb)
    part = tuple(int(i) for i in np.flatnonzero(rng.random(n) < 0.5))
    return OrthoDecomposition(proj, part, basis)
