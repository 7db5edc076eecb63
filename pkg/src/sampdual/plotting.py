"""Optional PNG figures for experiment results.

Only imported when figures are requested, so matplotlib stays out of the
numerical path.  Output is byte-stable: the Agg backend, a fixed size
and dpi, and no software or date metadata.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

DPI = 100
SIZE = (6.4, 4.0)
_META = {"Software": None}


def _png(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=DPI, metadata=_META)
    plt.close(fig)
    return buf.getvalue()


def _density_sweep(result) -> dict[str, bytes]:
    rows = result.tables["density_sweep"].rows
    crit = result.records["transition"]["critical_alpha"]
    alpha = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=SIZE)
    ax.plot(alpha, [r[3] for r in rows], "o-", label="Riesz lower")
    ax.plot(alpha, [r[4] for r in rows], "s--", label="frame lower")
    ax.axvline(crit, color="0.5", lw=0.8)
    ax.set_xlabel("spacing alpha")
    ax.set_ylabel("lower bound estimate")
    ax.legend()
    return {"density_sweep": _png(fig)}


def _stability(result) -> dict[str, bytes]:
    rows = result.tables["stability"].rows
    deltas = sorted({r[0] for r in rows})
    fig, (left, right) = plt.subplots(1, 2, figsize=(SIZE[0] * 1.6, SIZE[1]))
    left.scatter([r[3] for r in rows], [r[2] for r in rows], s=6)
    top = max(r[3] for r in rows)
    left.plot([0, top], [0, top], color="0.5", lw=0.8)
    left.set_xlabel("bound")
    left.set_ylabel("measured ||R' - R||")
    means = [sum(r[4] for r in rows if r[0] == d) / sum(1 for r in rows if r[0] == d) for d in deltas]
    right.plot(deltas, means, "o-")
    right.set_xlabel("delta")
    right.set_ylabel("mean frame lower estimate")
    return {"stability": _png(fig)}


def _poisson(result) -> dict[str, bytes]:
    rows = result.tables["poisson"].rows
    fig, ax = plt.subplots(figsize=SIZE)
    for eps in sorted({r[0] for r in rows}):
        sel = [r for r in rows if r[0] == eps]
        ax.loglog([r[1] for r in sel], [max(r[3], 1e-300) for r in sel], "o-", label=f"|sum|, eps={eps:.4g}")
        ax.loglog([r[1] for r in sel], [r[4] for r in sel], ":", color="0.5")
    ax.set_xlabel("M")
    ax.legend(fontsize="small")
    return {"poisson": _png(fig)}


def _disconnected(result) -> dict[str, bytes]:
    rows = result.tables["disconnected"].rows
    fig, ax = plt.subplots(figsize=SIZE)
    for label in ("first", "second"):
        sel = [r for r in rows if r[0] == label]
        ax.plot([r[1] for r in sel], [r[3] for r in sel], "o-", label=label)
    ax.set_xlabel("window T")
    ax.set_ylabel("Riesz lower estimate")
    ax.set_ylim(bottom=-0.05, top=max(1.05, max(r[3] for r in rows) * 1.05))
    ax.legend()
    return {"disconnected": _png(fig)}


_RENDERERS = {
    "density_sweep": _density_sweep,
    "stability": _stability,
    "poisson": _poisson,
    "disconnected": _disconnected,
}


def render_figures(result) -> dict[str, bytes]:
    """PNG bytes keyed by figure name; empty for kinds without a figure."""
    fn = _RENDERERS.get(result.kind)
    if fn is None:
        return {}
    with plt.rc_context({"svg.hashsalt": "sampdual", "path.simplify": True}):
        return fn(result)
