"""Learning-curve metrics: area under the curve and final-performance mean."""

from __future__ import annotations

import numpy as np


def _values(curve):
    vals = [r.mean_return if hasattr(r, "mean_return") else float(r) for r in curve]
    if not vals:
        raise ValueError("empty learning curve")
    return vals


def auc(curve) -> float:
    """Trapezoidal area over evaluation index (unit spacing).

    Scale therefore depends on the evaluation cadence; use it for ordinal
    comparisons between runs that share a cadence, not as an absolute.
    A single-point curve has zero area.
    """
    vals = _values(curve)
    if len(vals) == 1:
        return 0.0
    return float(np.trapezoid(vals))


def v_bar(curve, tail_evals: int = 10) -> float:
    """Mean return over the last `tail_evals` evaluations (fewer if shorter)."""
    if tail_evals < 1:
        raise ValueError("tail_evals must be >= 1")
    vals = _values(curve)
    return float(np.mean(vals[-tail_evals:]))
