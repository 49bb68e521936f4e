"""Small shared helpers: alpha-range snapping and probability clamping."""

from __future__ import annotations

import math

# Float alpha values like 2/3 land epsilon-close to a rational boundary; without
# snapping, ceil((1 - 2/3) * 9) evaluates to 4 instead of 3.  All alpha-dependent
# index arithmetic in the package shares this epsilon.
ALPHA_EPS = 1e-9

# Probabilities computed through exp() may exceed 1 by a few ulp; clamp within
# this slack (values further outside [0, 1] indicate a bug and are not hidden).
PROB_EPS = 1e-12


def alpha_cut_range(n: int, alpha: float) -> tuple[int, int]:
    """The inclusive index range ceil((1-alpha) n) .. floor(alpha n), snapped.

    Requires 1/2 < alpha < 1 so that both sides of a cut at k in the range have
    at most alpha*n vertices.
    """
    if not 0.5 < alpha < 1.0:
        raise ValueError(f"alpha={alpha} outside (1/2, 1)")
    k_lo = math.ceil((1.0 - alpha) * n - ALPHA_EPS)
    k_hi = math.floor(alpha * n + ALPHA_EPS)
    return max(1, k_lo), min(n, k_hi)


def balanced_at_most(size: int, n: int, alpha: float) -> bool:
    """Whether a side of ``size`` vertices respects the alpha*n balance cap."""
    return size <= alpha * n + ALPHA_EPS


def clamp01(x: float) -> float:
    """Clamp a probability to [0, 1], tolerating PROB_EPS of float overshoot."""
    if x < 0.0:
        if x < -PROB_EPS:
            raise ValueError(f"probability {x} below 0 beyond tolerance")
        return 0.0
    if x > 1.0:
        if x > 1.0 + PROB_EPS:
            raise ValueError(f"probability {x} above 1 beyond tolerance")
        return 1.0
    return x
