"""Independent brute-force oracles used to verify the dynamic programs.

The edit-distance oracle enumerates every monotone edit script (each step
one insert, delete, or substitute) and takes the cheapest, rather than
running any recurrence. Exponential, so only for short sequences.
"""

from __future__ import annotations

import math

from convdist.editops import FORBIDDEN


def brute_force_edit_distance(a, b, ins, del_, sub) -> float:
    """Minimum script cost by exhaustive path enumeration.

    ``sub`` may return FORBIDDEN to exclude a pair. Bounding by the best
    complete script so far only skips provably worse paths; the result is
    still the exact minimum.
    """
    best = math.inf

    def walk(i: int, j: int, acc: float) -> None:
        nonlocal best
        if acc >= best:
            return
        if i == len(a) and j == len(b):
            best = acc
            return
        if i < len(a):
            walk(i + 1, j, acc + del_(a[i]))
        if j < len(b):
            walk(i, j + 1, acc + ins(b[j]))
        if i < len(a) and j < len(b):
            w = sub(a[i], b[j])
            if w is not FORBIDDEN:
                walk(i + 1, j + 1, acc + w)

    walk(0, 0, 0.0)
    return best


def naive_pearson(x, y) -> float:
    """Textbook two-pass product-moment correlation, no shortcuts."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    num = sum((xi - mx) * (yi - my) for xi, yi in zip(x, y))
    den = math.sqrt(sum((xi - mx) ** 2 for xi in x)) * math.sqrt(
        sum((yi - my) ** 2 for yi in y)
    )
    return num / den


def welch_p_value(a, b) -> float:
    """Two-sided Welch t-test from the textbook formulas."""
    import numpy as np
    from scipy.special import stdtr

    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    t = (a.mean() - b.mean()) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    return 2.0 * float(stdtr(df, -abs(t)))
