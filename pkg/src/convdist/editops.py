"""Weighted edit distance over arbitrary sequences with alignment backtrace.

Costs are pluggable per element; substitutions may additionally be declared
forbidden, which removes that branch from the minimization entirely (no
large-constant tricks, so costs can never overflow into a forbidden pair).
Ties during backtrace break deterministically: substitute > delete > insert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

from .errors import CostModelError


class _Forbidden:
    """Sentinel for substitutions excluded from the minimization."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "FORBIDDEN"


FORBIDDEN = _Forbidden()

SUBSTITUTE = "substitute"
DELETE = "delete"
INSERT = "insert"


@dataclass(frozen=True)
class CostModel:
    """Per-element insertion/deletion weights and a pairwise substitution weight.

    ``sub`` may return :data:`FORBIDDEN` to rule a pair out; ``ins`` and
    ``del_`` must always return finite non-negative reals.
    """

    ins: Callable[[Any], float]
    del_: Callable[[Any], float]
    sub: Callable[[Any, Any], float | _Forbidden]

    @classmethod
    def uniform(cls, ins: float = 1.0, del_: float = 1.0, sub_mismatch: float = 2.0) -> CostModel:
        """Classic weights: constant ins/del, equality-gated substitution."""
        return cls(
            ins=lambda _e: ins,
            del_=lambda _e: del_,
            sub=lambda x, y: 0.0 if x == y else sub_mismatch,
        )


@dataclass(frozen=True)
class EditStep:
    """One alignment step.

    ``source`` indexes into the first sequence (delete/substitute),
    ``target`` into the second (insert/substitute). ``element`` carries the
    target-side element for insert/substitute so a script can be replayed
    against the source sequence alone.
    """

    op: str
    source: int | None
    target: int | None
    cost: float
    element: Any = None


@dataclass(frozen=True)
class AlignmentResult:
    """Total distance plus the edit script realizing it, in (i, j) order."""

    distance: float
    script: tuple[EditStep, ...]

    def step_cost_sum(self) -> float:
        return sum(s.cost for s in self.script)

    def counts(self) -> dict[str, int]:
        out = {SUBSTITUTE: 0, DELETE: 0, INSERT: 0}
        for s in self.script:
            out[s.op] += 1
        return out


def _checked(value: Any, what: str) -> float:
    cost = float(value)
    if math.isnan(cost) or math.isinf(cost) or cost < 0.0:
        raise CostModelError(f"{what} returned invalid cost {value!r}")
    return cost


def edit_distance(a: Sequence, b: Sequence, costs: CostModel) -> AlignmentResult:
    """Minimum-cost edit script turning ``a`` into ``b``.

    Standard dynamic program: base row/column accumulate deletion and
    insertion weights; interior cells minimize over delete, insert, and
    (when not forbidden) substitute. The full matrix is kept because the
    backtrace is always produced.
    """
    m, n = len(a), len(b)
    del_costs = [_checked(costs.del_(x), "del") for x in a]
    ins_costs = [_checked(costs.ins(y), "ins") for y in b]

    dist = [[0.0] * (n + 1) for _ in range(m + 1)]
    # choice per cell: 0 = substitute, 1 = delete, 2 = insert
    choice = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        dist[i][0] = dist[i - 1][0] + del_costs[i - 1]
        choice[i][0] = 1
    for j in range(1, n + 1):
        dist[0][j] = dist[0][j - 1] + ins_costs[j - 1]
        choice[0][j] = 2

    sub_fn = costs.sub
    for i in range(1, m + 1):
        ai = a[i - 1]
        row = dist[i]
        prev = dist[i - 1]
        del_i = del_costs[i - 1]
        choice_row = choice[i]
        for j in range(1, n + 1):
            best = prev[j] + del_i
            which = 1
            ins_c = row[j - 1] + ins_costs[j - 1]
            if ins_c < best:
                best = ins_c
                which = 2
            sub_w = sub_fn(ai, b[j - 1])
            if sub_w is not FORBIDDEN:
                sub_c = prev[j - 1] + _checked(sub_w, "sub")
                # ties prefer substitution: content pairing wins
                if sub_c <= best:
                    best = sub_c
                    which = 0
            row[j] = best
            choice_row[j] = which

    steps: list[EditStep] = []
    i, j = m, n
    while i > 0 or j > 0:
        which = choice[i][j]
        if which == 0:
            cost = dist[i][j] - dist[i - 1][j - 1]
            steps.append(EditStep(SUBSTITUTE, i - 1, j - 1, cost, element=b[j - 1]))
            i -= 1
            j -= 1
        elif which == 1:
            steps.append(EditStep(DELETE, i - 1, None, del_costs[i - 1]))
            i -= 1
        else:
            steps.append(EditStep(INSERT, None, j - 1, ins_costs[j - 1], element=b[j - 1]))
            j -= 1
    steps.reverse()
    return AlignmentResult(distance=dist[m][n], script=tuple(steps))


def replay(script: Sequence[EditStep], a: Sequence) -> list:
    """Apply an edit script to ``a``, returning the transformed sequence.

    Every source position must be consumed by exactly one delete or
    substitute step, in order; inserts and substitutes emit their carried
    target element.
    """
    out: list = []
    expect_i = 0
    for step in script:
        if step.op in (DELETE, SUBSTITUTE):
            if step.source != expect_i:
                raise IndexError(
                    f"script skips source position {expect_i} (got {step.source})"
                )
            if step.source is None or not 0 <= step.source < len(a):
                raise IndexError(f"source index {step.source} out of bounds")
            expect_i += 1
        if step.op in (INSERT, SUBSTITUTE):
            out.append(step.element)
    if expect_i != len(a):
        raise IndexError(f"script consumed {expect_i} of {len(a)} source elements")
    return out


def format_alignment(
    a: Sequence, b: Sequence, script: Sequence[EditStep], gap: str = "•"
) -> str:
    """Two-row gap diagram: top row is the source ``a``, bottom the target ``b``.

    Insertions leave a gap marker in the top row, deletions in the bottom
    one; each column is one alignment step.
    """
    top: list[str] = []
    bottom: list[str] = []
    for step in script:
        if step.op == SUBSTITUTE:
            top.append(str(a[step.source]))
            bottom.append(str(b[step.target]))
        elif step.op == DELETE:
            top.append(str(a[step.source]))
            bottom.append(gap)
        else:
            top.append(gap)
            bottom.append(str(b[step.target]))
    widths = [max(len(t), len(u)) for t, u in zip(top, bottom)]
    top_line = "  ".join(t.ljust(w) for t, w in zip(top, widths))
    mid_line = "  ".join("|".ljust(w) for w in widths)
    bot_line = "  ".join(u.ljust(w) for u, w in zip(bottom, widths))
    return "\n".join(line.rstrip() for line in (top_line, mid_line, bot_line))
