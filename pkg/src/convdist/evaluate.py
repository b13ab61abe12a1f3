"""Evaluation harness: pairwise matrices, bootstrap correlation, ablation,
and scaling-factor tuning.

Every sampling operation is a pure function of its inputs and a seed; all
random draws happen in a single planning pass so parallel matrix fills can
never perturb reproducibility.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .conved import ConvEDConfig, _conv_ed_prepared, _unit_rows, cost_matrix
from .errors import ConfigError, CorrelationUndefinedError, MeasureError
from .model import Conversation, Corpus
from .store import EmbeddingStore
from .structed import action_flow

PairFn = Callable[[Conversation, Conversation], float]


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation.

    Exact Cauchy-Schwarz equality (num² == vx·vy) short-circuits to ±1 so
    perfectly linear inputs -- including self-correlation -- return exactly
    ±1.0 instead of drifting by an ulp through the square root.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim != 1 or xa.shape != ya.shape:
        raise ConfigError(f"pearson needs two equal-length vectors, got {xa.shape} vs {ya.shape}")
    if xa.size < 2:
        raise CorrelationUndefinedError("need at least 2 points")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    num = float(np.dot(dx, dy))
    vx = float(np.dot(dx, dx))
    vy = float(np.dot(dy, dy))
    if vx == 0.0 or vy == 0.0:
        raise CorrelationUndefinedError("correlation undefined for constant input")
    if num * num == vx * vy:
        return 1.0 if num > 0 else -1.0
    r = num / math.sqrt(vx * vy)
    return min(1.0, max(-1.0, r))


def significance_test(rs_a: Sequence[float], rs_b: Sequence[float]) -> float:
    """Two-sided Welch t-test on two per-sample correlation lists.

    Zero variance on both sides degenerates: equal means give p = 1 by
    convention, differing means p = 0.
    """
    a = np.asarray(rs_a, dtype=np.float64)
    b = np.asarray(rs_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ConfigError("significance test needs at least 2 values per side")
    if float(a.var(ddof=1)) == 0.0 and float(b.var(ddof=1)) == 0.0:
        return 1.0 if float(a.mean()) == float(b.mean()) else 0.0
    return float(_scipy_stats.ttest_ind(a, b, equal_var=False).pvalue)


@dataclass
class PairwiseMatrix:
    """Symmetric distance matrix over a fixed conversation ordering."""

    ids: list[str]
    values: np.ndarray
    measure: str = ""

    def __post_init__(self):
        n = len(self.ids)
        if self.values.shape != (n, n):
            raise ConfigError(f"matrix shape {self.values.shape} does not match {n} ids")

    def upper(self) -> np.ndarray:
        """Flattened strict upper triangle in row-major pair order."""
        iu = np.triu_indices(len(self.ids), k=1)
        return self.values[iu]

    def submatrix_upper(self, idx: np.ndarray) -> np.ndarray:
        sub = self.values[np.ix_(idx, idx)]
        iu = np.triu_indices(len(idx), k=1)
        return sub[iu]

    def value(self, id1: str, id2: str) -> float:
        i = self.ids.index(id1)
        j = self.ids.index(id2)
        return float(self.values[i, j])


def pairwise_matrix(corpus: Corpus, pair_fn: PairFn, measure: str = "") -> PairwiseMatrix:
    """Evaluate all distinct pairs once and mirror; diagonal stays zero."""
    convs = list(corpus)
    n = len(convs)
    values = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            try:
                d = float(pair_fn(convs[i], convs[j]))
            except Exception as exc:
                raise MeasureError(
                    f"{measure or 'measure'} failed on pair "
                    f"({convs[i].id!r}, {convs[j].id!r}): {exc}"
                ) from exc
            if not math.isfinite(d):
                raise MeasureError(
                    f"{measure or 'measure'} returned non-finite distance for "
                    f"({convs[i].id!r}, {convs[j].id!r})"
                )
            values[i, j] = d
            values[j, i] = d
    return PairwiseMatrix(ids=[c.id for c in convs], values=values, measure=measure)


# -- measure construction ----------------------------------------------


def conved_pair_fn(store: EmbeddingStore, cfg: ConvEDConfig) -> PairFn:
    """Pair function with per-conversation caching of normalized embeddings."""
    matrices: dict[str, np.ndarray] = {}
    speakers: dict[str, list[str]] = {}

    def prepare(conv: Conversation):
        if conv.id not in matrices:
            matrices[conv.id] = _unit_rows(store.matrix_for(conv), conv.id)
            speakers[conv.id] = [cfg.map_speaker(s) for s in conv.speakers()]
        return matrices[conv.id], speakers[conv.id]

    def pair(c1: Conversation, c2: Conversation) -> float:
        n1, s1 = prepare(c1)
        n2, s2 = prepare(c2)
        return _conv_ed_prepared(cost_matrix(n1, n2), s1, s2, cfg).distance

    return pair


def structed_pair_fn() -> PairFn:
    from .structed import STRUCT_COSTS
    from .editops import edit_distance

    flows: dict[str, tuple[str, ...]] = {}

    def pair(c1: Conversation, c2: Conversation) -> float:
        for c in (c1, c2):
            if c.id not in flows:
                flows[c.id] = action_flow(c).tokens
        t1, t2 = flows[c1.id], flows[c2.id]
        longest = max(len(t1), len(t2))
        if longest == 0:
            raise MeasureError("both action flows are empty")
        return edit_distance(t1, t2, STRUCT_COSTS).distance / longest

    return pair


def avgsem_pair_fn(store: EmbeddingStore) -> PairFn:
    from .baselines import mean_vector
    from .store import cosine_distance

    means: dict[str, np.ndarray] = {}

    def pair(c1: Conversation, c2: Conversation) -> float:
        for c in (c1, c2):
            if c.id not in means:
                means[c.id] = mean_vector(c, store)
        return cosine_distance(means[c1.id], means[c2.id])

    return pair


def d2v_pair_fn(docs) -> PairFn:
    from .baselines import d2v_dist

    def pair(c1: Conversation, c2: Conversation) -> float:
        return d2v_dist(c1.id, c2.id, docs)

    return pair


MEASURE_NAMES = ("conved", "conved-relaxed", "structed", "avgsem", "d2v")


@dataclass(frozen=True)
class MeasureSpec:
    """Picklable description of a measure; resolvable to a pair function.

    ``conved-relaxed`` is the actor-constraint ablation of ``conved`` and
    shares all its other parameters.
    """

    name: str
    alpha: float | None = None
    normalize: str = "none"
    ins_weight: float = 1.0
    del_weight: float = 1.0

    def __post_init__(self):
        if self.name not in MEASURE_NAMES:
            raise ConfigError(f"unknown measure {self.name!r}; choose from {MEASURE_NAMES}")
        if self.name.startswith("conved") and self.alpha is None:
            raise ConfigError(f"measure {self.name!r} needs an explicit alpha or preset")

    def conved_config(self) -> ConvEDConfig:
        assert self.alpha is not None
        return ConvEDConfig(
            alpha=self.alpha,
            ins_weight=self.ins_weight,
            del_weight=self.del_weight,
            enforce_actor=(self.name == "conved"),
            normalize=self.normalize,
        )


def build_pair_fn(
    spec: MeasureSpec,
    store: EmbeddingStore | None = None,
    docs=None,
) -> PairFn:
    if spec.name in ("conved", "conved-relaxed"):
        if store is None:
            raise ConfigError(f"measure {spec.name!r} needs an embedding store")
        return conved_pair_fn(store, spec.conved_config())
    if spec.name == "structed":
        return structed_pair_fn()
    if spec.name == "avgsem":
        if store is None:
            raise ConfigError("measure 'avgsem' needs an embedding store")
        return avgsem_pair_fn(store)
    if spec.name == "d2v":
        if docs is None:
            raise ConfigError("measure 'd2v' needs a document-vector store")
        return d2v_pair_fn(docs)
    raise ConfigError(f"unknown measure {spec.name!r}")


# -- bootstrap ----------------------------------------------------------


@dataclass
class BootstrapReport:
    """Per-sample Pearson correlations of a measure against a reference."""

    measure: str
    reference: str
    n_samples: int
    sample_size: int
    seed: int
    per_sample_r: list[float]
    mean_r: float
    normalize: str = "none"

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "reference": self.reference,
            "n_samples": self.n_samples,
            "sample_size": self.sample_size,
            "seed": self.seed,
            "normalize": self.normalize,
            "mean_r": self.mean_r,
            "per_sample_r": self.per_sample_r,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


def bootstrap_from_matrices(
    measure_matrix: PairwiseMatrix,
    ref_matrix: PairwiseMatrix,
    n_samples: int = 100,
    sample_size: int = 200,
    seed: int = 0,
    normalize: str = "none",
) -> BootstrapReport:
    """Correlate two precomputed matrices over repeated random subsets.

    Subsets are drawn without replacement within a sample and independently
    across samples; the whole procedure is a function of the seed.
    """
    if measure_matrix.ids != ref_matrix.ids:
        raise ConfigError("measure and reference matrices cover different corpora")
    n = len(measure_matrix.ids)
    if n < sample_size:
        raise ConfigError(f"corpus has {n} conversations, need >= {sample_size}")
    if sample_size < 2:
        raise ConfigError("sample_size must be at least 2")
    rng = np.random.default_rng(seed)
    per_sample: list[float] = []
    for s in range(n_samples):
        idx = rng.choice(n, size=sample_size, replace=False)
        x = measure_matrix.submatrix_upper(idx)
        y = ref_matrix.submatrix_upper(idx)
        try:
            per_sample.append(pearson(x, y))
        except CorrelationUndefinedError as exc:
            raise CorrelationUndefinedError(f"sample {s}: {exc}") from None
    return BootstrapReport(
        measure=measure_matrix.measure,
        reference=ref_matrix.measure,
        n_samples=n_samples,
        sample_size=sample_size,
        seed=seed,
        per_sample_r=per_sample,
        mean_r=float(np.mean(per_sample)),
        normalize=normalize,
    )


def bootstrap_correlation(
    corpus: Corpus,
    pair_fn: PairFn,
    ref_pair_fn: PairFn | None = None,
    n_samples: int = 100,
    sample_size: int = 200,
    seed: int = 0,
    measure: str = "measure",
    reference: str = "structed",
    normalize: str = "none",
) -> BootstrapReport:
    """Bootstrap a measure against a reference (structural flow by default)."""
    if ref_pair_fn is None:
        ref_pair_fn = structed_pair_fn()
    mm = pairwise_matrix(corpus, pair_fn, measure=measure)
    rm = pairwise_matrix(corpus, ref_pair_fn, measure=reference)
    return bootstrap_from_matrices(
        mm, rm, n_samples=n_samples, sample_size=sample_size, seed=seed, normalize=normalize
    )


def ablate_actor(
    corpus: Corpus,
    store: EmbeddingStore,
    alpha: float,
    n_samples: int = 100,
    sample_size: int = 200,
    seed: int = 0,
    normalize: str = "none",
) -> tuple[BootstrapReport, BootstrapReport]:
    """Bootstrap twice from one seed: actor constraint on, then relaxed."""
    ref = pairwise_matrix(corpus, structed_pair_fn(), measure="structed")
    reports = []
    for enforce in (True, False):
        cfg = ConvEDConfig(alpha=alpha, enforce_actor=enforce, normalize=normalize)
        label = "conved" if enforce else "conved-relaxed"
        mm = pairwise_matrix(corpus, conved_pair_fn(store, cfg), measure=label)
        reports.append(
            bootstrap_from_matrices(
                mm, ref, n_samples=n_samples, sample_size=sample_size,
                seed=seed, normalize=normalize,
            )
        )
    return reports[0], reports[1]


# -- alpha tuning -------------------------------------------------------


def default_alpha_grid() -> list[float]:
    """1.0 through 5.0 in 0.1 steps, as exact decimals."""
    return [round(k / 10, 1) for k in range(10, 51)]


@dataclass
class AlphaGrid:
    """Grid-search result: correlation per alpha, best value first-on-tie."""

    best_alpha: float
    grid: list[tuple[float, float | None]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "best_alpha": self.best_alpha,
            "grid": [{"alpha": a, "r": r} for a, r in self.grid],
        }


def tune_alpha(
    heldout: Corpus,
    store: EmbeddingStore,
    alpha_grid: Sequence[float] | None = None,
    enforce_actor: bool = True,
    ins_weight: float = 1.0,
    del_weight: float = 1.0,
) -> AlphaGrid:
    """Pick the alpha maximizing correlation with the structural metric.

    Cosine blocks per pair are computed once; only the cheap dynamic
    program reruns per grid point. Grid cells where the correlation is
    undefined are recorded as None and skipped; ties go to the smaller
    alpha.
    """
    grid = list(alpha_grid) if alpha_grid is not None else default_alpha_grid()
    if not grid:
        raise ConfigError("alpha grid is empty")
    convs = list(heldout)
    if len(convs) < 2:
        raise ConfigError("held-out corpus needs at least 2 conversations")

    ref = pairwise_matrix(heldout, structed_pair_fn(), measure="structed")
    ref_upper = ref.upper()

    units = [_unit_rows(store.matrix_for(c), c.id) for c in convs]
    base_speakers = [c.speakers() for c in convs]
    pairs: list[tuple[int, int]] = [
        (i, j) for i in range(len(convs)) for j in range(i + 1, len(convs))
    ]
    blocks = [cost_matrix(units[i], units[j]) for i, j in pairs]

    results: list[tuple[float, float | None]] = []
    best_alpha: float | None = None
    best_r = -math.inf
    for alpha in grid:
        cfg = ConvEDConfig(
            alpha=alpha,
            ins_weight=ins_weight,
            del_weight=del_weight,
            enforce_actor=enforce_actor,
        )
        dists = np.array(
            [
                _conv_ed_prepared(
                    blocks[k], base_speakers[i], base_speakers[j], cfg
                ).distance
                for k, (i, j) in enumerate(pairs)
            ]
        )
        try:
            r = pearson(dists, ref_upper)
        except CorrelationUndefinedError:
            results.append((alpha, None))
            continue
        results.append((alpha, r))
        if r > best_r:
            best_r = r
            best_alpha = alpha
    if best_alpha is None:
        raise CorrelationUndefinedError("correlation undefined at every grid point")
    return AlphaGrid(best_alpha=best_alpha, grid=results)
