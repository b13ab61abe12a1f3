"""Disagreement-triplet sampling and human-label scoring.

A triplet is an anchor conversation plus two candidates; each measure's
verdict is which candidate sits closer to the anchor. Sampling keeps only
triplets where two measures disagree, since agreeing triplets cannot tell
the measures apart. Exact distance ties carry no judgement and are dropped.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, MeasureError
from .evaluate import PairwiseMatrix
from .model import Corpus


@dataclass(frozen=True)
class Triplet:
    """Anchor, two candidates, and per-measure verdicts (1 or 2)."""

    anchor_id: str
    cand1_id: str
    cand2_id: str
    verdicts: tuple[tuple[str, int], ...]

    def verdict_of(self, measure: str) -> int:
        for name, v in self.verdicts:
            if name == measure:
                return v
        raise KeyError(measure)


@dataclass
class TripletSample:
    """Kept triplets plus draw accounting for the agreement ratio."""

    triplets: list[Triplet]
    n_drawn: int
    n_ties: int
    n_agreements: int
    n_disagreements: int
    exhausted_budget: bool = False

    @property
    def agreement_ratio(self) -> float:
        compared = self.n_agreements + self.n_disagreements
        if compared == 0:
            return float("nan")
        return self.n_agreements / compared

    def to_dict(self) -> dict:
        return {
            "n_drawn": self.n_drawn,
            "n_ties": self.n_ties,
            "n_agreements": self.n_agreements,
            "n_disagreements": self.n_disagreements,
            "agreement_ratio": self.agreement_ratio,
            "exhausted_budget": self.exhausted_budget,
        }


def sample_disagreement_triplets(
    m1: PairwiseMatrix,
    m2: PairwiseMatrix,
    n: int,
    seed: int = 0,
    max_draws: int | None = None,
) -> TripletSample:
    """Rejection-sample uniform triplets until n disagreements are found.

    Draws are uniform over ordered (anchor, cand1, cand2) with distinct
    members. Returned triplets are deduplicated on (anchor, {cand1, cand2});
    the agreement ratio counts every non-tied draw. If the budget runs out
    first, the partial result is returned with a warning.
    """
    if m1.ids != m2.ids:
        raise ConfigError("matrices cover different corpora")
    size = len(m1.ids)
    if size < 3:
        raise ConfigError("need at least 3 conversations to form triplets")
    if n < 0:
        raise ConfigError("n must be non-negative")
    budget = max_draws if max_draws is not None else max(2000, 400 * n)

    rng = np.random.default_rng(seed)
    v1 = m1.values
    v2 = m2.values
    kept: list[Triplet] = []
    seen: set[tuple[int, frozenset[int]]] = set()
    drawn = ties = agree = disagree = 0
    while len(kept) < n and drawn < budget:
        a, c1, c2 = (int(k) for k in rng.choice(size, size=3, replace=False))
        drawn += 1
        d1 = v1[a, c1] - v1[a, c2]
        d2 = v2[a, c1] - v2[a, c2]
        if d1 == 0.0 or d2 == 0.0:
            ties += 1
            continue
        verdict1 = 1 if d1 < 0 else 2
        verdict2 = 1 if d2 < 0 else 2
        if verdict1 == verdict2:
            agree += 1
            continue
        disagree += 1
        dedup_key = (a, frozenset((c1, c2)))
        if dedup_key in seen:
            continue
        seen.add(dedup_key)
        kept.append(
            Triplet(
                anchor_id=m1.ids[a],
                cand1_id=m1.ids[c1],
                cand2_id=m1.ids[c2],
                verdicts=((m1.measure, verdict1), (m2.measure, verdict2)),
            )
        )
    exhausted = len(kept) < n
    if exhausted:
        warnings.warn(
            f"found {len(kept)} of {n} requested disagreement triplets "
            f"within {budget} draws",
            stacklevel=2,
        )
    return TripletSample(
        triplets=kept,
        n_drawn=drawn,
        n_ties=ties,
        n_agreements=agree,
        n_disagreements=disagree,
        exhausted_budget=exhausted,
    )


# -- export / import ----------------------------------------------------


def triplet_records(
    sample: TripletSample,
    corpus: Corpus | None = None,
    for_annotation: bool = False,
) -> list[dict]:
    """Serializable records; the annotator-facing variant carries the full
    texts and withholds the measures' verdicts."""
    records = []
    for k, t in enumerate(sample.triplets, start=1):
        rec: dict = {
            "triplet_id": f"t{k:04d}",
            "anchor_id": t.anchor_id,
            "cand1_id": t.cand1_id,
            "cand2_id": t.cand2_id,
        }
        if for_annotation:
            if corpus is None:
                raise ConfigError("annotation export needs the corpus for texts")
            for field_name, conv_id in (
                ("anchor", t.anchor_id),
                ("cand1", t.cand1_id),
                ("cand2", t.cand2_id),
            ):
                conv = corpus.get(conv_id)
                rec[field_name] = [
                    {"speaker": u.speaker, "text": u.text} for u in conv.utterances
                ]
        else:
            rec["verdicts"] = {name: v for name, v in t.verdicts}
        records.append(rec)
    return records


@dataclass(frozen=True)
class TripletLabel:
    """One human judgement: chosen candidate and annotator agreement level."""

    triplet_id: str
    chosen: str  # "1" | "2" | "undecided"
    agreement: float


def parse_labels(lines) -> list[TripletLabel]:
    labels = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"labels line {lineno}: invalid JSON: {exc.msg}") from None
        if not isinstance(rec, dict):
            raise ConfigError(f"labels line {lineno}: record is not an object")
        try:
            triplet_id = rec["triplet_id"]
            chosen = str(rec["chosen"])
            agreement = float(rec["agreement"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"labels line {lineno}: {exc}") from None
        if chosen not in ("1", "2", "undecided"):
            raise ConfigError(
                f"labels line {lineno}: chosen must be '1', '2', or 'undecided'"
            )
        if not 0.0 <= agreement <= 1.0:
            raise ConfigError(f"labels line {lineno}: agreement must be in [0, 1]")
        labels.append(TripletLabel(triplet_id, chosen, agreement))
    return labels


@dataclass
class AgreementReport:
    measure: str
    min_agreement: float
    retained: int
    matched: int
    skipped_low_agreement: int
    skipped_undecided: int

    @property
    def ratio(self) -> float:
        return self.matched / self.retained

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "min_agreement": self.min_agreement,
            "retained": self.retained,
            "matched": self.matched,
            "ratio": self.ratio,
            "skipped_low_agreement": self.skipped_low_agreement,
            "skipped_undecided": self.skipped_undecided,
        }


def agreement_ratio(
    triplets: list[dict],
    labels: list[TripletLabel],
    pair_fn,
    corpus: Corpus,
    measure: str = "measure",
    min_agreement: float = 0.8,
) -> AgreementReport:
    """Fraction of retained labeled triplets where the measure's closer
    candidate matches the human choice.

    Retained means agreement >= threshold and a decided label; a measure
    tie on a retained triplet counts as a non-match.
    """
    by_id = {}
    for rec in triplets:
        try:
            by_id[rec["triplet_id"]] = rec
        except (KeyError, TypeError):
            raise ConfigError("triplet record missing triplet_id") from None
    retained = matched = low = undecided = 0
    for label in labels:
        if label.triplet_id not in by_id:
            raise ConfigError(f"label references unknown triplet {label.triplet_id!r}")
        if label.agreement < min_agreement:
            low += 1
            continue
        if label.chosen == "undecided":
            undecided += 1
            continue
        rec = by_id[label.triplet_id]
        anchor = corpus.get(rec["anchor_id"])
        d1 = float(pair_fn(anchor, corpus.get(rec["cand1_id"])))
        d2 = float(pair_fn(anchor, corpus.get(rec["cand2_id"])))
        retained += 1
        if d1 == d2:
            continue
        measure_choice = "1" if d1 < d2 else "2"
        if measure_choice == label.chosen:
            matched += 1
    if retained == 0:
        raise MeasureError("no labeled triplets retained after filtering")
    return AgreementReport(
        measure=measure,
        min_agreement=min_agreement,
        retained=retained,
        matched=matched,
        skipped_low_agreement=low,
        skipped_undecided=undecided,
    )
