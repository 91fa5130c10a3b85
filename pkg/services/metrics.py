# services/metrics.py

"""Evaluation records and the two views over them: brand recognition and phishing classification."""

from enum import Enum
from typing import Any, Dict, Iterable, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from models.errors import PreconditionError
from models.records import (
    TOOL_BUDGET_CAP,
    BrandVerdict,
    Classification,
    ConfusionCounts,
    GroundTruth,
    Label,
    Verdict,
)


class BrandOutcome(str, Enum):
    CORRECT = "correct"
    WRONG = "wrong"
    UNKNOWN = "unknown"


def _canonical(name: str) -> str:
    return " ".join(name.split()).casefold()


def brand_outcome(verdict: BrandVerdict, label: Optional[GroundTruth]) -> Optional[BrandOutcome]:
    """Unknown for a NoBrand verdict; Correct/Wrong against the label's aliases otherwise.

    None when a brand was named but the label carries no true brand to compare against.
    """
    if verdict.is_no_brand:
        return BrandOutcome.UNKNOWN
    if label is None or not label.true_brand:
        return None
    aliases = {_canonical(alias) for alias in label.true_brand}
    return BrandOutcome.CORRECT if _canonical(verdict.brand_name) in aliases else BrandOutcome.WRONG


class EvalRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    sample_id: str
    verdict: BrandVerdict
    classification: Optional[Classification] = None
    label: Optional[GroundTruth] = None
    brand_outcome: Optional[BrandOutcome] = None
    domains_checked: List[str] = Field(default_factory=list)
    ablation: Dict[str, Classification] = Field(default_factory=dict)
    wall_time: float = 0.0


class Metrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    precision: float
    recall: float
    accuracy: float
    f1: float


class BrandCounts(BaseModel):
    model_config = ConfigDict(frozen=True)

    correct: int = 0
    wrong: int = 0
    unknown: int = 0

    @property
    def total(self) -> int:
        return self.correct + self.wrong + self.unknown


class RoundsSummary(BaseModel):
    """How many tool rounds the agent spent before answering."""

    model_config = ConfigDict(frozen=True)

    mean: float = 0.0
    histogram: List[int] = Field(default_factory=lambda: [0] * (TOOL_BUDGET_CAP + 1))


class AblationRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    checker: str
    counts: ConfusionCounts
    metrics: Metrics


class EvalReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    counts: ConfusionCounts
    precision: float = Field(ge=0.0, le=1.0)
    recall: float = Field(ge=0.0, le=1.0)
    accuracy: float = Field(ge=0.0, le=1.0)
    f1: float = Field(ge=0.0, le=1.0)
    brand_counts: BrandCounts
    rounds: RoundsSummary = Field(default_factory=RoundsSummary)
    errored: int = 0
    errored_samples: Dict[str, str] = Field(default_factory=dict)
    unlabeled: int = 0
    ablation: List[AblationRow] = Field(default_factory=list)
    config: Dict[str, Any] = Field(default_factory=dict)


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def metrics_from_counts(counts: ConfusionCounts) -> Metrics:
    """Phishing is the positive class; every ratio with a zero denominator is 0."""
    precision = _ratio(counts.tp, counts.tp + counts.fp)
    recall = _ratio(counts.tp, counts.tp + counts.fn)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics(precision=precision, recall=recall, accuracy=_ratio(counts.tp + counts.tn, counts.total), f1=f1)


def confusion_counts(pairs: Iterable[tuple]) -> ConfusionCounts:
    """Tally (label, classification) pairs."""
    tally = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    for label, classification in pairs:
        phishing = classification.value is Verdict.PHISHING
        if label.label is Label.PHISH:
            tally["tp" if phishing else "fn"] += 1
        else:
            tally["fp" if phishing else "tn"] += 1
    return ConfusionCounts(**tally)


def summarize_rounds(verdicts: Iterable[BrandVerdict]) -> RoundsSummary:
    histogram = [0] * (TOOL_BUDGET_CAP + 1)
    for verdict in verdicts:
        histogram[verdict.rounds_used] += 1
    total = sum(histogram)
    mean = sum(rounds * n for rounds, n in enumerate(histogram)) / total if total else 0.0
    return RoundsSummary(mean=mean, histogram=histogram)


def compute_metrics(records: List[EvalRecord], config: Optional[Dict[str, Any]] = None) -> EvalReport:
    for record in records:
        if record.label is None or record.classification is None:
            raise PreconditionError(f"Record {record.sample_id} lacks a label or a classification.")

    counts = confusion_counts((r.label, r.classification) for r in records)
    metrics = metrics_from_counts(counts)

    tally = {outcome: 0 for outcome in BrandOutcome}
    for record in records:
        if record.label.true_brand and record.brand_outcome is not None:
            tally[record.brand_outcome] += 1

    ablation = []
    checkers: List[str] = []
    for record in records:
        for name in record.ablation:
            if name not in checkers:
                checkers.append(name)
    for checker in checkers:
        ablated = confusion_counts((r.label, r.ablation[checker]) for r in records if checker in r.ablation)
        ablation.append(AblationRow(checker=checker, counts=ablated, metrics=metrics_from_counts(ablated)))

    return EvalReport(
        counts=counts,
        precision=metrics.precision,
        recall=metrics.recall,
        accuracy=metrics.accuracy,
        f1=metrics.f1,
        brand_counts=BrandCounts(
            correct=tally[BrandOutcome.CORRECT],
            wrong=tally[BrandOutcome.WRONG],
            unknown=tally[BrandOutcome.UNKNOWN],
        ),
        rounds=summarize_rounds(r.verdict for r in records),
        ablation=ablation,
        config=dict(config or {}),
    )
