import random

import pytest

from models.errors import PreconditionError
from models.records import Basis, BrandVerdict, Classification, ConfusionCounts, GroundTruth, NamedBrand, NoBrand
from services.metrics import (
    BrandOutcome,
    EvalRecord,
    brand_outcome,
    compute_metrics,
    confusion_counts,
    metrics_from_counts,
    summarize_rounds,
)

PHISH = GroundTruth(label="phish", true_brand=["Microsoft", "Microsoft 365"])
BENIGN = GroundTruth(label="benign")
PHISHING = Classification.from_basis(Basis.DOMAIN_MISMATCH)
CLEARED = Classification.from_basis(Basis.DOMAIN_MATCH)


def verdict(brand=None, rounds=0):
    return BrandVerdict(brand=NamedBrand(name=brand) if brand else NoBrand(), reason="r", rounds_used=rounds)


def record(sample_id, label, classification, brand="Microsoft", rounds=0, ablation=None):
    v = verdict(brand, rounds)
    return EvalRecord(
        sample_id=sample_id,
        verdict=v,
        classification=classification,
        label=label,
        brand_outcome=brand_outcome(v, label),
        ablation=ablation or {},
    )


def records_for(tp=0, fp=0, tn=0, fn=0):
    rows = []
    rows += [record(f"tp{i}", PHISH, PHISHING) for i in range(tp)]
    rows += [record(f"fp{i}", BENIGN, PHISHING) for i in range(fp)]
    rows += [record(f"tn{i}", BENIGN, CLEARED) for i in range(tn)]
    rows += [record(f"fn{i}", PHISH, CLEARED) for i in range(fn)]
    return rows


def test_reference_values():
    m = metrics_from_counts(ConfusionCounts(tp=194, fp=16, tn=184, fn=6))
    assert m.precision == pytest.approx(0.92381, abs=5e-6)
    assert m.recall == pytest.approx(0.97)
    assert m.accuracy == pytest.approx(0.945)
    assert m.f1 == pytest.approx(0.94634, abs=5e-6)


def test_large_imbalanced_reference():
    m = metrics_from_counts(ConfusionCounts(tp=1808, fp=239, tn=4761, fn=3191))
    assert m.precision == pytest.approx(0.88324, abs=5e-6)
    assert m.recall == pytest.approx(0.36167, abs=5e-6)
    assert m.f1 == pytest.approx(0.51320, abs=5e-6)
    assert m.accuracy == pytest.approx(0.65697, abs=5e-6)


@pytest.mark.parametrize("tp,fn,recall", [(187, 13, 0.935), (1324, 1986, 0.4)])
def test_recall_only_references(tp, fn, recall):
    assert metrics_from_counts(ConfusionCounts(tp=tp, fn=fn)).recall == pytest.approx(recall)


def test_zero_denominators_are_zero():
    m = metrics_from_counts(ConfusionCounts())
    assert (m.precision, m.recall, m.accuracy, m.f1) == (0.0, 0.0, 0.0, 0.0)
    only_benign = metrics_from_counts(ConfusionCounts(tn=5))
    assert only_benign.precision == 0.0 and only_benign.recall == 0.0
    assert only_benign.accuracy == 1.0


def test_f1_is_harmonic_mean():
    rng = random.Random(5)
    for _ in range(200):
        counts = ConfusionCounts(tp=rng.randint(1, 300), fp=rng.randint(0, 300), tn=rng.randint(0, 300), fn=rng.randint(0, 300))
        m = metrics_from_counts(counts)
        assert m.f1 == pytest.approx(2 / (1 / m.precision + 1 / m.recall))
        assert min(m.precision, m.recall) <= m.f1 <= max(m.precision, m.recall)


def test_confusion_counts_from_pairs():
    counts = confusion_counts([(PHISH, PHISHING), (PHISH, CLEARED), (BENIGN, PHISHING), (BENIGN, CLEARED), (BENIGN, CLEARED)])
    assert counts == ConfusionCounts(tp=1, fn=1, fp=1, tn=2)


def test_compute_metrics_matches_counts():
    report = compute_metrics(records_for(tp=194, fp=16, tn=184, fn=6))
    assert report.counts == ConfusionCounts(tp=194, fp=16, tn=184, fn=6)
    assert report.accuracy == pytest.approx(0.945)


def test_report_is_invariant_to_record_order():
    rows = records_for(tp=7, fp=3, tn=11, fn=2)
    baseline = compute_metrics(rows)
    rng = random.Random(9)
    for _ in range(20):
        shuffled = rows[:]
        rng.shuffle(shuffled)
        assert compute_metrics(shuffled) == baseline


def test_records_without_label_or_classification_are_rejected():
    with pytest.raises(PreconditionError):
        compute_metrics([record("a", None, PHISHING)])
    with pytest.raises(PreconditionError):
        compute_metrics([record("a", PHISH, None)])


@pytest.mark.parametrize("predicted,outcome", [
    ("Microsoft", BrandOutcome.CORRECT),
    ("  microsoft   365 ", BrandOutcome.CORRECT),
    ("MICROSOFT", BrandOutcome.CORRECT),
    ("Adobe", BrandOutcome.WRONG),
    (None, BrandOutcome.UNKNOWN),
])
def test_brand_outcome_against_aliases(predicted, outcome):
    assert brand_outcome(verdict(predicted), PHISH) is outcome


def test_brand_outcome_without_true_brand():
    assert brand_outcome(verdict("PayPal"), BENIGN) is None
    assert brand_outcome(verdict("PayPal"), None) is None
    assert brand_outcome(verdict(None), BENIGN) is BrandOutcome.UNKNOWN


def test_brand_tally_counts_only_samples_with_true_brand():
    rows = [
        record("a", PHISH, PHISHING, "Microsoft"),
        record("b", PHISH, PHISHING, "Adobe"),
        record("c", PHISH, CLEARED, None),
        record("d", BENIGN, CLEARED, None),
        record("e", BENIGN, CLEARED, "PayPal"),
    ]
    brands = compute_metrics(rows).brand_counts
    assert (brands.correct, brands.wrong, brands.unknown) == (1, 1, 1)
    assert brands.total == 3


def test_rounds_summary():
    summary = summarize_rounds([verdict("A", 0), verdict("A", 1), verdict("A", 1), verdict("A", 5)])
    assert summary.histogram == [1, 2, 0, 0, 0, 1]
    assert summary.mean == pytest.approx(1.75)
    assert summarize_rounds([]).mean == 0.0


def test_ablation_rows_keep_first_seen_order():
    single = "single domain match"
    wide = "domain list match(10)"
    rows = [
        record("a", PHISH, PHISHING, ablation={single: PHISHING, wide: PHISHING}),
        record("b", BENIGN, CLEARED, ablation={single: PHISHING, wide: CLEARED}),
        record("c", BENIGN, CLEARED, ablation={single: CLEARED, wide: CLEARED}),
    ]
    report = compute_metrics(rows)
    assert [row.checker for row in report.ablation] == [single, wide]
    assert report.ablation[0].counts == ConfusionCounts(tp=1, fp=1, tn=1)
    assert report.ablation[1].counts == ConfusionCounts(tp=1, tn=2)
    assert report.ablation[1].metrics.precision == 1.0
