"""Test the confusion matrix, classification report and its rendering."""

import numpy as np
import pytest

from fedflip.errors import MetricsError
from fedflip.eval.metrics import ConfusionMatrix, confusion, report
from fedflip.eval.report import format_percent, format_record, format_report, metrics_record

# Confusion counts (rows = true class) of a 2003-row global-model evaluation.
GLOBAL_MODEL_COUNTS = np.array([
    [0, 0, 0, 0, 61, 0, 0],
    [0, 1, 10, 0, 85, 0, 0],
    [0, 0, 19, 0, 204, 0, 5],
    [0, 0, 0, 0, 37, 0, 0],
    [0, 2, 10, 0, 1308, 0, 7],
    [0, 0, 0, 0, 32, 0, 0],
    [0, 0, 24, 0, 182, 0, 16],
])


def names(count: int):
    return [str(i) for i in range(count)]


def brute_force(preds, labels, num_classes):
    """Per-example TP/FP/FN counting."""
    tp = [0] * num_classes
    fp = [0] * num_classes
    fn = [0] * num_classes
    for p, t in zip(preds, labels):
        if p == t:
            tp[t] += 1
        else:
            fp[p] += 1
            fn[t] += 1
    rows = []
    for c in range(num_classes):
        precision = tp[c] / (tp[c] + fp[c]) if tp[c] + fp[c] else 0.0
        recall = tp[c] / (tp[c] + fn[c]) if tp[c] + fn[c] else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        rows.append((precision, recall, f1, tp[c] + fn[c]))
    return rows, sum(tp) / len(labels)


def test_confusion_identity():
    cm = confusion([0, 1, 2], [0, 1, 2], 3)
    assert np.array_equal(cm.counts, np.eye(3, dtype=np.int64))


def test_confusion_off_diagonal():
    cm = confusion([1, 1], [0, 0], 2)
    assert cm.counts.tolist() == [[0, 2], [0, 0]]
    assert cm.total == 2


def test_confusion_matches_recount(rng):
    preds = rng.integers(0, 7, size=500)
    labels = rng.integers(0, 7, size=500)

    expected = np.zeros((7, 7), dtype=np.int64)
    for p, t in zip(preds, labels):
        expected[t][p] += 1
    assert np.array_equal(confusion(preds, labels, 7).counts, expected)


def test_confusion_errors():
    with pytest.raises(MetricsError):
        confusion([0, 1], [0], 2)
    with pytest.raises(MetricsError):
        confusion([0, 2], [0, 1], 2)
    with pytest.raises(MetricsError):
        confusion([0, 1], [-1, 1], 2)


def test_report_diagonal():
    r = report(ConfusionMatrix(np.diag([3, 4, 5])), names(3))
    assert all((c.precision, c.recall, c.f1) == (1.0, 1.0, 1.0) for c in r.per_class)
    assert r.accuracy == 1.0
    assert (r.macro_avg.precision, r.weighted_avg.f1) == (1.0, 1.0)


def test_report_hand_computed():
    r = report(ConfusionMatrix(np.array([[5, 5], [0, 10]])), names(2))
    first, second = r.per_class

    assert (first.precision, first.recall) == (1.0, 0.5)
    assert first.f1 == pytest.approx(2 / 3)
    assert second.precision == pytest.approx(2 / 3)
    assert second.recall == 1.0
    assert second.f1 == pytest.approx(0.8)
    assert r.accuracy == 0.75
    assert (first.support, second.support) == (10, 10)


def test_report_zero_division_is_zero():
    r = report(ConfusionMatrix(GLOBAL_MODEL_COUNTS), names(7))
    never_predicted = r.per_class[0]
    assert (never_predicted.precision, never_predicted.recall, never_predicted.f1) == (0.0, 0.0, 0.0)
    assert never_predicted.support == 61


def test_report_empty_matrix():
    with pytest.raises(MetricsError):
        report(ConfusionMatrix(np.zeros((3, 3), dtype=np.int64)), names(3))


def test_report_name_count_mismatch():
    with pytest.raises(MetricsError):
        report(ConfusionMatrix(np.eye(3, dtype=np.int64)), names(2))


def test_report_matches_brute_force():
    """Test 1000 random cases against per-example counting."""
    rng = np.random.default_rng(99)
    for _ in range(1000):
        num_classes = int(rng.integers(2, 10))
        size = int(rng.integers(1, 60))
        preds = rng.integers(0, num_classes, size=size)
        labels = rng.integers(0, num_classes, size=size)

        r = report(confusion(preds, labels, num_classes), names(num_classes))
        expected, accuracy = brute_force(preds.tolist(), labels.tolist(), num_classes)

        for c, (precision, recall, f1, support) in zip(r.per_class, expected):
            assert (c.precision, c.recall, c.f1, c.support) == (precision, recall, f1, support)
        assert r.accuracy == accuracy
        assert r.weighted_avg.recall == r.accuracy
        assert r.macro_avg.precision == pytest.approx(sum(e[0] for e in expected) / num_classes, abs=1e-12)
        assert r.macro_avg.f1 == pytest.approx(sum(e[2] for e in expected) / num_classes, abs=1e-12)
        assert r.weighted_avg.f1 == pytest.approx(
            sum(e[2] * e[3] for e in expected) / size, abs=1e-12
        )


def test_report_matches_sklearn():
    metrics = pytest.importorskip("sklearn.metrics")
    rng = np.random.default_rng(5)
    for _ in range(50):
        num_classes = int(rng.integers(2, 8))
        preds = rng.integers(0, num_classes, size=80)
        labels = rng.integers(0, num_classes, size=80)
        r = report(confusion(preds, labels, num_classes), names(num_classes))

        precision, recall, f1, support = metrics.precision_recall_fscore_support(
            labels, preds, labels=list(range(num_classes)), zero_division=0
        )
        np.testing.assert_allclose([c.precision for c in r.per_class], precision, atol=1e-12)
        np.testing.assert_allclose([c.recall for c in r.per_class], recall, atol=1e-12)
        np.testing.assert_allclose([c.f1 for c in r.per_class], f1, atol=1e-12)
        assert [c.support for c in r.per_class] == support.tolist()

        weighted = metrics.precision_recall_fscore_support(
            labels, preds, labels=list(range(num_classes)), average="weighted", zero_division=0
        )
        assert r.weighted_avg.precision == pytest.approx(weighted[0], abs=1e-12)
        assert r.weighted_avg.recall == pytest.approx(weighted[1], abs=1e-12)
        assert r.weighted_avg.f1 == pytest.approx(weighted[2], abs=1e-12)


def test_format_report_layout():
    """Test the rendered report of the 2003-row evaluation."""
    text = format_report(report(ConfusionMatrix(GLOBAL_MODEL_COUNTS), names(7)))
    lines = text.rstrip("\n").split("\n")

    assert lines[0].split() == ["precision", "recall", "f1-score", "support"]
    assert lines[1] == ""
    rows = {line.split()[0]: line.split()[1:] for line in lines[2:9]}
    assert rows["0"] == ["0.00", "0.00", "0.00", "61"]
    assert rows["4"] == ["0.69", "0.99", "0.81", "1327"]
    assert lines[9] == ""
    assert lines[10].split() == ["macro", "avg", "0.27", "0.16", "0.16", "2003"]
    assert lines[11].split() == ["weighted", "avg", "0.57", "0.67", "0.57", "2003"]
    assert lines[12].split() == ["accuracy", "0.67", "2003"]
    assert len({len(line) for line in lines if line}) == 1


def test_format_report_perfect():
    text = format_report(report(ConfusionMatrix(np.diag([2, 2])), ["a", "b"]))
    for line in text.splitlines()[2:4]:
        assert line.split()[1:4] == ["1.00", "1.00", "1.00"]


def test_format_report_with_names():
    text = format_report(report(ConfusionMatrix(GLOBAL_MODEL_COUNTS), ["akiec", "bcc", "bkl", "df", "nv", "vasc", "mel"]))
    assert any(line.split()[:1] == ["nv"] for line in text.splitlines())


def test_format_percent():
    assert format_percent(1344 / 2003) == "67.099"
    assert format_percent(None) == ""


def test_metrics_record():
    r = report(ConfusionMatrix(np.array([[5, 5], [0, 10]])), names(2))
    record = metrics_record(r, final_loss=0.123456)

    assert record["accuracy"] == "0.7500"
    assert record["loss"] == "0.1235"
    assert record["class_0_recall"] == "0.5000"
    assert record["weighted_avg_recall"] == "0.7500"
    assert format_record({"a": "1", "b": "2"}) == "a=1\nb=2\n"
