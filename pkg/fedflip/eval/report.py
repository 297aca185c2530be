"""Report rendering."""

from typing import Dict, List, Optional

from fedflip.eval.metrics import ClassificationReport

_HEADERS = ("precision", "recall", "f1-score", "support")


def format_report(r: ClassificationReport) -> str:
    """Fixed-width classification report, two decimals per metric."""
    labels = [c.name for c in r.per_class] + ["macro avg", "weighted avg", "accuracy"]
    width = max(len(label) for label in labels)

    def row(label: str, cells: List[str]) -> str:
        return f"{label:>{width}} " + " ".join(f"{cell:>9}" for cell in cells)

    lines = [row("", list(_HEADERS)), ""]
    for c in r.per_class:
        lines.append(row(c.name, [f"{c.precision:.2f}", f"{c.recall:.2f}", f"{c.f1:.2f}", str(c.support)]))
    lines.append("")
    for label, avg in (("macro avg", r.macro_avg), ("weighted avg", r.weighted_avg)):
        lines.append(row(label, [f"{avg.precision:.2f}", f"{avg.recall:.2f}", f"{avg.f1:.2f}",
                                 str(r.total_support)]))
    lines.append(row("accuracy", ["", "", f"{r.accuracy:.2f}", str(r.total_support)]))
    return "\n".join(lines) + "\n"


def format_percent(value: Optional[float]) -> str:
    """Accuracy as a percentage with three decimals (0.67099 -> '67.099')."""
    return "" if value is None else f"{value * 100:.3f}"


def metrics_record(r: ClassificationReport, final_loss: Optional[float] = None) -> Dict[str, str]:
    """Flat key/value view of a report, four decimals."""
    record = {"accuracy": f"{r.accuracy:.4f}"}
    if final_loss is not None:
        record["loss"] = f"{final_loss:.4f}"
    record["total_support"] = str(r.total_support)
    for c in r.per_class:
        record[f"class_{c.name}_precision"] = f"{c.precision:.4f}"
        record[f"class_{c.name}_recall"] = f"{c.recall:.4f}"
        record[f"class_{c.name}_f1"] = f"{c.f1:.4f}"
        record[f"class_{c.name}_support"] = str(c.support)
    for prefix, avg in (("macro_avg", r.macro_avg), ("weighted_avg", r.weighted_avg)):
        record[f"{prefix}_precision"] = f"{avg.precision:.4f}"
        record[f"{prefix}_recall"] = f"{avg.recall:.4f}"
        record[f"{prefix}_f1"] = f"{avg.f1:.4f}"
    return record


def format_record(record: Dict[str, str]) -> str:
    return "".join(f"{key}={value}\n" for key, value in record.items())
