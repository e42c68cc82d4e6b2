"""Security diagnostics: the sufficient condition and distance bookkeeping.

The integrated labels Y are *secure* when they are at least as close to the
ground truth as the best baseline prediction. A checkable sufficient
condition: some adapted anchor bar_k satisfies
tr((hat_j - Y)^T (truth - bar_k)) <= 0 for every j. These diagnostics need
the ground truth, so they are a post-hoc testing tool, not a deployment-time
certificate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .baselines import ZERO_ONE, LabelMatrix
from .exceptions import InputError


def _require_zero_one(lm: LabelMatrix, name: str) -> np.ndarray:
    if not isinstance(lm, LabelMatrix) or lm.encoding != ZERO_ONE:
        raise InputError(f"{name} must be a zero_one LabelMatrix")
    return lm.values


def check_condition(
    base_predictions: list[LabelMatrix],
    integrated: LabelMatrix,
    truth: LabelMatrix,
    anchor: LabelMatrix,
) -> int:
    """Count the j with tr((hat_j - Y)^T (truth - anchor)) <= 0.

    A full count (= number of baselines) certifies security for this anchor.
    """
    y = _require_zero_one(integrated, "integrated")
    star = _require_zero_one(truth, "truth")
    bar = _require_zero_one(anchor, "anchor")
    if y.shape != star.shape or y.shape != bar.shape:
        raise InputError("shape mismatch between integrated, truth and anchor")
    direction = star - bar
    count = 0
    for hat in base_predictions:
        h = _require_zero_one(hat, "base prediction")
        if h.shape != y.shape:
            raise InputError("base prediction shape mismatch")
        if float(np.sum((h - y) * direction)) <= 0.0:
            count += 1
    return count


def security_distances(
    base_predictions: list[LabelMatrix],
    integrated: LabelMatrix,
    truth: LabelMatrix,
) -> tuple[float, float, float, float]:
    """(best distance, integrated distance, best accuracy, integrated accuracy).

    Distances are squared Frobenius; accuracy = 1 - distance / (2t).
    """
    y = _require_zero_one(integrated, "integrated")
    star = _require_zero_one(truth, "truth")
    t = star.shape[1]
    best_dist = min(
        float(np.sum((_require_zero_one(h, "base prediction") - star) ** 2))
        for h in base_predictions
    )
    int_dist = float(np.sum((y - star) ** 2))
    return best_dist, int_dist, 1.0 - best_dist / (2 * t), 1.0 - int_dist / (2 * t)


@dataclass(frozen=True)
class SecurityReport:
    """Condition counts per anchor plus the distance/accuracy comparison."""

    condition_counts: tuple[int, ...]  # per anchor k, in [0, m]
    n_baselines: int
    best_distance: float
    integrated_distance: float
    best_accuracy: float
    integrated_accuracy: float

    @property
    def max_count(self) -> int:
        return max(self.condition_counts)

    @property
    def certified(self) -> bool:
        """Some anchor satisfies the condition for every baseline."""
        return self.max_count == self.n_baselines

    @property
    def secure(self) -> bool:
        return self.integrated_distance <= self.best_distance

    def to_json_dict(self) -> dict:
        return {
            "condition_counts": list(self.condition_counts),
            "n_baselines": self.n_baselines,
            "max_count": self.max_count,
            "certified": self.certified,
            "best_distance": self.best_distance,
            "integrated_distance": self.integrated_distance,
            "best_accuracy": self.best_accuracy,
            "integrated_accuracy": self.integrated_accuracy,
            "secure": self.secure,
        }

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)


def build_security_report(
    base_predictions: list[LabelMatrix],
    adapted_predictions: list[LabelMatrix],
    integrated: LabelMatrix,
    truth: LabelMatrix,
) -> SecurityReport:
    counts = tuple(
        check_condition(base_predictions, integrated, truth, anchor)
        for anchor in adapted_predictions
    )
    best_d, int_d, best_a, int_a = security_distances(
        base_predictions, integrated, truth
    )
    return SecurityReport(
        condition_counts=counts,
        n_baselines=len(base_predictions),
        best_distance=best_d,
        integrated_distance=int_d,
        best_accuracy=best_a,
        integrated_accuracy=int_a,
    )


def render_security_table(report: SecurityReport) -> str:
    """Text table in the style of the per-anchor condition-count diagnostics."""
    header = [f"anchor{k + 1}" for k in range(len(report.condition_counts))]
    header += ["best_dist", "int_dist", "best_acc", "int_acc", "secure"]
    row = [str(cnt) for cnt in report.condition_counts]
    row += [
        f"{report.best_distance:.4f}",
        f"{report.integrated_distance:.4f}",
        f"{report.best_accuracy:.4f}",
        f"{report.integrated_accuracy:.4f}",
        "yes" if report.secure else "no",
    ]
    widths = [max(len(h), len(r)) for h, r in zip(header, row)]
    line1 = "  ".join(h.rjust(w) for h, w in zip(header, widths))
    line2 = "  ".join(r.rjust(w) for r, w in zip(row, widths))
    return line1 + "\n" + line2 + "\n"
