"""View-1 decision-value providers.

A baseline is anything that yields a c x N matrix of real decision values for
view-1 samples: a built-in classifier trained here (ridge regression, KNN,
Gaussian naive Bayes, linear SVM) or an externally produced prediction file
(the privacy-preserving mode, where the raw view-1 features never enter the
pipeline).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError, ParseError, TrainingError

BASELINE_KINDS = ("ridge_regression", "knn", "gaussian_nb", "linear_svm", "external")

PM1 = "pm1"
ZERO_ONE = "zero_one"


@dataclass(frozen=True)
class LabelMatrix:
    """One-vs-rest class assignments for N samples, one column per sample.

    ``pm1`` encoding has exactly one +1 per column and -1 elsewhere;
    ``zero_one`` has a single 1 per column and 0 elsewhere.
    """

    values: np.ndarray
    encoding: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 2:
            raise InputError("label matrix must be c x N")
        if self.encoding == PM1:
            if not np.all(np.isin(v, (-1.0, 1.0))):
                raise InputError("pm1 label matrix entries must be -1 or +1")
            if not np.all(np.sum(v == 1.0, axis=0) == 1):
                raise InputError("pm1 label matrix needs exactly one +1 per column")
        elif self.encoding == ZERO_ONE:
            if not np.all(np.isin(v, (0.0, 1.0))):
                raise InputError("zero_one label matrix entries must be 0 or 1")
            if not np.all(v.sum(axis=0) == 1.0):
                raise InputError("zero_one label matrix columns must sum to 1")
        else:
            raise InputError(f"unknown encoding {self.encoding!r}")

    @property
    def n_classes(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    def class_ids(self) -> np.ndarray:
        return np.argmax(self.values, axis=0)

    def to_pm1(self) -> "LabelMatrix":
        if self.encoding == PM1:
            return self
        return LabelMatrix(2.0 * self.values - 1.0, PM1)

    def to_zero_one(self) -> "LabelMatrix":
        if self.encoding == ZERO_ONE:
            return self
        return LabelMatrix((self.values + 1.0) / 2.0, ZERO_ONE)

    def select(self, idx: np.ndarray) -> "LabelMatrix":
        return LabelMatrix(self.values[:, idx], self.encoding)

    @classmethod
    def from_class_ids(
        cls, ids: np.ndarray, n_classes: int, encoding: str = PM1
    ) -> "LabelMatrix":
        ids = np.asarray(ids, dtype=int)
        if ids.ndim != 1:
            raise InputError("class ids must be a vector")
        if ids.min(initial=0) < 0 or ids.max(initial=0) >= n_classes:
            raise InputError(f"class ids must lie in 0..{n_classes - 1}")
        v = np.zeros((n_classes, ids.size))
        v[ids, np.arange(ids.size)] = 1.0
        out = cls(v, ZERO_ONE)
        return out if encoding == ZERO_ONE else out.to_pm1()


@dataclass(frozen=True)
class DecisionMatrix:
    """Real-valued classifier outputs, one c-vector per sample column."""

    values: np.ndarray
    classifier_id: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 2:
            raise InputError("decision matrix must be c x N")
        if not np.isfinite(v).all():
            raise InputError("decision matrix entries must be finite")

    @property
    def n_classes(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    def select(self, idx: np.ndarray) -> "DecisionMatrix":
        return DecisionMatrix(self.values[:, idx], self.classifier_id)


@dataclass(frozen=True)
class BaselineSpec:
    """Which decision-value provider to use and its hyperparameters."""

    kind: str
    k: int = 5
    regularization: float = 1.0
    path: str | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise InputError(f"unknown baseline kind {self.kind!r}")
        if self.k < 1:
            raise InputError("k must be >= 1")
        if not self.regularization > 0:
            raise InputError("regularization must be positive")
        if self.kind == "external" and not self.path:
            raise InputError("external baseline needs a prediction file path")
        if not self.name:
            object.__setattr__(self, "name", self._default_name())

    def _default_name(self) -> str:
        if self.kind == "knn":
            return f"knn{self.k}"
        if self.kind == "external":
            return "external"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "BaselineSpec":
        """Parse 'knn:5', 'ridge_regression:0.1', 'gaussian_nb', 'linear_svm:1.0'."""
        parts = [p.strip() for p in text.split(":")]
        kind = parts[0]
        if kind == "knn":
            return cls("knn", k=int(parts[1])) if len(parts) > 1 else cls("knn")
        if kind in ("ridge_regression", "linear_svm") and len(parts) > 1:
            return cls(kind, regularization=float(parts[1]))
        if len(parts) == 1:
            return cls(kind)
        raise InputError(f"cannot parse baseline spec {text!r}")


class BaselineModel:
    """A fitted view-1 classifier exposing decision values."""

    def __init__(self, spec: BaselineSpec, n_classes: int, n_features: int):
        self.spec = spec
        self.n_classes = n_classes
        self.n_features = n_features

    def _decision(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class _RidgeModel(BaselineModel):
    """One-vs-rest ridge regression on +-1 targets, closed form, centered bias."""

    def __init__(self, spec, x, y_pm1):
        super().__init__(spec, y_pm1.shape[0], x.shape[0])
        self._x_mean = x.mean(axis=1, keepdims=True)
        self._y_mean = y_pm1.mean(axis=1, keepdims=True)
        xc = x - self._x_mean
        yc = y_pm1 - self._y_mean
        a = xc @ xc.T + spec.regularization * np.eye(x.shape[0])
        self._w = np.linalg.solve(a, xc @ yc.T)  # (d, c)

    def _decision(self, x):
        return self._w.T @ (x - self._x_mean) + self._y_mean


class _KnnModel(BaselineModel):
    """k nearest neighbours; decision value 2*(class share among neighbours) - 1."""

    def __init__(self, spec, x, y_pm1):
        super().__init__(spec, y_pm1.shape[0], x.shape[0])
        self._x = x
        self._ids = np.argmax(y_pm1, axis=0)
        self._k = min(spec.k, x.shape[1])

    def _decision(self, x):
        sq = (
            np.sum(self._x * self._x, axis=0)[:, None]
            + np.sum(x * x, axis=0)[None, :]
            - 2.0 * (self._x.T @ x)
        )
        # stable sort keeps ties deterministic (lowest training index wins)
        order = np.argsort(sq, axis=0, kind="stable")[: self._k, :]
        votes = self._ids[order]  # (k, N)
        share = np.stack(
            [np.mean(votes == r, axis=0) for r in range(self.n_classes)]
        )
        return 2.0 * share - 1.0


class _GaussianNbModel(BaselineModel):
    """Gaussian naive Bayes; decision value 2*posterior - 1."""

    VAR_FLOOR = 1e-9

    def __init__(self, spec, x, y_pm1):
        super().__init__(spec, y_pm1.shape[0], x.shape[0])
        ids = np.argmax(y_pm1, axis=0)
        c = self.n_classes
        self._means = np.stack([x[:, ids == r].mean(axis=1) for r in range(c)])
        self._vars = np.maximum(
            np.stack([x[:, ids == r].var(axis=1) for r in range(c)]),
            self.VAR_FLOOR,
        )
        self._log_priors = np.log(
            np.array([np.mean(ids == r) for r in range(c)])
        )

    def _log_joint(self, x):
        out = np.empty((self.n_classes, x.shape[1]))
        for r in range(self.n_classes):
            d = x - self._means[r][:, None]
            out[r] = self._log_priors[r] - 0.5 * np.sum(
                d * d / self._vars[r][:, None] + np.log(2.0 * np.pi * self._vars[r])[:, None],
                axis=0,
            )
        return out

    def _decision(self, x):
        lj = self._log_joint(x)
        lj -= lj.max(axis=0, keepdims=True)
        p = np.exp(lj)
        p /= p.sum(axis=0, keepdims=True)
        return 2.0 * p - 1.0


class _LinearSvmModel(BaselineModel):
    """One-vs-rest linear SVM trained by full-batch hinge subgradient descent.

    Fixed 200 epochs with step 1/(reg*t) at epoch t; deterministic (no
    sampling), bias unregularized.
    """

    EPOCHS = 200

    def __init__(self, spec, x, y_pm1):
        super().__init__(spec, y_pm1.shape[0], x.shape[0])
        d, n = x.shape
        c = self.n_classes
        reg = spec.regularization
        w = np.zeros((d, c))
        b = np.zeros(c)
        for t in range(1, self.EPOCHS + 1):
            margins = y_pm1 * (w.T @ x + b[:, None])  # (c, n)
            active = (margins < 1.0).astype(float) * y_pm1
            grad_w = reg * w - (x @ active.T) / n
            grad_b = -active.sum(axis=1) / n
            step = 1.0 / (reg * t)
            w -= step * grad_w
            b -= step * grad_b
        self._w, self._b = w, b

    def _decision(self, x):
        return self._w.T @ x + self._b[:, None]


class _ExternalModel(BaselineModel):
    """Holds decision values loaded from a prediction file; cannot re-predict."""

    def __init__(self, spec, decisions: DecisionMatrix):
        super().__init__(spec, decisions.n_classes, 0)
        self.decisions = decisions

    def _decision(self, x):
        raise InputError(
            "external baselines carry fixed predictions; slice the loaded "
            "DecisionMatrix instead of calling decision_values"
        )


_FITTERS = {
    "ridge_regression": _RidgeModel,
    "knn": _KnnModel,
    "gaussian_nb": _GaussianNbModel,
    "linear_svm": _LinearSvmModel,
}


def fit_baseline(spec: BaselineSpec, x1_tr: np.ndarray, y_tr: LabelMatrix) -> BaselineModel:
    """Train a built-in baseline on view-1 features and pm1 labels."""
    if spec.kind == "external":
        raise InputError("external baselines are loaded, not fitted")
    if y_tr.encoding != PM1:
        raise InputError("fit_baseline expects pm1 labels")
    x = np.asarray(x1_tr, dtype=float)
    y = y_tr.values
    if x.ndim != 2 or x.shape[1] != y.shape[1]:
        raise InputError("X and Y sample counts disagree")
    n, c = x.shape[1], y.shape[0]
    if n < c:
        raise TrainingError(f"need at least {c} samples to train on {c} classes, got {n}")
    if np.unique(np.argmax(y, axis=0)).size < 2:
        raise TrainingError("training labels cover a single class")
    return _FITTERS[spec.kind](spec, x, y)


def decision_values(model: BaselineModel, x: np.ndarray) -> DecisionMatrix:
    """Evaluate a fitted baseline on view-1 inputs (d1 x N)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != model.n_features:
        raise InputError(
            f"expected {model.n_features} features, got {x.shape[0] if x.ndim == 2 else '?'}"
        )
    return DecisionMatrix(model._decision(x), classifier_id=model.spec.name)


def harden_decisions(f: DecisionMatrix | np.ndarray) -> LabelMatrix:
    """Per-column argmax as a zero_one label matrix; ties go to the smallest class."""
    v = f.values if isinstance(f, DecisionMatrix) else np.asarray(f, dtype=float)
    ids = np.argmax(v, axis=0)
    return LabelMatrix.from_class_ids(ids, v.shape[0], ZERO_ONE)


def load_external_predictions(
    path: str, expected_classes: int, expected_samples: int, has_header: bool = False
) -> DecisionMatrix:
    """Load an N-row, c-column CSV of decision scores into a c x N matrix."""
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            if has_header and i == 0:
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != expected_classes:
                raise ParseError(
                    f"{path}: row {i + 1} has {len(row)} columns, expected {expected_classes}"
                )
            parsed = []
            for j, cell in enumerate(row):
                try:
                    val = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: row {i + 1}, column {j + 1}: not a number: {cell!r}"
                    ) from None
                if not np.isfinite(val):
                    raise ParseError(
                        f"{path}: row {i + 1}, column {j + 1}: non-finite value {cell!r}"
                    )
                parsed.append(val)
            rows.append(parsed)
    if len(rows) != expected_samples:
        raise ParseError(
            f"{path}: expected {expected_samples} rows, found {len(rows)}"
        )
    return DecisionMatrix(np.array(rows).T, classifier_id=path)


def write_predictions_csv(path: str, decisions: DecisionMatrix | np.ndarray) -> None:
    """Write decision scores as one row per sample (lossless %.17g formatting)."""
    v = decisions.values if isinstance(decisions, DecisionMatrix) else np.asarray(decisions)
    np.savetxt(path, v.T, delimiter=",", fmt="%.17g")
