"""Metrics, the paired t-test, reproducible splits and lambda cross-validation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .adaptation import adapt_classifier, predict_adapted
from .baselines import ZERO_ONE, DecisionMatrix, LabelMatrix, harden_decisions
from .exceptions import InputError
from .numerics import KernelSpec, cross_gram

DEFAULT_LAMBDA_GRID = tuple(10.0**p for p in range(-3, 4))


def _as_zero_one(y, name: str) -> np.ndarray:
    if isinstance(y, LabelMatrix):
        if y.encoding != ZERO_ONE:
            raise InputError(f"{name} must be zero_one encoded")
        return y.values
    return LabelMatrix(np.asarray(y, dtype=float), ZERO_ONE).values


def accuracy(y_pred, y_star) -> float:
    """1 - ||Y_pred - Y*||_F^2 / (2t); the fraction of matching columns.

    Evaluated as (2t - d)/(2t) so the result is bit-identical to the
    matching-column fraction for valid 0/1 matrices.
    """
    p = _as_zero_one(y_pred, "y_pred")
    s = _as_zero_one(y_star, "y_star")
    if p.shape != s.shape:
        raise InputError("prediction and truth shapes disagree")
    t = s.shape[1]
    dist = float(np.sum((p - s) ** 2))
    return (2 * t - dist) / (2 * t)


def f_score(y_pred, y_star) -> float:
    """Binary (c=2): F1 of class 0; multiclass: macro-averaged F1.

    A class absent from both prediction and truth contributes F1 = 0.
    """
    p = _as_zero_one(y_pred, "y_pred")
    s = _as_zero_one(y_star, "y_star")
    if p.shape != s.shape:
        raise InputError("prediction and truth shapes disagree")
    c = s.shape[0]
    pred_ids = np.argmax(p, axis=0)
    true_ids = np.argmax(s, axis=0)

    def f1(cls: int) -> float:
        tp = int(np.sum((pred_ids == cls) & (true_ids == cls)))
        fp = int(np.sum((pred_ids == cls) & (true_ids != cls)))
        fn = int(np.sum((pred_ids != cls) & (true_ids == cls)))
        denom = 2 * tp + fp + fn
        return 2.0 * tp / denom if denom else 0.0

    if c == 2:
        return f1(0)
    return float(np.mean([f1(r) for r in range(c)]))


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Modified Lentz evaluation of the incomplete-beta continued fraction."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-14:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function."""
    if not 0.0 <= x <= 1.0:
        raise InputError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    front = math.exp(
        a * math.log(x) + b * math.log(1.0 - x) - log_beta(a, b)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def t_two_tailed_pvalue(t_stat: float, df: int) -> float:
    """Two-tailed Student-t p-value via the incomplete beta identity."""
    if df < 1:
        raise InputError("df must be >= 1")
    if math.isinf(t_stat):
        return 0.0
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t_stat * t_stat))


WIN, TIE, LOSS = "win", "tie", "loss"


@dataclass(frozen=True)
class TTestResult:
    t_stat: float
    df: int
    p_value: float
    verdict: str  # win | tie | loss  (for the first argument)

    MARKS = {WIN: "•", TIE: "⊙", LOSS: "○"}

    @property
    def mark(self) -> str:
        return self.MARKS[self.verdict]

    def to_json_dict(self) -> dict:
        return {
            "t": self.t_stat,
            "df": self.df,
            "p": self.p_value,
            "verdict": self.verdict,
        }


def paired_t_test(
    scores_a: np.ndarray, scores_b: np.ndarray, alpha: float = 0.05
) -> TTestResult:
    """Paired two-tailed t-test; verdict is 'win' when a beats b significantly.

    Degenerate zero-variance differences: tie with p=1 when the mean
    difference is zero, else win/loss with p=0.
    """
    a = np.asarray(scores_a, dtype=float)
    b = np.asarray(scores_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise InputError("score vectors must have equal length >= 2")
    d = a - b
    n = d.size
    mean = float(d.mean())
    var = float(d.var(ddof=1))
    df = n - 1
    if var == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, df, 1.0, TIE)
        t_stat = math.inf if mean > 0 else -math.inf
        return TTestResult(t_stat, df, 0.0, WIN if mean > 0 else LOSS)
    t_stat = mean / math.sqrt(var / n)
    p = t_two_tailed_pvalue(t_stat, df)
    if p < alpha:
        return TTestResult(t_stat, df, p, WIN if mean > 0 else LOSS)
    return TTestResult(t_stat, df, p, TIE)


@dataclass(frozen=True)
class SplitPlan:
    """How to split N samples into train/test, repeatedly and reproducibly."""

    train_fraction: float
    repetitions: int
    master_seed: int

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise InputError("train_fraction must lie in (0, 1)")
        if self.repetitions < 1:
            raise InputError("repetitions must be >= 1")


def make_splits(n_total: int, plan: SplitPlan) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic disjoint exhaustive (train, test) index pairs.

    The repetition-r stream is seeded by (master_seed, r), so results do not
    depend on execution order or parallelism.
    """
    n_train = int(plan.train_fraction * n_total)
    n_test = n_total - n_train
    if n_train < 2 or n_test < 2:
        raise InputError(
            f"split of {n_total} at fraction {plan.train_fraction} leaves "
            f"{n_train} train / {n_test} test; need >= 2 of each"
        )
    splits = []
    for rep in range(plan.repetitions):
        rng = np.random.default_rng([plan.master_seed, rep])
        perm = rng.permutation(n_total)
        splits.append((perm[:n_train], perm[n_train:]))
    return splits


def cross_validate_lambda(
    baseline_train: DecisionMatrix,
    y_tr: LabelMatrix,
    x2_tr: np.ndarray,
    kernel: KernelSpec,
    grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID,
    n_folds: int = 5,
) -> float:
    """Pick the regularizer weight by k-fold cross-validated adapted accuracy.

    Folds partition the training indices into ``n_folds`` near-equal
    contiguous parts; the baseline itself is not retrained per fold (its
    scores are fixed inputs). Ties prefer the smaller lambda, so the grid must
    be sorted ascending.
    """
    if not grid:
        raise InputError("lambda grid must be non-empty")
    grid = tuple(sorted(grid))
    n = baseline_train.n_samples
    if n < 2 * n_folds:
        raise InputError(f"need at least {2 * n_folds} samples for {n_folds}-fold CV")
    x2 = np.asarray(x2_tr, dtype=float)
    folds = np.array_split(np.arange(n), n_folds)
    y01 = y_tr.to_zero_one()
    means = []
    for lam in grid:
        accs = []
        for fold in folds:
            hold = np.zeros(n, dtype=bool)
            hold[fold] = True
            fit_idx = np.nonzero(~hold)[0]
            model = adapt_classifier(
                baseline_train.select(fit_idx),
                y_tr.select(fit_idx),
                x2[:, fit_idx],
                kernel,
                reg_lambda=lam,
            )
            k_cross = cross_gram(x2[:, fit_idx], x2[:, fold], kernel)
            pred = predict_adapted(model, baseline_train.select(fold), k_cross)
            accs.append(accuracy(harden_decisions(pred), y01.select(fold)))
        means.append(float(np.mean(accs)))
    return grid[int(np.argmax(means))]
