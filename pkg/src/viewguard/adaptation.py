"""Adaptation stage: upgrade a fixed view-1 classifier with view-2 features.

Each baseline's decision values F (c x n) are mixed with a kernel regressor on
the new view,

    g(x) = lambda1 * F(x) + lambda2 * (W^T Phi(x2) + b),

by minimizing a capped multi-class hinge objective: nonnegative per-class
slacks absorb margins beyond the target, the per-sample loss min(sqrt(xi), 1)
is truncated at 1 so badly mislabeled points cannot dominate, and the cap is
handled by iteratively reweighted least squares (weights theta). W is never
materialized; the dual operator T acts through Gram matrices, so only kernel
evaluations of view-2 data are needed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .baselines import PM1, DecisionMatrix, LabelMatrix
from .exceptions import InputError
from .numerics import GramMatrix, KernelSpec, gram_matrix, regularized_solve

THETA_MAX = 1e6
DEFAULT_TOL = 1e-5
DEFAULT_MAX_ITERS = 50
NO_ACTIVE_POINTS = "no active points: every sample's loss is capped"


@dataclass
class AStageState:
    """Mutable iterate of the adaptation loop."""

    lambda1: float
    lambda2: float
    theta: np.ndarray  # (n,) reweighting weights, >= 0
    slack: np.ndarray  # (c, n) nonnegative margins M
    reg_lambda: float
    z: np.ndarray | None = None  # (c, n) regression targets
    xi: np.ndarray | None = None  # (n,) squared residuals

    def centering(self) -> np.ndarray:
        """H = Theta - Theta e e^T Theta / (e^T Theta e); symmetric, H e = 0."""
        s = self.theta.sum()
        if s <= 0:
            raise InputError(NO_ACTIVE_POINTS)
        return np.diag(self.theta) - np.outer(self.theta, self.theta) / s

    @classmethod
    def initial(cls, n: int, c: int, reg_lambda: float) -> "AStageState":
        return cls(
            lambda1=0.5,
            lambda2=0.5,
            theta=np.ones(n),
            slack=np.zeros((c, n)),
            reg_lambda=reg_lambda,
        )


def compute_residual_xi(
    lambda1: float,
    lambda2: float,
    baseline_scores: np.ndarray,
    y_pm1: np.ndarray,
    slack: np.ndarray,
    fitted: np.ndarray,
) -> np.ndarray:
    """xi_i = || lambda1*f_i + lambda2*fitted_i - y_i - y_i o m_i ||^2."""
    r = lambda1 * baseline_scores + lambda2 * fitted - y_pm1 - y_pm1 * slack
    return np.einsum("ci,ci->i", r, r)


def update_theta(xi: np.ndarray, theta_max: float = THETA_MAX) -> np.ndarray:
    """Reweighting rule: 0.5/sqrt(xi) while sqrt(xi) <= 1, else 0.

    theta is capped at ``theta_max`` (xi floor 2.5e-13) so near-perfectly
    fitted points keep the weighted system finite.
    """
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise InputError("xi must be nonnegative")
    root = np.sqrt(xi)
    with np.errstate(divide="ignore"):
        theta = np.where(root <= 1.0, 0.5 / root, 0.0)
    return np.minimum(theta, theta_max)


def update_slack(
    lambda1: float,
    lambda2: float,
    baseline_scores: np.ndarray,
    y_pm1: np.ndarray,
    fitted: np.ndarray,
) -> np.ndarray:
    """Closed-form nonnegative slack: clamp(y o g - 1, 0) columnwise."""
    arg = lambda1 * (y_pm1 * baseline_scores) + lambda2 * (y_pm1 * fitted) - 1.0
    return np.maximum(arg, 0.0)


def update_dual_operator_and_bias(
    z: np.ndarray,
    theta: np.ndarray,
    gram: np.ndarray,
    lambda2: float,
    reg_lambda: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Jointly optimal dual operator T (c x n) and bias b (c,).

    T = lambda2 * Z H (lambda2^2 K H + reg I)^-1, computed through the
    transposed system (lambda2^2 H K + reg I) T^T = lambda2 (Z H)^T so a
    single LU solve suffices. H is never materialized: products with
    H = diag(theta) - theta theta^T / sum(theta) use its diagonal-plus-rank-1
    structure.
    """
    theta = np.asarray(theta, dtype=float)
    s = theta.sum()
    if s <= 0:
        raise InputError(NO_ACTIVE_POINTS)
    if not reg_lambda > 0:
        raise InputError("reg_lambda must be positive")
    c, n = z.shape
    if lambda2 == 0.0:
        return np.zeros((c, n)), np.zeros(c)
    zh = z * theta[None, :] - np.outer(z @ theta, theta) / s
    ktheta = gram @ theta
    hk = theta[:, None] * gram - np.outer(theta, ktheta) / s
    t_op = lambda2 * regularized_solve(lambda2**2 * hk, reg_lambda, zh.T).T
    b = (z @ theta) / (lambda2 * s) - (t_op @ ktheta) / s
    return t_op, b


def update_mixing(
    baseline_scores: np.ndarray,
    fitted: np.ndarray,
    y_pm1: np.ndarray,
    slack: np.ndarray,
    theta: np.ndarray,
) -> tuple[float, float] | None:
    """Weighted least-squares mixing weights for g = l1*a + l2*b.

    Solves the 2x2 normal equations of sum_i theta_i ||l1 a_i + l2 b_i - c_i||^2
    with a_i the baseline scores, b_i the view-2 fitted values and
    c_i = y_i + y_i o m_i. Returns None (keep previous weights) when the
    system is degenerate, i.e. the weighted Cauchy-Schwarz determinant
    vanishes relative to its scale.
    """
    a = baseline_scores
    b = fitted
    target = y_pm1 + y_pm1 * slack
    saa = float(theta @ np.einsum("ci,ci->i", a, a))
    sbb = float(theta @ np.einsum("ci,ci->i", b, b))
    sab = float(theta @ np.einsum("ci,ci->i", a, b))
    sac = float(theta @ np.einsum("ci,ci->i", a, target))
    sbc = float(theta @ np.einsum("ci,ci->i", b, target))
    det = saa * sbb - sab * sab
    if abs(det) <= 1e-12 * max(saa * sbb, 1e-300):
        return None
    lambda1 = (sac * sbb - sbc * sab) / det
    lambda2 = (sbc * saa - sac * sab) / det
    return lambda1, lambda2


def capped_objective(xi: np.ndarray, w_norm_sq: float, reg_lambda: float) -> float:
    """reg * ||W||_F^2 + sum_i min(sqrt(xi_i), 1)."""
    return float(reg_lambda * w_norm_sq + np.minimum(np.sqrt(xi), 1.0).sum())


def objective_value(
    state: "AStageState",
    baseline_scores: np.ndarray,
    y_pm1: np.ndarray,
    fitted: np.ndarray,
    w_norm_sq: float,
) -> float:
    """Full adaptation objective at the given iterate.

    The implicit-regressor norm is passed in as ``w_norm_sq``; with the dual
    operator it is tr(T K T^T), identical to ||W||_F^2 in feature space.
    """
    xi = compute_residual_xi(
        state.lambda1, state.lambda2, baseline_scores, y_pm1, state.slack, fitted
    )
    return capped_objective(xi, w_norm_sq, state.reg_lambda)


def matrix_content_hash(arr: np.ndarray) -> str:
    """Stable sha256 of a float matrix (shape + row-major float64 bytes)."""
    a = np.ascontiguousarray(np.asarray(arr, dtype=np.float64))
    h = hashlib.sha256()
    h.update(str(a.shape).encode())
    h.update(a.tobytes())
    return h.hexdigest()


@dataclass
class AdaptedModel:
    """A trained adapted classifier.

    Predictions on new view pairs are lambda1*F + lambda2*(T K_tr,new + b);
    the dual operator T carries W implicitly, so the model must be paired with
    the view-2 training matrix it was fit on (checked by content hash when
    deserializing).
    """

    dual_operator: np.ndarray  # T, (c, n)
    bias: np.ndarray  # (c,)
    lambda1: float
    lambda2: float
    kernel: KernelSpec
    x2_train: np.ndarray  # (d2, n)
    baseline_id: str
    objective_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    warning: str | None = None
    fitted_train: np.ndarray | None = None  # final iterate's W^T Phi(X_tr) + b

    @property
    def n_train(self) -> int:
        return self.dual_operator.shape[1]

    def predict(self, baseline_scores: np.ndarray, x2: np.ndarray) -> DecisionMatrix:
        """Convenience wrapper computing the cross-Gram internally."""
        from .numerics import cross_gram

        k = cross_gram(self.x2_train, np.asarray(x2, dtype=float), self.kernel)
        f = DecisionMatrix(baseline_scores, self.baseline_id)
        return predict_adapted(self, f, k)

    def to_json_dict(self) -> dict:
        return {
            "kernel": self.kernel.to_dict(),
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "bias": self.bias.tolist(),
            "dual_operator": self.dual_operator.ravel().tolist(),  # row-major
            "shape": list(self.dual_operator.shape),
            "baseline_id": self.baseline_id,
            "x2_train_hash": matrix_content_hash(self.x2_train),
        }

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)

    @classmethod
    def from_json_dict(cls, d: dict, x2_train: np.ndarray) -> "AdaptedModel":
        x2_train = np.asarray(x2_train, dtype=float)
        if matrix_content_hash(x2_train) != d["x2_train_hash"]:
            raise InputError(
                "view-2 training matrix does not match the one this model was fit on"
            )
        shape = tuple(d["shape"])
        return cls(
            dual_operator=np.array(d["dual_operator"]).reshape(shape),
            bias=np.array(d["bias"]),
            lambda1=float(d["lambda1"]),
            lambda2=float(d["lambda2"]),
            kernel=KernelSpec.from_dict(d["kernel"]),
            x2_train=x2_train,
            baseline_id=d["baseline_id"],
        )

    @classmethod
    def load(cls, path: str, x2_train: np.ndarray) -> "AdaptedModel":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh), x2_train)


def adapt_classifier(
    baseline_train: DecisionMatrix,
    y_tr: LabelMatrix,
    x2_tr: np.ndarray,
    kernel: KernelSpec,
    reg_lambda: float,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> AdaptedModel:
    """Run the full adaptation loop (alternating exact block updates).

    Initialization: lambda1 = lambda2 = 1/2, unit weights, zero slack. Each
    iteration updates (T, b), the slacks, the mixing weights and the
    reweighting in turn; the recorded objective sequence is non-increasing.
    Stops when the relative objective decrease drops below ``tol`` or after
    ``max_iters`` iterations.
    """
    if y_tr.encoding != PM1:
        raise InputError("adaptation expects pm1 training labels")
    f = baseline_train.values
    y = y_tr.values
    x2 = np.asarray(x2_tr, dtype=float)
    c, n = y.shape
    if f.shape != y.shape:
        raise InputError("baseline scores and labels disagree in shape")
    if x2.ndim != 2 or x2.shape[1] != n:
        raise InputError("view-2 training matrix must be d2 x n")
    if n < 2:
        raise InputError("need at least 2 training samples")

    k = gram_matrix(x2, kernel, source="train").values
    state = AStageState.initial(n, c, reg_lambda)
    t_op = np.zeros((c, n))
    b = np.zeros(c)
    fitted = np.zeros((c, n))
    w_norm_sq = 0.0
    trace: list[float] = []
    warning = None
    prev_obj = None
    iterations = 0

    for it in range(1, max_iters + 1):
        if state.theta.sum() <= 0:
            warning = NO_ACTIVE_POINTS
            break
        iterations = it
        state.z = y + y * state.slack - state.lambda1 * f
        t_op, b = update_dual_operator_and_bias(
            state.z, state.theta, k, state.lambda2, reg_lambda
        )
        fitted_nob = t_op @ k
        fitted = fitted_nob + b[:, None]
        w_norm_sq = float(np.sum(fitted_nob * t_op))  # tr(T K T^T)
        state.slack = update_slack(state.lambda1, state.lambda2, f, y, fitted)
        mix = update_mixing(f, fitted, y, state.slack, state.theta)
        if mix is not None:
            state.lambda1, state.lambda2 = mix
        state.xi = compute_residual_xi(
            state.lambda1, state.lambda2, f, y, state.slack, fitted
        )
        state.theta = update_theta(state.xi)
        obj = capped_objective(state.xi, w_norm_sq, reg_lambda)
        trace.append(obj)
        if prev_obj is not None and prev_obj - obj < tol * max(abs(prev_obj), 1e-12):
            break
        prev_obj = obj

    return AdaptedModel(
        dual_operator=t_op,
        bias=b,
        lambda1=state.lambda1,
        lambda2=state.lambda2,
        kernel=kernel,
        x2_train=x2,
        baseline_id=baseline_train.classifier_id,
        objective_trace=trace,
        iterations=iterations,
        warning=warning,
        fitted_train=fitted,
    )


def predict_adapted(
    model: AdaptedModel,
    baseline_test: DecisionMatrix,
    gram_train_test: GramMatrix | np.ndarray,
) -> DecisionMatrix:
    """g = lambda1 * F_test + lambda2 * (T K_tr,test + b 1^T)."""
    k = (
        gram_train_test.values
        if isinstance(gram_train_test, GramMatrix)
        else np.asarray(gram_train_test, dtype=float)
    )
    if k.shape[0] != model.n_train:
        raise InputError(
            f"cross-Gram has {k.shape[0]} rows, model was trained on {model.n_train}"
        )
    f = baseline_test.values
    if f.shape[1] != k.shape[1]:
        raise InputError("baseline scores and cross-Gram sample counts disagree")
    view2_part = model.dual_operator @ k + model.bias[:, None]
    return DecisionMatrix(
        model.lambda1 * f + model.lambda2 * view2_part,
        classifier_id=f"adapted:{model.baseline_id}",
    )
