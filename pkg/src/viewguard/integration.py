"""Integration stage: merge adapted predictions with a worst-case margin.

Given hardened test predictions of the original baselines (hat) and of the
adapted classifiers (bar), find a column-stochastic Y maximizing the margin
epsilon subject to ||Y - bar_k||_F^2 <= q_k - epsilon for every k, where
q_k = min_j ||hat_j - bar_k||_F^2 is the surrogate radius. Equivalently,
minimize the strongly convex

    phi(Y) = ||Y||_F^2 + max_k (c_k - 2 <bar_k, Y>),   c_k = ||bar_k||_F^2 - q_k,

over the product of column simplices; epsilon = -phi(Y*). The solver is a
projected subgradient loop with Polyak steps whose target is an exact dual
lower bound: because the anchors are 0/1 label matrices, any convex
combination of them is column-stochastic, so the dual reduces to maximizing
the concave quadratic w.c - w^T G w over the m-simplex (G the anchor Gram),
solved by support enumeration. The dual also supplies a warm start and a
certified optimality gap.

The inner loop has a compiled kernel (``_qclp``) and a numpy fallback chosen
at import; set VIEWGUARD_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

import numpy as np

from . import _qclp_fallback
from .baselines import ZERO_ONE, LabelMatrix
from .exceptions import InputError
from .numerics import project_columns_to_simplex, simplex_projection

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 10000
_ENUM_LIMIT = 16  # supports enumerated exactly up to this many anchors


def _load_ext():
    if os.environ.get("VIEWGUARD_PURE_PYTHON"):
        return None
    try:
        from . import _qclp

        return _qclp
    except ImportError:
        return None


_EXT = _load_ext()


def solver_backend() -> str:
    """Name of the kernel the solver will use by default."""
    return "cython" if _EXT is not None else "numpy"


def _check_label_list(mats, name: str, shape=None):
    if len(mats) < 1:
        raise InputError(f"{name} must contain at least one label matrix")
    for lm in mats:
        if not isinstance(lm, LabelMatrix) or lm.encoding != ZERO_ONE:
            raise InputError(f"{name} entries must be zero_one LabelMatrix")
        if shape is not None and lm.values.shape != shape:
            raise InputError(f"{name} entries must all be {shape}")
        shape = lm.values.shape
    return shape


def compute_surrogate_radii(
    base_predictions: list[LabelMatrix], adapted_predictions: list[LabelMatrix]
) -> np.ndarray:
    """q_k = min_j ||hat_j - bar_k||_F^2 (an even integer for 0/1 matrices)."""
    shape = _check_label_list(base_predictions, "base_predictions")
    _check_label_list(adapted_predictions, "adapted_predictions", shape)
    q = np.empty(len(adapted_predictions))
    for k, bar in enumerate(adapted_predictions):
        q[k] = min(
            float(np.sum((hat.values - bar.values) ** 2)) for hat in base_predictions
        )
    return q


def vectorize_labels(y: np.ndarray) -> np.ndarray:
    """Stack the columns of a c x t matrix into a length c*t vector."""
    y = np.asarray(y, dtype=float)
    return y.reshape(-1, order="F")


def devectorize_labels(v: np.ndarray, c: int, t: int) -> np.ndarray:
    """Exact inverse of :func:`vectorize_labels`."""
    v = np.asarray(v, dtype=float)
    if v.size != c * t:
        raise InputError(f"vector of length {v.size} cannot reshape to {c}x{t}")
    return v.reshape((c, t), order="F")


@dataclass(frozen=True)
class IntegrationProblem:
    """One integration instance: prediction sets plus surrogate radii."""

    base_predictions: tuple[LabelMatrix, ...]
    adapted_predictions: tuple[LabelMatrix, ...]
    q: np.ndarray

    def __post_init__(self):
        shape = _check_label_list(self.base_predictions, "base_predictions")
        _check_label_list(self.adapted_predictions, "adapted_predictions", shape)
        q = np.asarray(self.q, dtype=float)
        object.__setattr__(self, "q", q)
        if q.shape != (len(self.adapted_predictions),):
            raise InputError("q must have one radius per adapted prediction")
        if np.any(q < 0):
            raise InputError("surrogate radii must be nonnegative")

    @property
    def n_classes(self) -> int:
        return self.adapted_predictions[0].values.shape[0]

    @property
    def n_test(self) -> int:
        return self.adapted_predictions[0].values.shape[1]

    @property
    def n_candidates(self) -> int:
        return len(self.adapted_predictions)

    @classmethod
    def from_predictions(cls, base_predictions, adapted_predictions) -> "IntegrationProblem":
        return cls(
            base_predictions=tuple(base_predictions),
            adapted_predictions=tuple(adapted_predictions),
            q=compute_surrogate_radii(list(base_predictions), list(adapted_predictions)),
        )


@dataclass(frozen=True)
class IntegrationSolution:
    """Soft/hard integrated labels with the achieved security margin."""

    y_soft: np.ndarray  # (c, t), column-stochastic
    y_hard: LabelMatrix
    epsilon: float
    feasible: bool  # epsilon >= 0
    iterations: int
    gap: float  # certified optimality gap of the solver objective
    converged: bool
    backend: str

    def to_json_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "feasible": self.feasible,
            "iterations": self.iterations,
            "gap": self.gap,
            "converged": self.converged,
            "backend": self.backend,
            "y_soft": self.y_soft.tolist(),
            "y_hard": self.y_hard.values.tolist(),
        }


def harden_soft_labels(y_soft: np.ndarray) -> LabelMatrix:
    """Per-column argmax of a column-stochastic matrix; ties to the smallest class."""
    y = np.asarray(y_soft, dtype=float)
    if y.ndim != 2:
        raise InputError("soft labels must be c x t")
    if np.any(y < -1e-9) or np.max(np.abs(y.sum(axis=0) - 1.0)) > 1e-6:
        raise InputError("soft labels must be column-stochastic")
    return LabelMatrix.from_class_ids(np.argmax(y, axis=0), y.shape[0], ZERO_ONE)


def _dual_by_enumeration(gram: np.ndarray, cvec: np.ndarray) -> tuple[np.ndarray, float]:
    """Maximize w.c - w^T G w over the simplex exactly (support enumeration).

    Every candidate evaluated is feasible, so the returned value is always a
    valid lower bound on phi*; the optimal support's KKT point is among the
    candidates, which makes the bound exact.
    """
    m = cvec.size
    best_val = -np.inf
    best_w = np.full(m, 1.0 / m)
    for size in range(1, m + 1):
        for support in itertools.combinations(range(m), size):
            s = list(support)
            if size == 1:
                w_s = np.array([1.0])
            else:
                kkt = np.zeros((size + 1, size + 1))
                kkt[:size, :size] = 2.0 * gram[np.ix_(s, s)]
                kkt[:size, size] = 1.0
                kkt[size, :size] = 1.0
                rhs = np.append(cvec[s], 1.0)
                try:
                    sol = np.linalg.solve(kkt, rhs)
                except np.linalg.LinAlgError:
                    continue
                w_s = sol[:size]
                if w_s.min() < -1e-9:
                    continue
            w = np.zeros(m)
            w[s] = np.maximum(w_s, 0.0)
            total = w.sum()
            if total <= 0:
                continue
            w /= total
            val = float(w @ cvec - w @ gram @ w)
            if val > best_val:
                best_val = val
                best_w = w
    return best_w, best_val


def _dual_by_ascent(
    gram: np.ndarray, cvec: np.ndarray, iters: int = 2000
) -> tuple[np.ndarray, float]:
    """Projected gradient ascent on the dual; used when m is too large to enumerate."""
    m = cvec.size
    lips = 2.0 * max(float(np.linalg.eigvalsh(gram).max()), 1e-12)
    w = np.full(m, 1.0 / m)
    best_w, best_val = w.copy(), -np.inf
    for _ in range(iters):
        val = float(w @ cvec - w @ gram @ w)
        if val > best_val:
            best_val, best_w = val, w.copy()
        grad = cvec - 2.0 * (gram @ w)
        w = simplex_projection(w + grad / lips)
    return best_w, best_val


def _phi(anchors: np.ndarray, cvec: np.ndarray, y: np.ndarray) -> float:
    scores = cvec - 2.0 * np.einsum("kct,ct->k", anchors, y)
    return float(np.sum(y * y) + scores.max())


def solve_secure_program(
    problem: IntegrationProblem,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    start: np.ndarray | None = None,
    backend: str | None = None,
) -> IntegrationSolution:
    """Solve the relaxed secure-integration program.

    Returns the minimax point even when no nonnegative margin exists
    (feasible=False, epsilon < 0): it is still the best-regret integration.
    ``start`` overrides the default warm start (the dual candidate);
    ``backend`` forces "cython" or "numpy".
    """
    anchors = np.stack([lm.values for lm in problem.adapted_predictions])
    m, c, t = anchors.shape
    anorm2 = np.einsum("kct,kct->k", anchors, anchors)
    cvec = anorm2 - problem.q
    flat = anchors.reshape(m, c * t)
    gram = flat @ flat.T

    if m <= _ENUM_LIMIT:
        w_star, g_star = _dual_by_enumeration(gram, cvec)
    else:
        w_star, g_star = _dual_by_ascent(gram, cvec, iters=max(200, max_iters // 5))
    y_dual = project_columns_to_simplex(np.einsum("k,kct->ct", w_star, anchors))
    phi_dual = _phi(anchors, cvec, y_dual)

    if start is not None:
        y0 = np.asarray(start, dtype=float)
        if y0.shape != (c, t):
            raise InputError(f"start must be {c}x{t}")
    else:
        y0 = y_dual

    ext = _EXT
    if backend == "numpy":
        ext = None
    elif backend == "cython":
        if _EXT is None:
            raise InputError("compiled kernel not available; build the extension")
    elif backend is not None:
        raise InputError(f"unknown backend {backend!r}")

    if ext is not None:
        anchors_f = np.ascontiguousarray(anchors.transpose(0, 2, 1).reshape(m, c * t))
        y_loop_f, phi_loop, iters = ext.subgradient_loop(
            anchors_f,
            np.ascontiguousarray(cvec),
            np.ascontiguousarray(anorm2),
            g_star,
            np.ascontiguousarray(y0.T.ravel()),
            tol,
            max_iters,
            c,
            t,
        )
        y_loop = y_loop_f.reshape(t, c).T
        used = "cython"
    else:
        y_loop, phi_loop, iters = _qclp_fallback.subgradient_loop(
            anchors, cvec, anorm2, g_star, y0, tol, max_iters
        )
        used = "numpy"

    # keep the better of the loop iterate and the dual candidate
    phi_loop = _phi(anchors, cvec, y_loop)
    if phi_dual <= phi_loop:
        y_final, phi_final = y_dual, phi_dual
    else:
        y_final, phi_final = y_loop, phi_loop

    gap = max(phi_final - g_star, 0.0)
    epsilon = -phi_final
    return IntegrationSolution(
        y_soft=y_final,
        y_hard=harden_soft_labels(y_final),
        epsilon=epsilon,
        feasible=bool(epsilon >= 0.0),
        iterations=int(iters),
        gap=gap,
        converged=bool(gap <= tol),
        backend=used,
    )


def integrate(
    base_predictions: list[LabelMatrix],
    adapted_predictions: list[LabelMatrix],
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    backend: str | None = None,
) -> IntegrationSolution:
    """Radii, minimax solve, hardening: the full integration pipeline."""
    problem = IntegrationProblem.from_predictions(base_predictions, adapted_predictions)
    return solve_secure_program(problem, tol=tol, max_iters=max_iters, backend=backend)
