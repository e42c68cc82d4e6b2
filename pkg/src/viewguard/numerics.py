"""Dense matrix primitives: kernel evaluation, regularized solves, simplex projection.

Everything here is a pure function on immutable inputs; columns are samples
throughout (a feature matrix is d x n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InputError, SolverError

KERNEL_FAMILIES = ("linear", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its parameters. ``gamma`` is required iff family is rbf."""

    family: str
    gamma: float | None = None

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise InputError(f"unknown kernel family {self.family!r}")
        if self.family == "rbf":
            if self.gamma is None or not self.gamma > 0:
                raise InputError("rbf kernel requires gamma > 0")
        elif self.gamma is not None:
            raise InputError("linear kernel takes no parameters")

    def to_dict(self) -> dict:
        d = {"family": self.family}
        if self.gamma is not None:
            d["gamma"] = float(self.gamma)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(family=d["family"], gamma=d.get("gamma"))

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        """Parse 'linear' or 'rbf:<gamma>'."""
        parts = text.strip().split(":")
        if parts[0] == "linear" and len(parts) == 1:
            return cls("linear")
        if parts[0] == "rbf" and len(parts) == 2:
            return cls("rbf", gamma=float(parts[1]))
        raise InputError(f"cannot parse kernel spec {text!r}")


@dataclass(frozen=True)
class GramMatrix:
    """Pairwise kernel evaluations between two sample sets.

    ``values`` is n1 x n2 where n1 indexes ``row_source`` samples and n2
    indexes ``col_source`` samples.
    """

    values: np.ndarray
    row_source: str
    col_source: str
    spec: KernelSpec

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def validate(self, psd_tol: float = 1e-8, sym_tol: float = 1e-12) -> None:
        """Check the self-Gram invariants; raises InputError on violation.

        Only meaningful for a square Gram built from one sample set.
        """
        k = self.values
        if k.shape[0] != k.shape[1]:
            raise InputError("validate() applies to square self-Gram matrices")
        if np.max(np.abs(k - k.T)) > sym_tol:
            raise InputError("Gram matrix is not symmetric")
        if np.linalg.eigvalsh(k).min() < -psd_tol:
            raise InputError("Gram matrix is not positive semidefinite")
        if self.spec.family == "rbf" and np.max(np.abs(np.diag(k) - 1.0)) > 0:
            raise InputError("rbf self-Gram must have unit diagonal")


def _check_features(x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] < 1:
        raise InputError(f"{name} must be a d x n matrix with n >= 1")
    if not np.isfinite(x).all():
        raise InputError(f"{name} contains non-finite entries")
    return x


def _kernel_values(xa: np.ndarray, xb: np.ndarray, spec: KernelSpec) -> np.ndarray:
    if spec.family == "linear":
        return xa.T @ xb
    # rbf: squared distances via the inner-product expansion, clipped at 0
    sq = (
        np.sum(xa * xa, axis=0)[:, None]
        + np.sum(xb * xb, axis=0)[None, :]
        - 2.0 * (xa.T @ xb)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-spec.gamma * sq)


def gram_matrix(x: np.ndarray, spec: KernelSpec, source: str = "") -> GramMatrix:
    """n x n self-Gram of the columns of ``x`` (d x n)."""
    x = _check_features(x, "X")
    k = _kernel_values(x, x, spec)
    k = 0.5 * (k + k.T)  # kill BLAS round-off asymmetry
    if spec.family == "rbf":
        np.fill_diagonal(k, 1.0)
    return GramMatrix(values=k, row_source=source, col_source=source, spec=spec)


def cross_gram(
    xa: np.ndarray,
    xb: np.ndarray,
    spec: KernelSpec,
    row_source: str = "",
    col_source: str = "",
) -> GramMatrix:
    """n1 x n2 Gram between the columns of ``xa`` (d x n1) and ``xb`` (d x n2)."""
    xa = _check_features(xa, "X_a")
    xb = _check_features(xb, "X_b")
    if xa.shape[0] != xb.shape[0]:
        raise InputError(
            f"feature dimension mismatch: {xa.shape[0]} vs {xb.shape[0]}"
        )
    if xa is xb or (xa.shape == xb.shape and np.array_equal(xa, xb)):
        return GramMatrix(
            values=gram_matrix(xa, spec).values,
            row_source=row_source,
            col_source=col_source,
            spec=spec,
        )
    return GramMatrix(
        values=_kernel_values(xa, xb, spec),
        row_source=row_source,
        col_source=col_source,
        spec=spec,
    )


def regularized_solve(a: np.ndarray, reg: float, b: np.ndarray) -> np.ndarray:
    """Solve (A + reg*I) X = B for X.

    Raises SolverError (with a condition estimate) if the shifted system is
    numerically singular or the residual exceeds 1e-8 * (1 + ||B||_F).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not reg > 0:
        raise InputError("reg must be positive")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError("A must be square")
    if b.shape[0] != a.shape[0]:
        raise InputError("B row count must match A")
    shifted = a + reg * np.eye(a.shape[0])
    try:
        x = np.linalg.solve(shifted, b)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            f"singular system despite regularization {reg:g} "
            f"(cond ~ {np.linalg.cond(shifted):.3e})"
        ) from exc
    residual = np.linalg.norm(shifted @ x - b)
    bound = 1e-8 * (1.0 + np.linalg.norm(b))
    if not residual <= bound:
        raise SolverError(
            f"solve residual {residual:.3e} exceeds {bound:.3e} "
            f"(cond ~ {np.linalg.cond(shifted):.3e})"
        )
    return x


def _unit_sum_tol(size: int) -> float:
    return 32.0 * size * np.finfo(float).eps


def _sort_threshold(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u * idx > css)[0][-1] + 1
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def simplex_projection(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``v`` onto the probability simplex.

    Sort-and-threshold method, O(c log c). Feasible inputs (within a few ulp
    of unit sum) are returned unchanged and badly scaled inputs get a
    refinement pass, so projecting twice is bitwise identical to projecting
    once.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise InputError("v must be a vector of length >= 1")
    tol = _unit_sum_tol(v.size)
    if v.min() >= 0.0 and abs(v.sum() - 1.0) <= tol:
        return v.copy()
    w = _sort_threshold(v)
    # large-magnitude inputs cancel against the threshold; a second pass on
    # the now unit-scale vector restores the sum to within a few ulp
    if abs(w.sum() - 1.0) > tol:
        w = _sort_threshold(w)
    return w


def project_columns_to_simplex(m: np.ndarray) -> np.ndarray:
    """Project every column of a c x t matrix onto the probability simplex.

    Vectorized variant used by the integration solver's fallback path; it
    skips the exact-sum fix-up of :func:`simplex_projection` (columns sum to 1
    within a few ulp).
    """
    m = np.asarray(m, dtype=float)
    c = m.shape[0]
    u = -np.sort(-m, axis=0)
    css = np.cumsum(u, axis=0) - 1.0
    idx = np.arange(1, c + 1)[:, None]
    rho = np.count_nonzero(u * idx > css, axis=0)
    theta = css[rho - 1, np.arange(m.shape[1])] / rho
    return np.maximum(m - theta[None, :], 0.0)
