"""Pure-numpy fallback for the QCLP subgradient kernel.

Mirrors the compiled loop in ``_qclp.pyx``: projected subgradient on
phi(Y) = ||Y||^2 + max_k (c_k - 2 <A_k, Y>) over the product of column
simplices, with Polyak steps targeting the dual lower bound ``g_star``.
"""

from __future__ import annotations

import numpy as np

from .numerics import project_columns_to_simplex


def subgradient_loop(
    anchors: np.ndarray,  # (m, c, t)
    cvec: np.ndarray,  # (m,)
    anorm2: np.ndarray,  # (m,) squared Frobenius norms of the anchors
    g_star: float,
    y0: np.ndarray,  # (c, t)
    tol: float,
    max_iters: int,
) -> tuple[np.ndarray, float, int]:
    y = np.array(y0, dtype=float)
    y_best = y.copy()
    phi_best = np.inf
    iters = 0
    for it in range(1, max_iters + 1):
        iters = it
        yy = float(np.sum(y * y))
        dots = np.einsum("kct,ct->k", anchors, y)
        scores = cvec - 2.0 * dots
        ks = int(np.argmax(scores))
        phi = yy + scores[ks]
        if phi < phi_best:
            phi_best = phi
            y_best[...] = y
        if phi_best - g_star <= tol:
            break
        grad_norm2 = 4.0 * (yy - 2.0 * dots[ks] + anorm2[ks])
        if grad_norm2 <= 1e-30:
            break
        step = (phi - g_star) / grad_norm2
        y = project_columns_to_simplex((1.0 - 2.0 * step) * y + (2.0 * step) * anchors[ks])
    return y_best, float(phi_best), iters
