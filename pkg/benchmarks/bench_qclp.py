#!/usr/bin/env python3
"""Benchmark the compiled QCLP subgradient kernel against the numpy fallback.

Both kernels run the identical projected-subgradient loop for a fixed number
of iterations from a cold start, so the comparison is per-iteration cost.
Run from the repo root: `python benchmarks/bench_qclp.py`.
"""

import time

import numpy as np

from viewguard import solver_backend
from viewguard import _qclp_fallback
from viewguard.integration import _dual_by_enumeration

try:
    from viewguard import _qclp
except ImportError:
    _qclp = None


def make_instance(rng, m, c, t):
    anchors = np.zeros((m, c, t))
    for k in range(m):
        ids = rng.integers(0, c, t)
        anchors[k, ids, np.arange(t)] = 1.0
    q = rng.integers(0, t, m) * 2.0
    anorm2 = np.einsum("kct,kct->k", anchors, anchors)
    cvec = anorm2 - q
    flat = anchors.reshape(m, c * t)
    _, g_star = _dual_by_enumeration(flat @ flat.T, cvec)
    y0 = np.full((c, t), 1.0 / c)
    return anchors, cvec, anorm2, g_star, y0


def run_numpy(anchors, cvec, anorm2, g_star, y0, iters):
    t0 = time.perf_counter()
    y, phi, done = _qclp_fallback.subgradient_loop(
        anchors, cvec, anorm2, g_star, y0, -1.0, iters
    )
    return time.perf_counter() - t0, phi, done


def run_cython(anchors, cvec, anorm2, g_star, y0, iters):
    m, c, t = anchors.shape
    flat = np.ascontiguousarray(anchors.transpose(0, 2, 1).reshape(m, c * t))
    t0 = time.perf_counter()
    y, phi, done = _qclp.subgradient_loop(
        flat,
        np.ascontiguousarray(cvec),
        np.ascontiguousarray(anorm2),
        g_star,
        np.ascontiguousarray(y0.T.ravel()),
        -1.0,
        iters,
        c,
        t,
    )
    return time.perf_counter() - t0, phi, done


def main():
    print(f"default backend: {solver_backend()}")
    if _qclp is None:
        print("compiled kernel unavailable; benchmarking the fallback only")
    rng = np.random.default_rng(0)
    cases = [
        ("tiny  (m=4,  c=2, t=3)", 4, 2, 3, 20000),
        ("small (m=4,  c=3, t=50)", 4, 3, 50, 5000),
        ("medium(m=6,  c=5, t=500)", 6, 5, 500, 1000),
        ("large (m=6,  c=10, t=1400)", 6, 10, 1400, 300),
    ]
    header = f"{'case':<28}{'iters':>7}{'numpy':>12}{'cython':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, m, c, t, iters in cases:
        anchors, cvec, anorm2, g_star, y0 = make_instance(rng, m, c, t)
        t_np, phi_np, _ = run_numpy(anchors, cvec, anorm2, g_star, y0, iters)
        if _qclp is not None:
            t_cy, phi_cy, _ = run_cython(anchors, cvec, anorm2, g_star, y0, iters)
            if abs(phi_np - phi_cy) > 1e-6 * max(1.0, abs(phi_np)):
                raise SystemExit(
                    f"kernel mismatch on {name}: {phi_np} vs {phi_cy}"
                )
            print(
                f"{name:<28}{iters:>7}{t_np:>11.3f}s{t_cy:>11.3f}s{t_np / t_cy:>8.1f}x"
            )
        else:
            print(f"{name:<28}{iters:>7}{t_np:>11.3f}s{'-':>12}{'-':>9}")


if __name__ == "__main__":
    main()
