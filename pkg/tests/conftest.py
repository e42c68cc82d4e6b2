"""Shared generators for the test suite."""

import numpy as np
import pytest

from viewguard import DecisionMatrix, LabelMatrix


def random_label_matrix(rng, c, t, encoding="zero_one"):
    ids = rng.integers(0, c, t)
    return LabelMatrix.from_class_ids(ids, c, encoding)


def flip_columns(rng, ids, n_flips, c):
    """Reassign n_flips random columns to a different class."""
    out = ids.copy()
    pos = rng.choice(ids.size, size=min(n_flips, ids.size), replace=False)
    for p in pos:
        out[p] = (out[p] + 1 + rng.integers(0, c - 1)) % c
    return out


def injected_truth_instance(rng, c=3, t=10, m=4, hat_flips=(2, 4), bar_flips=(0, 1)):
    """Baselines are noisy copies of the truth, adapted anchors are better,
    and the truth itself is injected among the anchors."""
    truth_ids = rng.integers(0, c, t)
    truth = LabelMatrix.from_class_ids(truth_ids, c, "zero_one")
    hats = []
    for _ in range(m):
        k = rng.integers(hat_flips[0], hat_flips[1] + 1)
        hats.append(
            LabelMatrix.from_class_ids(flip_columns(rng, truth_ids, k, c), c, "zero_one")
        )
    bars = []
    for _ in range(m - 1):
        k = rng.integers(bar_flips[0], bar_flips[1] + 1)
        bars.append(
            LabelMatrix.from_class_ids(flip_columns(rng, truth_ids, k, c), c, "zero_one")
        )
    bars.insert(int(rng.integers(0, m)), truth)
    return hats, bars, truth


def random_adaptation_instance(rng, n=40, c=3, d2=6, noise=0.4):
    """Labels, plausibly informative baseline scores, and a view-2 matrix."""
    ids = rng.integers(0, c, n)
    y = LabelMatrix.from_class_ids(ids, c, "pm1")
    scores = y.values + noise * rng.standard_normal((c, n))
    x2 = rng.standard_normal((d2, n))
    x2[: min(c, d2), :] += 1.5 * y.to_zero_one().values[: min(c, d2), :]
    f = DecisionMatrix(scores, "synthetic")
    return f, y, x2


def simplex_grid(c, resolution_steps):
    """Integer compositions of resolution_steps into c parts, scaled to sum 1."""
    def compositions(parts, total):
        if parts == 1:
            return np.array([[total]])
        if parts == 2:
            i = np.arange(total + 1)
            return np.stack([i, total - i], axis=1)
        blocks = []
        for i in range(total + 1):
            sub = compositions(parts - 1, total - i)
            blocks.append(np.hstack([np.full((sub.shape[0], 1), i), sub]))
        return np.vstack(blocks)

    return compositions(c, resolution_steps) / resolution_steps


def grid_phi_minimum(anchors, q, resolution=0.005):
    """Brute-force minimum of the integration objective over a grid on the
    product of column simplices. Supports c == 2 (any small t) or t == 1."""
    anchors = np.asarray(anchors, dtype=float)
    m, c, t = anchors.shape
    anorm2 = np.einsum("kct,kct->k", anchors, anchors)
    cvec = anorm2 - np.asarray(q, dtype=float)
    steps = int(round(1.0 / resolution))
    if c == 2:
        p = np.arange(steps + 1) / steps  # class-0 mass, one axis per column
        mesh = np.meshgrid(*([p] * t), indexing="ij")
        sq = sum(g**2 + (1.0 - g) ** 2 for g in mesh)
        best = None
        for k in range(m):
            lin = sum(
                anchors[k, 0, j] * mesh[j] + anchors[k, 1, j] * (1.0 - mesh[j])
                for j in range(t)
            )
            sc = cvec[k] - 2.0 * lin
            best = sc if best is None else np.maximum(best, sc)
        phi = sq + best
        idx = np.unravel_index(np.argmin(phi), phi.shape)
        y = np.array(
            [[mesh[j][idx] for j in range(t)], [1.0 - mesh[j][idx] for j in range(t)]]
        )
        return float(phi[idx]), y
    if t == 1:
        pts = simplex_grid(c, steps)  # (P, c)
        sq = np.sum(pts**2, axis=1)
        scores = cvec[None, :] - 2.0 * pts @ anchors[:, :, 0].T
        phi = sq + scores.max(axis=1)
        i = int(np.argmin(phi))
        return float(phi[i]), pts[i][:, None]
    raise ValueError("grid oracle needs c == 2 or t == 1")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
