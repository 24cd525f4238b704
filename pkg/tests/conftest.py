"""Helpers shared by the test modules: small code generators and an
independent textbook sum-product decoder used as a regression oracle."""

import numpy as np


def random_ldpc(n, m, dv, seed):
    """Column-regular parity check matrix with distinct rows per column."""
    rng = np.random.default_rng(seed)
    while True:
        h = np.zeros((m, n), dtype=np.uint8)
        for c in range(n):
            h[rng.choice(m, dv, replace=False), c] = 1
        if (h.sum(axis=1) > 0).all():
            return h


def textbook_sum_product(h, llr, max_iter, clip=40.0):
    """Plain flooding sum-product decoder straight from the update rules.

    Deliberately written as dense per-edge loops, independent of the
    package's vectorized implementation.
    """
    m, n = h.shape
    checks = [np.nonzero(h[j])[0] for j in range(m)]
    vars_ = [np.nonzero(h[:, i])[0] for i in range(n)]
    q = np.zeros((m, n))
    r = np.zeros((m, n))
    llr = np.clip(llr, -clip, clip)
    for j in range(m):
        q[j, checks[j]] = llr[checks[j]]
    word = (llr < 0).astype(np.uint8)
    for it in range(1, max_iter + 1):
        for j in range(m):
            t = np.tanh(q[j, checks[j]] / 2.0)
            for a, i in enumerate(checks[j]):
                prod = np.prod(np.delete(t, a))
                r[j, i] = np.clip(
                    2.0 * np.arctanh(np.clip(prod, -1 + 1e-16, 1 - 1e-16)),
                    -clip,
                    clip,
                )
        app = llr + np.array([r[vars_[i], i].sum() for i in range(n)])
        for i in range(n):
            for j in vars_[i]:
                q[j, i] = np.clip(app[i] - r[j, i], -clip, clip)
        word = (app < 0).astype(np.uint8)
        if not (h @ word % 2).any():
            return word, it, True
    return word, max_iter, False
