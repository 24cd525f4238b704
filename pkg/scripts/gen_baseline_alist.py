#!/usr/bin/env python3
"""Generate the committed LDPC baseline parity check matrix.

Column-regular degree-5 code, N=1024, M=384 (rate 5/8), written to
data/ldpc_n1024_m384_dv5.alist. The seed is fixed so the file is
reproducible; rerunning this script must not change it.
"""

import pathlib
import sys

import numpy as np

from gldpc_pc.gf2 import BitMatrix, rank, save_alist

N, M, DV, SEED = 1024, 384, 5, 12345


def make_ldpc(n, m, dv, seed):
    rng = np.random.default_rng(seed)
    edges = n * dv
    base = edges // m
    extra = edges - base * m
    deg = np.full(m, base, dtype=np.int64)
    deg[rng.permutation(m)[:extra]] += 1
    slots = np.repeat(np.arange(m), deg)
    rng.shuffle(slots)
    cols = slots.reshape(n, dv)
    # swap-repair until every column touches dv distinct rows
    for _ in range(200000):
        bad = [c for c in range(n) if len(set(cols[c].tolist())) != dv]
        if not bad:
            break
        for c in bad:
            j = int(rng.integers(0, n))
            k1 = int(rng.integers(0, dv))
            k2 = int(rng.integers(0, dv))
            cols[c, k1], cols[j, k2] = cols[j, k2], cols[c, k1]
    else:
        raise RuntimeError("column repair did not converge")
    h = np.zeros((m, n), dtype=np.uint8)
    for c in range(n):
        h[cols[c], c] = 1
    assert (h.sum(axis=0) == dv).all()
    assert (h.sum(axis=1) > 0).all()
    return h


def main() -> int:
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "ldpc_n1024_m384_dv5.alist"
    out.parent.mkdir(exist_ok=True)
    h = BitMatrix.from_array(make_ldpc(N, M, DV, SEED))
    r = rank(h)
    save_alist(h, out)
    print(f"wrote {out}: {M}x{N}, rank {r}, K {N - r}, rate {(N - r) / N:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
