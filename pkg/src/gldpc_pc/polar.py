"""Polar code construction, encoding, and list decoding.

The transform is the plain Kronecker power of ``[[1, 0], [1, 1]]`` in
natural bit order (no bit-reversal), which makes it an involution over
GF(2): that is what lets the parity check matrix fall straight out of the
frozen columns. The list decoder keeps an exact log-domain path metric and
a complete ledger of every branch it abandons, so the soft-output stages
can account for the mass of unvisited and invalid codewords.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadLength, FileError, LengthMismatch
from .gf2 import BitMatrix

#: Messages entering mass/metric computations are clipped to this magnitude.
LLR_CLIP = 40.0

PRUNED_VALID = "pruned-valid"
FROZEN_INVALID = "frozen-invalid"


# ---------------------------------------------------------------------------
# Code descriptor and construction


@dataclass(frozen=True)
class PolarCode:
    """Length-``n`` polar code with frozen set ``frozen`` (zero-valued).

    ``construction`` keeps the method and parameters the frozen set came
    from so a code can be serialized and rebuilt bit-for-bit.
    """

    n: int
    frozen: tuple = ()
    construction: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = self.n
        if n < 1 or (n & (n - 1)) != 0:
            raise BadLength(f"code length {n} is not a power of two")
        fr = tuple(sorted(set(int(f) for f in self.frozen)))
        if fr and (fr[0] < 0 or fr[-1] >= n):
            raise BadLength(f"frozen indices out of range for n={n}")
        object.__setattr__(self, "frozen", fr)

    @property
    def n_log2(self) -> int:
        return self.n.bit_length() - 1

    @property
    def k(self) -> int:
        return self.n - len(self.frozen)

    @property
    def info(self) -> tuple:
        frozen = set(self.frozen)
        return tuple(i for i in range(self.n) if i not in frozen)

    def frozen_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        if self.frozen:
            mask[list(self.frozen)] = True
        return mask


def _bhattacharyya_profile(n: int, erasure: float) -> np.ndarray:
    """Erasure parameters of the polarized channels; lower is better."""
    z = np.array([erasure], dtype=np.float64)
    while z.size < n:
        nxt = np.empty(z.size * 2, dtype=np.float64)
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def _phi(x: float) -> float:
    # Piecewise fit to E[tanh(v/2)] under N(x, 2x); standard density-evolution
    # surrogate for the check-side update.
    if x <= 0.0:
        return 1.0
    if x < 10.0:
        return math.exp(-0.4527 * x**0.86 + 0.0218)
    return math.sqrt(math.pi / x) * math.exp(-x / 4.0) * (1.0 - 10.0 / (7.0 * x))


def _phi_inv(y: float) -> float:
    if y >= 1.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while _phi(hi) > y:
        hi *= 2.0
        if hi > 1e9:
            return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _phi(mid) > y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _gaussian_approx_profile(n: int, design_ebn0_db: float, rate: float) -> np.ndarray:
    """Mean decision LLRs of the polarized channels; higher is better."""
    sigma2 = 1.0 / (2.0 * rate * 10.0 ** (design_ebn0_db / 10.0))
    m = np.array([2.0 / sigma2], dtype=np.float64)
    while m.size < n:
        nxt = np.empty(m.size * 2, dtype=np.float64)
        for j, mj in enumerate(m):
            nxt[2 * j] = _phi_inv(1.0 - (1.0 - _phi(mj)) ** 2)
            nxt[2 * j + 1] = 2.0 * mj
        m = nxt
    return m


def _read_reliability_file(path, n: int) -> np.ndarray:
    try:
        with open(path, "r", encoding="ascii") as fh:
            order = [int(line.strip()) for line in fh if line.strip()]
    except OSError as exc:
        raise FileError(f"cannot read reliability file {path}: {exc}") from exc
    except ValueError as exc:
        raise FileError(f"reliability file {path} has non-integer lines") from exc
    if sorted(order) != list(range(n)):
        raise FileError(
            f"reliability file {path} must list each index 0..{n - 1} exactly once"
        )
    return np.array(order, dtype=np.int64)


def construct_frozen_set(
    n: int,
    k: int,
    method: str = "gaussian-approx",
    *,
    design_erasure: float = 0.5,
    design_ebn0_db: float = 3.0,
    reliability_file=None,
) -> PolarCode:
    """Pick the ``k`` most reliable inputs of a length-``n`` polar code.

    ``method`` is one of ``bhattacharyya`` (erasure-parameter recursion at
    ``design_erasure``), ``gaussian-approx`` (mean-LLR recursion at
    ``design_ebn0_db``), or ``reliability-file`` (one index per line,
    ascending reliability, the most reliable index last).
    """
    if n < 1 or (n & (n - 1)) != 0:
        raise BadLength(f"code length {n} is not a power of two")
    if not 0 < k <= n:
        raise BadLength(f"dimension k={k} out of range for n={n}")

    if method == "bhattacharyya":
        z = _bhattacharyya_profile(n, design_erasure)
        order = np.argsort(z, kind="stable")  # best (lowest z) first
        meta = {"method": method, "design_erasure": design_erasure}
    elif method == "gaussian-approx":
        m = _gaussian_approx_profile(n, design_ebn0_db, k / n)
        order = np.argsort(-m, kind="stable")  # best (highest mean) first
        meta = {"method": method, "design_ebn0_db": design_ebn0_db}
    elif method == "reliability-file":
        if reliability_file is None:
            raise FileError("reliability-file construction needs a file path")
        order = _read_reliability_file(reliability_file, n)[::-1]
        meta = {"method": method, "reliability_file": str(reliability_file)}
    else:
        raise BadLength(f"unknown construction method {method!r}")

    info = set(int(i) for i in order[:k])
    frozen = tuple(i for i in range(n) if i not in info)
    meta["bit_order"] = "natural"
    return PolarCode(n=n, frozen=frozen, construction=meta)


# ---------------------------------------------------------------------------
# Transform, encoding, parity checks


def polar_transform(bits) -> np.ndarray:
    """Apply the Kronecker-power transform along the last axis (involution)."""
    x = np.array(bits, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    if n & (n - 1):
        raise BadLength(f"transform length {n} is not a power of two")
    block = 1
    while block < n:
        v = x.reshape(-1, 2 * block)
        v[:, :block] ^= v[:, block:]
        block *= 2
    return x


def polar_encode(code: PolarCode, msg) -> np.ndarray:
    """Encode ``k`` message bits; frozen inputs are zero."""
    msg = np.asarray(msg, dtype=np.uint8)
    if msg.shape != (code.k,):
        raise LengthMismatch(f"message length {msg.shape} != k={code.k}")
    u = np.zeros(code.n, dtype=np.uint8)
    if code.k:
        u[list(code.info)] = msg
    return polar_transform(u)


def polar_pcm(code: PolarCode) -> BitMatrix:
    """Parity check matrix: one row per frozen index.

    Because the transform is self-inverse, ``u = x @ T`` and the frozen
    constraint ``u_f = 0`` reads off column ``f`` of the transform, whose
    entries are ``1`` exactly where the column index covers ``f`` bitwise.
    """
    n = code.n
    idx = np.arange(n, dtype=np.int64)
    rows = [((idx & f) == f).astype(np.uint8) for f in code.frozen]
    if not rows:
        return BitMatrix(0, n)
    return BitMatrix.from_array(np.array(rows, dtype=np.uint8))


def codebook(code: PolarCode) -> np.ndarray:
    """All ``2**k`` codewords as a (2**k, n) array (small codes only)."""
    k = code.k
    msgs = ((np.arange(1 << k)[:, None] >> np.arange(k)[None, ::-1]) & 1).astype(
        np.uint8
    )
    u = np.zeros((1 << k, code.n), dtype=np.uint8)
    if k:
        u[:, list(code.info)] = msgs
    return polar_transform(u)


# ---------------------------------------------------------------------------
# List decoding


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def _f_exact(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s = np.abs(a + b)
    d = np.abs(a - b)
    return (
        np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        + np.log1p(np.exp(-s))
        - np.log1p(np.exp(-d))
    )


def _f_minsum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def _g(a: np.ndarray, b: np.ndarray, left_bits: np.ndarray) -> np.ndarray:
    return b + (1.0 - 2.0 * left_bits) * a


@dataclass(frozen=True)
class BranchDiscard:
    """One branch the list decoder did not extend to a leaf."""

    index: int  # input decision index at which the branch was dropped
    pm: float  # path metric of the discarded branch at that point
    kind: str  # PRUNED_VALID or FROZEN_INVALID


@dataclass
class SclOutcome:
    """Visited leaves plus the ledger of every abandoned branch.

    ``codewords[j]`` and ``pms[j]`` are sorted by ascending path metric;
    ``exp(-pm)`` is proportional to the leaf's joint likelihood.
    """

    codewords: np.ndarray  # (leaves, n) uint8
    pms: np.ndarray  # (leaves,)
    discards: tuple

    @property
    def best(self) -> np.ndarray:
        return self.codewords[0]


class _BatchScl:
    """Raw arrays from one batched list decode (batch axis first)."""

    __slots__ = ("codewords", "pms", "pruned", "invalid")

    def __init__(self, codewords, pms, pruned, invalid):
        self.codewords = codewords  # (B, leaves, n)
        self.pms = pms  # (B, leaves)
        self.pruned = pruned  # list of (index, (B, count)) in decode order
        self.invalid = invalid  # list of (index, (B, count))


def scl_decode_batch(
    code: PolarCode, chan_llr: np.ndarray, list_size: int, *, min_sum: bool = False
) -> _BatchScl:
    """List-decode a batch of received words of the same code.

    ``chan_llr`` has shape (B, n). Ties in pruning are broken by candidate
    creation order (parent order, then bit value), which keeps runs
    reproducible across platforms.
    """
    chan_llr = np.atleast_2d(np.asarray(chan_llr, dtype=np.float64))
    B, n = chan_llr.shape
    if n != code.n:
        raise LengthMismatch(f"LLR length {n} != code length {code.n}")
    if list_size < 1:
        raise ValueError("list size must be >= 1")
    L = int(list_size)
    m = code.n_log2
    f_op = _f_minsum if min_sum else _f_exact
    frozen = code.frozen_mask()

    # Depths 1..m live packed side by side in one flat buffer so a path
    # fork re-indexes all of them with a single gather. llr holds the
    # active node's LLRs per depth; pcw the codeword of the completed left
    # child hanging below depth d-1.
    offs = np.zeros(m + 2, dtype=np.int64)
    for d in range(1, m + 1):
        offs[d + 1] = offs[d] + (n >> d)
    flat = int(offs[m + 1])
    chan = chan_llr[:, None, :]  # depth 0, shared by all paths
    llr = np.zeros((B, L, flat))
    pcw = np.zeros((B, L, flat), dtype=np.uint8)

    def lv(buf, d):
        return buf[:, :, offs[d] : offs[d + 1]]

    pm = np.zeros((B, L))
    l_cur = 1
    pruned = []
    invalid = []
    codewords = None
    bidx = np.arange(B)[:, None]

    for i in range(n):
        # Refresh LLRs on the path to leaf i.
        if i == 0:
            start = 1
        else:
            t = (i & -i).bit_length() - 1  # trailing zeros
            dg = m - t
            h = n >> dg
            par = lv(llr, dg - 1)[:, :l_cur] if dg > 1 else chan
            lv(llr, dg)[:, :l_cur] = _g(
                par[..., :h], par[..., h:], lv(pcw, dg)[:, :l_cur]
            )
            start = dg + 1
        for d in range(start, m + 1):
            h = n >> d
            par = lv(llr, d - 1)[:, :l_cur] if d > 1 else chan
            lv(llr, d)[:, :l_cur] = f_op(par[..., :h], par[..., h:])

        lam = lv(llr, m)[:, :l_cur, 0] if m else chan[:, :l_cur, 0]

        if frozen[i]:
            invalid.append((i, pm[:, :l_cur] + _softplus(lam)))
            pm[:, :l_cur] += _softplus(-lam)
            bits = np.zeros((B, l_cur), dtype=np.uint8)
        else:
            pm0 = pm[:, :l_cur] + _softplus(-lam)
            pm1 = pm[:, :l_cur] + _softplus(lam)
            cand = np.empty((B, 2 * l_cur))
            cand[:, 0::2] = pm0  # candidate 2p+u: parent p, bit u
            cand[:, 1::2] = pm1
            if 2 * l_cur <= L:
                l_new = 2 * l_cur
                parent = np.broadcast_to(np.arange(l_new) >> 1, (B, l_new))
                bits = np.broadcast_to(
                    (np.arange(l_new) & 1).astype(np.uint8), (B, l_new)
                )
                pm[:, :l_new] = cand
            else:
                order = np.argsort(cand, axis=1, kind="stable")
                keep = order[:, :L]
                pruned.append((i, cand[bidx, order[:, L:]]))
                parent = keep >> 1
                bits = (keep & 1).astype(np.uint8)
                pm[:, :L] = cand[bidx, keep]
                l_new = L
            if m:
                llr[:, :l_new] = llr[bidx, parent]
                pcw[:, :l_new] = pcw[bidx, parent]
            l_cur = l_new

        # Propagate partial sums up while we just finished right children.
        cur = bits[:, :, None]
        node, d = i, m
        while d > 0 and (node & 1):
            cur = np.concatenate([lv(pcw, d)[:, :l_cur] ^ cur, cur], axis=2)
            node >>= 1
            d -= 1
        if d > 0:
            lv(pcw, d)[:, :l_cur] = cur
        else:
            codewords = cur

    order = np.argsort(pm[:, :l_cur], axis=1, kind="stable")
    pms = pm[bidx, order]
    codewords = codewords[bidx, order]
    return _BatchScl(codewords, pms, pruned, invalid)


def scl_decode(
    code: PolarCode, llr, list_size: int, *, min_sum: bool = False
) -> SclOutcome:
    """List-decode one received word; see :func:`scl_decode_batch`."""
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (code.n,):
        raise LengthMismatch(f"LLR length {llr.shape} != code length {code.n}")
    out = scl_decode_batch(code, llr[None, :], list_size, min_sum=min_sum)
    discards = []
    for idx, pmarr in out.invalid:
        discards.extend(BranchDiscard(idx, float(p), FROZEN_INVALID) for p in pmarr[0])
    for idx, pmarr in out.pruned:
        discards.extend(BranchDiscard(idx, float(p), PRUNED_VALID) for p in pmarr[0])
    discards.sort(key=lambda d: d.index)
    return SclOutcome(out.codewords[0], out.pms[0], tuple(discards))


def sc_decode(code: PolarCode, llr, *, min_sum: bool = False) -> np.ndarray:
    """Successive cancellation: the single surviving leaf of a list of one."""
    return scl_decode(code, llr, 1, min_sum=min_sum).best


# ---------------------------------------------------------------------------
# CRC attachment and list selection


def _crc_remainder(bits: np.ndarray, poly: int, width: int) -> int:
    reg = 0
    mask = (1 << width) - 1
    top = 1 << (width - 1)
    for b in bits:
        fb = int(b) ^ (1 if reg & top else 0)
        reg = (reg << 1) & mask
        if fb:
            reg ^= poly & mask
    return reg


def crc_attach(msg, poly: int, width: int) -> np.ndarray:
    """Append a ``width``-bit CRC (given polynomial, zero init, MSB first)."""
    if not 1 <= width <= 32:
        raise ValueError(f"CRC width {width} out of range (1..32)")
    msg = np.asarray(msg, dtype=np.uint8)
    reg = _crc_remainder(msg, poly, width)
    crc = np.array([(reg >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)
    return np.concatenate([msg, crc])


def crc_check(bits, poly: int, width: int) -> bool:
    bits = np.asarray(bits, dtype=np.uint8)
    return _crc_remainder(bits, poly, width) == 0


def save_polar_code(code: PolarCode, path) -> None:
    """Serialize {n, frozen set, construction metadata} as JSON."""
    import json

    blob = {
        "n": code.n,
        "frozen": list(code.frozen),
        "construction": dict(code.construction),
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(blob, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_polar_code(path) -> PolarCode:
    import json

    with open(path, "r", encoding="ascii") as fh:
        blob = json.load(fh)
    return PolarCode(
        n=int(blob["n"]),
        frozen=tuple(int(f) for f in blob["frozen"]),
        construction=dict(blob.get("construction", {})),
    )


def crc_select(code: PolarCode, outcome: SclOutcome, poly: int, width: int):
    """Lowest-metric leaf whose message passes the CRC.

    The message of a leaf is recovered through the involution: the info-set
    entries of ``transform(codeword)``, whose last ``width`` bits are the
    CRC. Returns ``(codeword, crc_ok)``; when no leaf passes, the overall
    best leaf is returned with ``crc_ok=False``.
    """
    info = list(code.info)
    for j in range(outcome.codewords.shape[0]):
        u = polar_transform(outcome.codewords[j])
        if crc_check(u[info], poly, width):
            return outcome.codewords[j], True
    return outcome.best, False
