"""Bit-wise soft-input soft-output component decoders.

Four interchangeable check-node decoders feed the message-passing loop: an
exhaustive exact-posterior oracle for small codes, the classic list-based
two-term approximation with saturation, a soft-output list decoder that
also accounts for the mass of pruned-but-valid codewords, and the exact
closed form for a single parity check.

All LLRs follow the ``ln P(0)/P(1)`` convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import LengthMismatch, TooLarge
from .polar import LLR_CLIP, PolarCode, codebook, scl_decode_batch

_LN2 = float(np.log(2.0))
#: Bits that the code structure pins to one value get this finite stand-in
#: for an infinite posterior LLR.
_APP_CAP = 1e30


@dataclass
class SisoResult:
    """A-posteriori and extrinsic LLRs plus mass bookkeeping.

    ``diagnostics`` carries ``visited_mass`` (sum of ``exp(-pm)`` over the
    leaves actually examined), ``invalid_mass`` (same sum over branches that
    violated a frozen constraint), and ``unvisited_mass`` (the estimate used
    for codewords the list never reached).
    """

    app_llr: np.ndarray
    ext_llr: np.ndarray
    diagnostics: dict


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    amax = np.max(a, axis=axis, keepdims=True)
    amax = np.where(np.isfinite(amax), amax, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - amax), axis=axis))
    return out + np.squeeze(amax, axis=axis)


def _per_bit_lse(wlog: np.ndarray, words: np.ndarray):
    """Log-mass per bit position split by bit value.

    ``wlog`` is (B, C) log-mass per word, ``words`` is (B, C, n); returns
    (lse0, lse1), each (B, n).
    """
    stacked = wlog[:, :, None]
    neg_inf = -np.inf
    lse0 = _logsumexp(np.where(words == 0, stacked, neg_inf), axis=1)
    lse1 = _logsumexp(np.where(words == 1, stacked, neg_inf), axis=1)
    return lse0, lse1


def _finalize(app: np.ndarray, llr_in: np.ndarray, diag: dict) -> tuple:
    app = np.clip(app, -_APP_CAP, _APP_CAP)
    ext = np.clip(app - llr_in, -LLR_CLIP, LLR_CLIP)
    return app, ext, diag


def _check_input(code: PolarCode, llr_in) -> np.ndarray:
    llr = np.atleast_2d(np.asarray(llr_in, dtype=np.float64))
    if llr.shape[1] != code.n:
        raise LengthMismatch(f"LLR length {llr.shape[1]} != code length {code.n}")
    return llr


# ---------------------------------------------------------------------------
# Exact posterior oracle


@lru_cache(maxsize=16)
def _cached_codebook(code: PolarCode) -> np.ndarray:
    return codebook(code)


def exact_app_batch(code: PolarCode, llr_in) -> tuple:
    """Exact per-bit posterior by summing over all ``2**k`` codewords."""
    llr = _check_input(code, llr_in)
    if code.k > 20:
        raise TooLarge(f"2^{code.k} codewords exceed the exhaustive bound 2^20")
    words = _cached_codebook(code)
    signs = 1.0 - 2.0 * words.astype(np.float64)
    pm = np.logaddexp(0.0, -signs[None, :, :] * llr[:, None, :]).sum(axis=2)
    wlog = -pm
    lse0, lse1 = _per_bit_lse(wlog, np.broadcast_to(words, (llr.shape[0],) + words.shape))
    total = np.exp(_logsumexp(wlog, axis=1))
    diag = {
        "visited_mass": total,
        "invalid_mass": np.zeros_like(total),
        "unvisited_mass": np.zeros_like(total),
    }
    return _finalize(lse0 - lse1, llr, diag)


def exact_app_siso(code: PolarCode, llr_in) -> SisoResult:
    """Exhaustive-enumeration posterior; the oracle the list decoders chase."""
    app, ext, diag = exact_app_batch(code, np.asarray(llr_in)[None, :])
    return SisoResult(app[0], ext[0], {k: float(v[0]) for k, v in diag.items()})


# ---------------------------------------------------------------------------
# List-based approximations


def _scl_diag(res, B: int) -> dict:
    wlog = -res.pms
    visited = np.exp(_logsumexp(wlog, axis=1))
    if res.invalid:
        inv = np.concatenate([-pm for _, pm in res.invalid], axis=1)
        invalid = np.exp(_logsumexp(inv, axis=1))
    else:
        invalid = np.zeros(B)
    return {"visited_mass": visited, "invalid_mass": invalid}


def pyndiah_batch(
    code: PolarCode,
    llr_in,
    list_size: int,
    beta: float = 3.0,
    alpha: float = 0.5,
    *,
    min_sum: bool = False,
) -> tuple:
    """Two-term posterior from a decoded list, saturated where one-sided.

    Each bit's LLR is the metric gap between the best leaves taking either
    value; bits where the list offers no competitor fall back to ``±beta``
    signed by the best leaf. The extrinsic output is scaled by ``alpha``.
    """
    llr = _check_input(code, llr_in)
    res = scl_decode_batch(code, llr, list_size, min_sum=min_sum)
    x = res.codewords
    pm = res.pms[:, :, None]
    pm0 = np.where(x == 0, pm, np.inf).min(axis=1)
    pm1 = np.where(x == 1, pm, np.inf).min(axis=1)
    one_sided = np.isinf(pm0) | np.isinf(pm1)
    best = x[:, 0, :]
    sat = (1.0 - 2.0 * best.astype(np.float64)) * beta
    with np.errstate(invalid="ignore"):
        gap = pm1 - pm0
    app = np.where(one_sided, sat, gap)
    diag = _scl_diag(res, llr.shape[0])
    diag["unvisited_mass"] = np.zeros(llr.shape[0])
    app = np.clip(app, -_APP_CAP, _APP_CAP)
    ext = np.clip(alpha * (app - llr), -LLR_CLIP, LLR_CLIP)
    return app, ext, diag


def pyndiah_siso(
    code: PolarCode,
    llr_in,
    list_size: int,
    beta: float = 3.0,
    alpha: float = 0.5,
    *,
    min_sum: bool = False,
) -> SisoResult:
    app, ext, diag = pyndiah_batch(
        code, np.asarray(llr_in)[None, :], list_size, beta, alpha, min_sum=min_sum
    )
    return SisoResult(app[0], ext[0], {k: float(v[0]) for k, v in diag.items()})


@lru_cache(maxsize=64)
def _frozen_after(code: PolarCode) -> np.ndarray:
    """frozen_after[i] = number of frozen input indices strictly above i."""
    mask = code.frozen_mask().astype(np.int64)
    tail = np.cumsum(mask[::-1])[::-1]
    out = np.zeros(code.n, dtype=np.int64)
    out[:-1] = tail[1:]
    return out


def so_scl_batch(
    code: PolarCode, llr_in, list_size: int, *, min_sum: bool = False
) -> tuple:
    """List-decoder posterior that also budgets for pruned-away codewords.

    A branch pruned at decision index ``i`` roots a subtree of total mass
    ``exp(-pm)``; the fraction of its leaves that satisfy the remaining
    frozen constraints is ``2**-f(i)`` with ``f(i)`` the number of frozen
    indices after ``i``. The summed estimate is split evenly between the
    two bit values at every position, which reduces to the exact posterior
    whenever the list is exhaustive.
    """
    llr = _check_input(code, llr_in)
    res = scl_decode_batch(code, llr, list_size, min_sum=min_sum)
    B = llr.shape[0]
    wlog = -res.pms
    lse0, lse1 = _per_bit_lse(wlog, res.codewords)
    f_after = _frozen_after(code)
    if res.pruned:
        parts = [-pm - f_after[i] * _LN2 for i, pm in res.pruned]
        log_mu = _logsumexp(np.concatenate(parts, axis=1), axis=1)
    else:
        log_mu = np.full(B, -np.inf)
    half = (log_mu - _LN2)[:, None]
    app = np.logaddexp(lse0, half) - np.logaddexp(lse1, half)
    diag = _scl_diag(res, B)
    diag["unvisited_mass"] = np.exp(log_mu)
    return _finalize(app, llr, diag)


def so_scl_siso(
    code: PolarCode, llr_in, list_size: int, *, min_sum: bool = False
) -> SisoResult:
    app, ext, diag = so_scl_batch(
        code, np.asarray(llr_in)[None, :], list_size, min_sum=min_sum
    )
    return SisoResult(app[0], ext[0], {k: float(v[0]) for k, v in diag.items()})


# ---------------------------------------------------------------------------
# Single parity check (the degenerate component that recovers plain LDPC)


def spc_batch(llr_in) -> tuple:
    """Exact extrinsic for a single parity check via tanh products.

    Exclusive prefix/suffix products avoid dividing by zero-LLR terms.
    """
    llr = np.atleast_2d(np.asarray(llr_in, dtype=np.float64))
    n = llr.shape[1]
    if n < 2:
        raise LengthMismatch("a parity check needs at least 2 bits")
    t = np.tanh(llr / 2.0)
    pref = np.ones_like(t)
    np.cumprod(t[:, :-1], axis=1, out=pref[:, 1:])
    suf = np.ones_like(t)
    np.cumprod(t[:, :0:-1], axis=1, out=suf[:, -2::-1])
    prod = np.clip(pref * suf, -1.0 + 1e-16, 1.0 - 1e-16)
    ext = 2.0 * np.arctanh(prod)
    app = llr + ext
    diag = {
        "visited_mass": np.full(llr.shape[0], np.nan),
        "invalid_mass": np.full(llr.shape[0], np.nan),
        "unvisited_mass": np.full(llr.shape[0], np.nan),
    }
    return app, np.clip(ext, -LLR_CLIP, LLR_CLIP), diag


def spc_siso(llr_in) -> SisoResult:
    app, ext, diag = spc_batch(np.asarray(llr_in)[None, :])
    return SisoResult(app[0], ext[0], {k: float(v[0]) for k, v in diag.items()})
