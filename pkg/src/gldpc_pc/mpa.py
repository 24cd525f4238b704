"""Iterative message passing over the code's Tanner graph.

Flooding schedule: every variable node sends channel-plus-extrinsic
messages to its checks, every check answers through a soft-input
soft-output component decode, a hard decision on the posterior is parity
checked, and the loop stops on success or at the iteration cap. Check
updates within an iteration only read the previous iteration's messages,
so their execution order never changes the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch
from .gf2 import BitMatrix
from .gldpc import GldpcCode
from .polar import LLR_CLIP
from .siso import exact_app_batch, pyndiah_batch, so_scl_batch, spc_batch

SISO_KINDS = ("so-scl", "pyndiah", "exact", "spc")


def parity_check(pcm: BitMatrix, word) -> bool:
    """True iff ``pcm @ word == 0`` over GF(2)."""
    word = np.asarray(word, dtype=np.uint8)
    if word.shape != (pcm.cols,):
        raise LengthMismatch(f"word length {word.shape} != {pcm.cols}")
    if pcm.rows == 0:
        return True
    return not pcm.mat_vec(word).any()


@dataclass
class MpaResult:
    codeword: np.ndarray
    iterations: int
    converged: bool


class MpaDecoder:
    """Reusable decoder bound to one code and one component-decoder choice.

    ``code`` is a :class:`GldpcCode`, or a plain parity check
    :class:`BitMatrix` whose rows are treated as single parity checks
    (classic LDPC belief propagation with ``siso='spc'``).
    """

    def __init__(
        self,
        code,
        *,
        siso: str = "so-scl",
        list_size: int = 4,
        beta: float = 3.0,
        alpha=None,
        max_iter: int = 20,
        min_sum: bool = False,
        llr_clip: float = LLR_CLIP,
    ):
        if siso not in SISO_KINDS:
            raise ValueError(f"unknown siso kind {siso!r}; choose from {SISO_KINDS}")
        if max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        self.siso = siso
        self.list_size = int(list_size)
        self.beta = float(beta)
        if alpha is None:
            # Small-list extrinsics come out overconfident on degree-2 graphs;
            # damped early iterations move the waterfall a full dB left, and
            # releasing the damping afterwards restores convergence speed.
            # Exact posteriors need no damping.
            if siso == "exact":
                alpha = 1.0
            elif siso == "pyndiah":
                alpha = 0.5
            else:
                alpha = (0.5, 0.5, 0.7, 0.9, 1.0)
        self.alpha = alpha
        self.max_iter = int(max_iter)
        self.min_sum = bool(min_sum)
        self.llr_clip = float(llr_clip)

        if isinstance(code, GldpcCode):
            am = code.am
            self.pcm = code.pcm
            components = code.components
        elif isinstance(code, BitMatrix):
            am = code
            self.pcm = code
            components = None
            if siso != "spc":
                raise ValueError("a bare parity check matrix decodes with siso='spc'")
        else:
            raise TypeError(f"cannot decode over {type(code).__name__}")
        self.code = code
        self._build_graph(am, components)

    def _build_graph(self, am: BitMatrix, components) -> None:
        arr = am.to_array()
        self.n_vars = am.cols
        self.n_checks = am.rows
        supports = [np.nonzero(arr[i])[0] for i in range(am.rows)]
        self.edge_vn = (
            np.concatenate(supports) if supports else np.zeros(0, dtype=np.int64)
        )
        self.n_edges = int(self.edge_vn.size)
        offsets = np.zeros(am.rows + 1, dtype=np.int64)
        np.cumsum([len(s) for s in supports], out=offsets[1:])
        self.cn_degree = np.diff(offsets)
        self.avg_vn_degree = self.n_edges / self.n_vars

        if components is None or self.siso == "spc":
            # Padded (checks, dmax) edge index table; -1 pads read as +inf.
            dmax = int(self.cn_degree.max(initial=0))
            table = np.full((am.rows, dmax), -1, dtype=np.int64)
            for i in range(am.rows):
                table[i, : self.cn_degree[i]] = np.arange(offsets[i], offsets[i + 1])
            self._spc_table = table
            self._groups = None
        else:
            # Group check nodes by component code so each group batches
            # through one list decode.
            groups = {}
            for i, (code, perm) in enumerate(components):
                groups.setdefault(code, []).append((i, perm))
            self._groups = []
            for code, entries in groups.items():
                cns = np.array([e[0] for e in entries], dtype=np.int64)
                perms = np.array([e[1] for e in entries], dtype=np.int64)
                idx = offsets[cns][:, None] + np.arange(code.n)[None, :]
                self._groups.append((code, idx, perms))
            self._spc_table = None

    def _cn_update(self, v2c: np.ndarray, iteration: int) -> np.ndarray:
        c2v = np.zeros_like(v2c)
        if self._groups is None:
            table = self._spc_table
            pad = table < 0
            inputs = np.where(pad, np.inf, v2c[np.where(pad, 0, table)])
            _, ext, _ = spc_batch(inputs)
            valid = ~pad
            c2v[table[valid]] = ext[valid]
            return c2v
        alpha = self.alpha
        if not np.isscalar(alpha):
            alpha = alpha[min(iteration - 1, len(alpha) - 1)]
        for code, idx, perms in self._groups:
            llr_y = v2c[idx]
            llr_z = np.empty_like(llr_y)
            np.put_along_axis(llr_z, perms, llr_y, axis=1)
            if self.siso == "so-scl":
                _, ext_z, _ = so_scl_batch(
                    code, llr_z, self.list_size, min_sum=self.min_sum
                )
                if alpha != 1.0:
                    ext_z = alpha * ext_z
            elif self.siso == "pyndiah":
                _, ext_z, _ = pyndiah_batch(
                    code,
                    llr_z,
                    self.list_size,
                    beta=self.beta,
                    alpha=alpha,
                    min_sum=self.min_sum,
                )
            else:  # exact
                _, ext_z, _ = exact_app_batch(code, llr_z)
                if alpha != 1.0:
                    ext_z = alpha * ext_z
            c2v[idx] = np.take_along_axis(ext_z, perms, axis=1)
        return c2v

    def decode(self, channel_llr) -> MpaResult:
        chan = np.asarray(channel_llr, dtype=np.float64)
        if chan.shape != (self.n_vars,):
            raise LengthMismatch(f"LLR length {chan.shape} != N={self.n_vars}")
        chan = np.clip(chan, -self.llr_clip, self.llr_clip)
        c2v = np.zeros(self.n_edges)
        word = (chan < 0).astype(np.uint8)
        converged = False
        iteration = 0
        for iteration in range(1, self.max_iter + 1):
            acc = np.bincount(self.edge_vn, weights=c2v, minlength=self.n_vars)
            v2c = np.clip(
                (chan + acc)[self.edge_vn] - c2v, -self.llr_clip, self.llr_clip
            )
            c2v = np.clip(self._cn_update(v2c, iteration), -self.llr_clip, self.llr_clip)
            app = chan + np.bincount(self.edge_vn, weights=c2v, minlength=self.n_vars)
            word = (app < 0).astype(np.uint8)  # ties resolve to bit 0
            if parity_check(self.pcm, word):
                converged = True
                break
        return MpaResult(word, iteration, converged)


def mpa_decode(
    code,
    channel_llr,
    max_iter: int = 20,
    siso: str = "so-scl",
    **params,
) -> MpaResult:
    """One-shot decode; build an :class:`MpaDecoder` directly for hot loops."""
    decoder = MpaDecoder(code, siso=siso, max_iter=max_iter, **params)
    return decoder.decode(channel_llr)
