"""BPSK/AWGN channel model and deterministic Monte Carlo BLER engine.

Every frame draws its randomness from a counter-based generator keyed by
``(seed, snr_index, frame_index)``, so results are bit-identical no matter
how frames are distributed over worker processes. The stopping rule is an
in-order scan: a sweep point counts frames ``0..n-1`` where ``n`` is the
first frame at which the error budget is met (or the frame cap).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from .errors import BadParams
from .gf2 import BitMatrix
from .gldpc import GldpcCode, gldpc_encode
from .mpa import MpaDecoder

CSV_COLUMNS = (
    "eb_n0_db",
    "frames",
    "block_errors",
    "bler",
    "avg_iterations",
    "cn_ops_eq3",
    "wall_s",
    "seed",
)


# ---------------------------------------------------------------------------
# Channel


def sigma_for(ebn0_db: float, rate: float) -> float:
    """Noise standard deviation for a BPSK/AWGN channel at this Eb/N0."""
    if rate <= 0:
        raise BadParams(f"rate must be positive, got {rate}")
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def frame_generator(seed: int, snr_index: int, frame_index: int) -> np.random.Generator:
    """Counter-based stream unique to (seed, SNR point, frame)."""
    if not 0 <= seed < 2**63:
        raise BadParams("seed must fit in 63 bits")
    key = (seed << 64) | (snr_index << 32) | frame_index
    return np.random.Generator(np.random.Philox(key=key))


def gaussian(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normal draws via Box-Muller on the generator's uniforms."""
    pairs = (size + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1]: keeps the log finite
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    out = np.empty(pairs * 2)
    out[0::2] = r * np.cos(2.0 * np.pi * u2)
    out[1::2] = r * np.sin(2.0 * np.pi * u2)
    return out[:size]


def transmit(codeword, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """BPSK-map, add white Gaussian noise, return channel LLRs ``2y/sigma^2``."""
    if sigma <= 0:
        raise BadParams(f"sigma must be positive, got {sigma}")
    bits = np.asarray(codeword, dtype=np.uint8)
    symbols = 1.0 - 2.0 * bits.astype(np.float64)
    y = symbols + sigma * gaussian(rng, bits.size)
    return 2.0 * y / (sigma * sigma)


# ---------------------------------------------------------------------------
# Complexity counters


def complexity_ldpc(i_avg: float, n: int, m: int, dv_bar: float, dc_bar: float) -> float:
    """Basic operations of flooding BP per received word."""
    if min(i_avg, n, m, dv_bar, dc_bar) < 0:
        raise BadParams("complexity inputs must be non-negative")
    return i_avg * (n * dv_bar + m * dc_bar)


def complexity_gldpc(
    i_avg: float, n: int, dv_bar: float, list_size: int, component_lengths
) -> float:
    """Basic operations with list-decoded component checks per received word."""
    if min(i_avg, n, dv_bar) < 0 or list_size < 0:
        raise BadParams("complexity inputs must be non-negative")
    total = 0.0
    for ni in component_lengths:
        ni = int(ni)
        if ni < 2 or ni & (ni - 1):
            raise BadParams(f"component length {ni} must be a power of two >= 2")
        total += ni * (math.log2(ni) + 1.0)
    return i_avg * (n * dv_bar + list_size * total)


# ---------------------------------------------------------------------------
# Simulation configuration and results


@dataclass
class SimConfig:
    """Everything a sweep needs; a pure function of this plus nothing else."""

    code: object  # GldpcCode or BitMatrix (decoded as plain LDPC)
    ebn0_db: tuple
    max_frames: int = 10000
    max_errors: int = 100
    siso: str = "so-scl"
    list_size: int = 4
    beta: float = 3.0
    alpha: object = None
    max_iter: int = 20
    min_sum: bool = False
    seed: int = 1
    workers: int = 1
    all_zero: bool = False
    timing: bool = False  # measured wall time in the CSV breaks byte-reproducibility

    def __post_init__(self):
        self.ebn0_db = tuple(float(x) for x in self.ebn0_db)
        if not self.ebn0_db:
            raise BadParams("at least one Eb/N0 point is required")
        if self.max_frames < 1:
            raise BadParams("max_frames must be >= 1")
        if self.max_errors < 1:
            raise BadParams("max_errors must be >= 1")


@dataclass
class SnrPoint:
    ebn0_db: float
    frames: int
    errors: int
    bler: float
    avg_iterations: float
    converged_frames: int
    cn_ops: float
    wall_s: float  # value written to CSV (0.0 unless timing was requested)
    measured_wall_s: float


@dataclass
class SimResult:
    seed: int
    points: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Frame workers


_WORKER = None


def _make_context(config: SimConfig):
    code = config.code
    decoder = MpaDecoder(
        code,
        siso=config.siso,
        list_size=config.list_size,
        beta=config.beta,
        alpha=config.alpha,
        max_iter=config.max_iter,
        min_sum=config.min_sum,
    )
    if isinstance(code, GldpcCode):
        k_bits = code.k_bits
        n_bits = code.n_bits
    elif isinstance(code, BitMatrix):
        from .gf2 import systematic_generator

        gen, _ = systematic_generator(code)
        k_bits = gen.rows
        n_bits = code.cols
        code = _LdpcCodec(code, gen)
    else:
        raise TypeError(f"cannot simulate {type(code).__name__}")
    rate = k_bits / n_bits
    return code, decoder, k_bits, rate


class _LdpcCodec:
    """Adapter so a bare parity check matrix encodes like a GldpcCode."""

    def __init__(self, pcm: BitMatrix, gen: BitMatrix):
        self.pcm = pcm
        self.gen = gen
        self.k_bits = gen.rows
        self.n_bits = pcm.cols

    def encode(self, msg):
        rows = self.gen.data[np.asarray(msg, dtype=np.uint8).astype(bool)]
        if rows.shape[0] == 0:
            return np.zeros(self.n_bits, dtype=np.uint8)
        from .gf2 import _unpack_rows

        return _unpack_rows(np.bitwise_xor.reduce(rows, axis=0)[None, :], self.n_bits)[0]


def _encode(code, msg):
    if isinstance(code, GldpcCode):
        return gldpc_encode(code, msg)
    return code.encode(msg)


def _simulate_frames(args):
    seed, snr_index, lo, hi, sigma, all_zero = args
    code, decoder, k_bits, _ = _WORKER
    errors = np.zeros(hi - lo, dtype=np.int64)
    iters = np.zeros(hi - lo, dtype=np.int64)
    conv = np.zeros(hi - lo, dtype=np.int64)
    for j, fi in enumerate(range(lo, hi)):
        rng = frame_generator(seed, snr_index, fi)
        if all_zero:
            sent = np.zeros(decoder.n_vars, dtype=np.uint8)
        else:
            msg = rng.integers(0, 2, size=k_bits, dtype=np.uint8)
            sent = _encode(code, msg)
        llr = transmit(sent, sigma, rng)
        out = decoder.decode(llr)
        errors[j] = int(not np.array_equal(out.codeword, sent))
        iters[j] = out.iterations
        conv[j] = int(out.converged)
    return errors, iters, conv


def _init_worker(config: SimConfig):
    global _WORKER
    _WORKER = _make_context(config)


# ---------------------------------------------------------------------------
# Sweep driver


def _run_point(config, pool, snr_index, sigma):
    chunk = 64 if pool is not None else 256
    lanes = config.workers if pool is not None else 1
    errors = []
    iters = []
    conv = []
    next_frame = 0
    stop = None
    while next_frame < config.max_frames and stop is None:
        hi = min(next_frame + chunk * lanes, config.max_frames)
        tasks = [
            (config.seed, snr_index, lo, min(lo + chunk, hi), sigma, config.all_zero)
            for lo in range(next_frame, hi, chunk)
        ]
        if pool is not None:
            results = pool.map(_simulate_frames, tasks)
        else:
            results = [_simulate_frames(t) for t in tasks]
        for e, it, cv in results:
            errors.append(e)
            iters.append(it)
            conv.append(cv)
        next_frame = hi
        cum = np.cumsum(np.concatenate(errors))
        reached = np.nonzero(cum >= config.max_errors)[0]
        if reached.size:
            stop = int(reached[0]) + 1
    counted = stop if stop is not None else min(next_frame, config.max_frames)
    all_err = np.concatenate(errors)[:counted]
    all_it = np.concatenate(iters)[:counted]
    all_cv = np.concatenate(conv)[:counted]
    return counted, int(all_err.sum()), float(all_it.mean()), int(all_cv.sum())


def _point_ops(config, decoder, i_avg: float) -> float:
    n = decoder.n_vars
    if decoder._groups is not None:
        lengths = [code.n for code, idx, _ in decoder._groups for _ in range(len(idx))]
        return complexity_gldpc(i_avg, n, decoder.avg_vn_degree, config.list_size, lengths)
    dc_bar = float(decoder.cn_degree.mean()) if decoder.n_checks else 0.0
    return complexity_ldpc(i_avg, n, decoder.n_checks, decoder.avg_vn_degree, dc_bar)


def run_bler(config: SimConfig) -> SimResult:
    """Sweep Eb/N0 points; deterministic for any worker count."""
    global _WORKER
    _WORKER = _make_context(config)
    decoder = _WORKER[1]
    result = SimResult(seed=config.seed)
    pool = None
    try:
        if config.workers > 1:
            pool = Pool(config.workers, initializer=_init_worker, initargs=(config,))
        for snr_index, ebn0 in enumerate(config.ebn0_db):
            sigma = sigma_for(ebn0, _WORKER[3])
            t0 = time.perf_counter()
            frames, errs, i_avg, converged = _run_point(config, pool, snr_index, sigma)
            wall = time.perf_counter() - t0
            result.points.append(
                SnrPoint(
                    ebn0_db=ebn0,
                    frames=frames,
                    errors=errs,
                    bler=errs / frames,
                    avg_iterations=i_avg,
                    converged_frames=converged,
                    cn_ops=_point_ops(config, decoder, i_avg),
                    wall_s=wall if config.timing else 0.0,
                    measured_wall_s=wall,
                )
            )
    finally:
        if pool is not None:
            pool.close()
            pool.join()
        _WORKER = None
    return result


def write_csv(path, result: SimResult) -> None:
    """One row per swept point; formatting is pinned for reproducibility."""
    lines = [",".join(CSV_COLUMNS)]
    for p in result.points:
        lines.append(
            f"{p.ebn0_db:g},{p.frames},{p.errors},{p.bler:.8e},"
            f"{p.avg_iterations:.6f},{p.cn_ops:.6e},{p.wall_s:.3f},{result.seed}"
        )
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
