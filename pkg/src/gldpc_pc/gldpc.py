"""GLDPC code construction with polar component checks.

The Tanner graph comes from a two-block-row adjacency matrix of cyclically
shifted identity blocks, so every variable node has degree 2 and every
check node degree ``n``. Each check constrains its variables to be a
(column-permuted) codeword of an ``(n, k)`` polar component code; the
parity check matrix of the whole code is assembled by replacing adjacency
ones with component PCM columns.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, DegreeMismatch, LengthMismatch
from .gf2 import BitMatrix, systematic_generator
from .polar import construct_frozen_set, polar_pcm

ARTIFACT_VERSION = 1


def build_am(n: int, m: int) -> BitMatrix:
    """Adjacency matrix with ``m`` check nodes of degree ``n``.

    Two block rows of ``m/2 x m/2`` identity blocks: the first all
    unshifted, the second cyclically right-shifted by the block index
    (mod ``m/2``). Every column has weight 2, giving ``N = n*m/2``
    variable nodes.
    """
    if m < 2 or m % 2:
        raise BadParams(f"check count m={m} must be even and >= 2")
    if n < 1:
        raise BadParams(f"component length n={n} must be >= 1")
    z = m // 2
    gamma = np.zeros((m, n * z), dtype=np.uint8)
    r = np.arange(z)
    for j in range(n):
        gamma[r, j * z + r] = 1
        gamma[z + r, j * z + (r + j) % z] = 1
    return BitMatrix.from_array(gamma)


def sample_permutations(seed: int, m: int, n: int, *, identity: bool = False) -> np.ndarray:
    """Per-check-node column permutations for the component PCM.

    The first block row keeps identity permutations; the second gets
    seeded uniform (Fisher-Yates) draws, so a stored seed rebuilds the
    exact code. ``identity=True`` forces all checks to the unpermuted
    case.
    """
    perms = np.tile(np.arange(n, dtype=np.int64), (m, 1))
    if identity:
        return perms
    rng = np.random.Generator(np.random.Philox(key=seed))
    for i in range(m // 2, m):
        perms[i] = rng.permutation(n)
    return perms


def assemble_pcm(am: BitMatrix, components) -> BitMatrix:
    """Expand adjacency ones into component parity-check columns.

    ``components[i]`` is ``(code, perm)`` for check node ``i``: the k-th 1
    in adjacency row ``i`` (left to right) receives the k-th column of the
    permuted component PCM; all other positions are zero vectors.
    """
    am_arr = am.to_array()
    blocks = []
    for i, (code, perm) in enumerate(components):
        support = np.nonzero(am_arr[i])[0]
        if support.size != code.n:
            raise DegreeMismatch(i, code.n, int(support.size))
        h = polar_pcm(code).to_array()
        block = np.zeros((h.shape[0], am.cols), dtype=np.uint8)
        block[:, support] = h[:, perm]
        blocks.append(block)
    stacked = np.concatenate(blocks, axis=0) if blocks else np.zeros((0, am.cols), np.uint8)
    return BitMatrix.from_array(stacked) if stacked.shape[0] else BitMatrix(0, am.cols)


@dataclass
class GldpcCode:
    """A constructed code instance, immutable once built."""

    am: BitMatrix
    components: list  # per check node: (PolarCode, permutation)
    pcm: BitMatrix
    gen: BitMatrix
    msg_positions: np.ndarray  # codeword position of each message bit
    dims: dict
    params: dict  # construction recipe, enough to rebuild deterministically

    @property
    def n_bits(self) -> int:
        return self.pcm.cols

    @property
    def k_bits(self) -> int:
        return self.gen.rows

    @property
    def rate(self) -> float:
        return self.k_bits / self.n_bits


def _dims_from_parts(am: BitMatrix, components, pcm: BitMatrix) -> dict:
    from .gf2 import rank as gf2_rank

    r = gf2_rank(pcm)
    nominal_checks = sum(code.n - code.k for code, _ in components)
    return {
        "N": am.cols,
        "K": am.cols - r,
        "M": am.rows,
        "n": components[0][0].n,
        "k": components[0][0].k,
        "rank": r,
        "checks": nominal_checks,
        "rank_deficient": r < nominal_checks,
    }


def derive_dimensions(code: "GldpcCode") -> dict:
    """Recompute the dimension record from the assembled matrices.

    ``K = N - rank(pcm)``; dependent parity checks raise K above
    ``N - M(n-k)`` and set the ``rank_deficient`` flag.
    """
    return _dims_from_parts(code.am, code.components, code.pcm)


def build_gldpc(
    n: int,
    k: int,
    m: int,
    *,
    frozen_method: str = "gaussian-approx",
    design_ebn0_db: float = 3.0,
    design_erasure: float = 0.5,
    reliability_file=None,
    perm_seed: int = 1,
    identity_perms: bool = False,
) -> GldpcCode:
    """Construct an ``(N, K)`` code from ``m`` copies of an ``(n, k)`` polar check.

    One polar code is shared by all check nodes; the second block row sees
    it through seeded random column permutations. Dependent parity checks
    are dropped with a warning rather than rejected, enlarging K.
    """
    component = construct_frozen_set(
        n,
        k,
        frozen_method,
        design_erasure=design_erasure,
        design_ebn0_db=design_ebn0_db,
        reliability_file=reliability_file,
    )
    am = build_am(n, m)
    perms = sample_permutations(perm_seed, m, n, identity=identity_perms)
    components = [(component, perms[i]) for i in range(m)]
    pcm = assemble_pcm(am, components)
    gen, col_perm = systematic_generator(pcm)
    dims = _dims_from_parts(am, components, pcm)
    if dims["rank_deficient"]:
        warnings.warn(
            f"{dims['checks'] - dims['rank']} dependent parity checks dropped; "
            f"K = {dims['K']} exceeds N - M(n-k) = {dims['N'] - dims['checks']}",
            stacklevel=2,
        )
    params = {
        "format_version": ARTIFACT_VERSION,
        "n": n,
        "k": k,
        "m": m,
        "frozen": dict(component.construction),
        "perm_seed": perm_seed,
        "identity_perms": identity_perms,
    }
    return GldpcCode(
        am=am,
        components=components,
        pcm=pcm,
        gen=gen,
        msg_positions=col_perm[: gen.rows].copy(),
        dims=dims,
        params=params,
    )


def gldpc_encode(code: GldpcCode, msg) -> np.ndarray:
    """Systematic encode: message bits appear at ``code.msg_positions``."""
    msg = np.asarray(msg, dtype=np.uint8)
    if msg.shape != (code.k_bits,):
        raise LengthMismatch(f"message length {msg.shape} != K={code.k_bits}")
    rows = code.gen.data[msg.astype(bool)]
    if rows.shape[0] == 0:
        return np.zeros(code.n_bits, dtype=np.uint8)
    packed = np.bitwise_xor.reduce(rows, axis=0)
    from .gf2 import _unpack_rows

    return _unpack_rows(packed[None, :], code.n_bits)[0]


# ---------------------------------------------------------------------------
# Artifact persistence: store the recipe, rebuild the matrices


def save_artifact(code: GldpcCode, path) -> None:
    """Write the construction recipe as JSON; matrices rebuild from it."""
    with open(path, "w", encoding="ascii") as fh:
        json.dump(code.params, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_artifact(path) -> GldpcCode:
    with open(path, "r", encoding="ascii") as fh:
        params = json.load(fh)
    version = params.get("format_version")
    if version != ARTIFACT_VERSION:
        raise BadParams(f"unsupported artifact format_version {version}")
    frozen = params.get("frozen", {})
    return build_gldpc(
        int(params["n"]),
        int(params["k"]),
        int(params["m"]),
        frozen_method=frozen.get("method", "gaussian-approx"),
        design_ebn0_db=float(frozen.get("design_ebn0_db", 3.0)),
        design_erasure=float(frozen.get("design_erasure", 0.5)),
        reliability_file=frozen.get("reliability_file"),
        perm_seed=int(params["perm_seed"]),
        identity_perms=bool(params.get("identity_perms", False)),
    )


def artifact_sha256(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()
