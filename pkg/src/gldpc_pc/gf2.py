"""Dense GF(2) linear algebra on bit-packed matrices.

A :class:`BitMatrix` stores each row as a run of little-endian 64-bit words,
so row reduction works word-wide with XOR. On top of that this module
provides rank computation, reduction to systematic form ``[P | I]`` with a
recorded column permutation, generator-matrix extraction from a parity check
matrix, and alist text I/O.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateCode, LengthMismatch, ParseError, RankDeficient

_WORD_BITS = 64


def _n_words(cols: int) -> int:
    return max(1, (cols + _WORD_BITS - 1) // _WORD_BITS)


def _pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack a (rows, cols) 0/1 array into (rows, words) little-endian uint64."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    rows, cols = bits.shape
    words = _n_words(cols)
    packed = np.packbits(bits, axis=1, bitorder="little")
    out = np.zeros((rows, words * 8), dtype=np.uint8)
    out[:, : packed.shape[1]] = packed
    return out.view("<u8")


def _unpack_rows(data: np.ndarray, cols: int) -> np.ndarray:
    rows = data.shape[0]
    as_bytes = np.ascontiguousarray(data).view(np.uint8).reshape(rows, -1)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :cols]


class BitMatrix:
    """Dense binary matrix with bit-packed rows.

    Instances are immutable by convention once handed out: construction
    helpers may call :meth:`set`, but all public operations in this module
    work on private copies. Zero-row matrices are permitted because rate-1
    codes have an empty parity check matrix.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: np.ndarray | None = None):
        if rows < 0:
            raise ValueError(f"rows must be >= 0, got {rows}")
        if cols < 1:
            raise ValueError(f"cols must be >= 1, got {cols}")
        self.rows = rows
        self.cols = cols
        if data is None:
            data = np.zeros((rows, _n_words(cols)), dtype="<u8")
        else:
            if data.shape != (rows, _n_words(cols)):
                raise ValueError("packed data shape does not match dimensions")
            data = np.ascontiguousarray(data, dtype="<u8")
        self.data = data

    @classmethod
    def from_array(cls, arr) -> "BitMatrix":
        arr = np.atleast_2d(np.asarray(arr, dtype=np.uint8))
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array of bits")
        rows, cols = arr.shape
        return cls(rows, cols, _pack_rows(arr & 1))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_array(np.eye(n, dtype=np.uint8))

    def to_array(self) -> np.ndarray:
        return _unpack_rows(self.data, self.cols)

    def get(self, r: int, c: int) -> int:
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError(f"({r}, {c}) out of bounds for {self.rows}x{self.cols}")
        return int((self.data[r, c >> 6] >> np.uint64(c & 63)) & np.uint64(1))

    def set(self, r: int, c: int, value: int) -> None:
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError(f"({r}, {c}) out of bounds for {self.rows}x{self.cols}")
        mask = np.uint64(1) << np.uint64(c & 63)
        if value & 1:
            self.data[r, c >> 6] |= mask
        else:
            self.data[r, c >> 6] &= ~mask

    def copy(self) -> "BitMatrix":
        return BitMatrix(self.rows, self.cols, self.data.copy())

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_array(self.to_array().T)

    def mat_vec(self, bits) -> np.ndarray:
        """Return ``self @ bits`` over GF(2) as a length-``rows`` 0/1 vector."""
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != (self.cols,):
            raise LengthMismatch(f"vector length {bits.shape} != cols {self.cols}")
        packed = _pack_rows(bits[None, :])
        counts = np.bitwise_count(self.data & packed).sum(axis=1)
        return (counts & 1).astype(np.uint8)

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.rows:
            raise LengthMismatch(
                f"inner dimensions differ: {self.cols} vs {other.rows}"
            )
        bt = other.transpose()
        out = np.zeros((self.rows, other.cols), dtype=np.uint8)
        # Chunk so the (block, other.cols, words) temporary stays small.
        words = self.data.shape[1]
        block = max(1, int(4e6) // max(1, other.cols * words))
        for lo in range(0, self.rows, block):
            hi = min(lo + block, self.rows)
            counts = np.bitwise_count(
                self.data[lo:hi, None, :] & bt.data[None, :, :]
            ).sum(axis=2)
            out[lo:hi] = (counts & 1).astype(np.uint8)
        return BitMatrix.from_array(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and bool(np.array_equal(self.data, other.data))
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.data.tobytes()))

    def __repr__(self):
        return f"BitMatrix({self.rows}x{self.cols})"


def _eliminate(data: np.ndarray, rows: int, cols: int):
    """Full row reduction of packed data in place; returns pivot column list."""
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        w = c >> 6
        shift = np.uint64(c & 63)
        col = (data[r:, w] >> shift) & np.uint64(1)
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            data[[r, p]] = data[[p, r]]
        hits = ((data[:, w] >> shift) & np.uint64(1)).astype(bool)
        hits[r] = False
        data[hits] ^= data[r]
        pivots.append(c)
        r += 1
    return pivots


def rank(m: BitMatrix) -> int:
    """GF(2) row rank of ``m``."""
    data = m.data.copy()
    return len(_eliminate(data, m.rows, m.cols))


def row_basis(m: BitMatrix) -> BitMatrix:
    """Independent rows of ``m`` in reduced row-echelon form.

    Dependent rows are dropped; the result spans the same row space.
    """
    data = m.data.copy()
    pivots = _eliminate(data, m.rows, m.cols)
    return BitMatrix(len(pivots), m.cols, data[: len(pivots)].copy())


def to_systematic(h: BitMatrix):
    """Reduce ``h`` to the column-permuted systematic form ``[P | I]``.

    Returns ``(hsys, perm)`` where ``hsys[:, j] == h'[:, perm[j]]`` for the
    row-reduced ``h'`` and the identity block occupies the last ``rows``
    columns. Pivots are chosen right to left so an input already in
    ``[P | I]`` form comes back unchanged with the identity permutation.
    Raises :class:`RankDeficient` when the rows of ``h`` are dependent;
    callers should drop dependent rows first.
    """
    data = h.data.copy()
    pivot_of_row = [None] * h.rows
    r = h.rows - 1
    for c in range(h.cols - 1, -1, -1):
        if r < 0:
            break
        w = c >> 6
        shift = np.uint64(c & 63)
        col = (data[: r + 1, w] >> shift) & np.uint64(1)
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        p = int(nz[-1])
        if p != r:
            data[[r, p]] = data[[p, r]]
        hits = ((data[:, w] >> shift) & np.uint64(1)).astype(bool)
        hits[r] = False
        data[hits] ^= data[r]
        pivot_of_row[r] = c
        r -= 1
    if r >= 0:
        raise RankDeficient(h.rows - 1 - r)
    pivot_set = set(pivot_of_row)
    free_cols = [c for c in range(h.cols) if c not in pivot_set]
    perm = np.array(free_cols + pivot_of_row, dtype=np.int64)
    arr = _unpack_rows(data, h.cols)[:, perm]
    return BitMatrix(h.rows, h.cols, _pack_rows(arr)), perm


def systematic_generator(h: BitMatrix):
    """Generator matrix of the code with parity checks ``h``.

    Dependent rows of ``h`` are removed internally. Returns ``(g, perm)``:
    ``g`` has ``K = cols - rank(h)`` independent rows with ``g @ h.T == 0``,
    and is systematic under ``perm`` — message bit ``i`` of an encoded word
    sits at codeword position ``perm[i]``.
    """
    basis = row_basis(h)
    r = basis.rows
    k = h.cols - r
    if k == 0:
        raise DegenerateCode(f"parity checks leave dimension 0 for n={h.cols}")
    if r == 0:
        return BitMatrix.identity(h.cols), np.arange(h.cols, dtype=np.int64)
    hsys, perm = to_systematic(basis)
    hs = hsys.to_array()
    p = hs[:, :k]
    gsys = np.concatenate([np.eye(k, dtype=np.uint8), p.T], axis=1)
    g = np.zeros((k, h.cols), dtype=np.uint8)
    g[:, perm] = gsys
    return BitMatrix.from_array(g), perm


def generator_from_pcm(h: BitMatrix) -> BitMatrix:
    """Systematic generator matrix derived from a parity check matrix."""
    return systematic_generator(h)[0]


def _alist_tokens(line: str):
    return line.split()


def load_alist(path) -> BitMatrix:
    """Read a parity check matrix from alist text.

    Format: ``cols rows`` header, max column/row degrees, per-column and
    per-row degree lists, then 1-based index lists (zero padding allowed).
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()

    def ints(idx, expect=None):
        if idx >= len(lines):
            raise ParseError("unexpected end of file", idx + 1)
        try:
            vals = [int(t) for t in _alist_tokens(lines[idx])]
        except ValueError:
            raise ParseError("non-integer token", idx + 1) from None
        if expect is not None and len(vals) != expect:
            raise ParseError(f"expected {expect} values, got {len(vals)}", idx + 1)
        return vals

    cols, rows = ints(0, 2)
    if cols < 1 or rows < 1:
        raise ParseError("dimensions must be positive", 1)
    max_col, max_row = ints(1, 2)
    col_deg = ints(2, cols)
    row_deg = ints(3, rows)
    if col_deg and max(col_deg) > max_col:
        raise ParseError("column degree exceeds declared maximum", 3)
    if row_deg and max(row_deg) > max_row:
        raise ParseError("row degree exceeds declared maximum", 4)

    arr = np.zeros((rows, cols), dtype=np.uint8)
    for c in range(cols):
        vals = [v for v in ints(4 + c) if v != 0]
        if len(vals) != col_deg[c]:
            raise ParseError(
                f"column {c} lists {len(vals)} entries, degree says {col_deg[c]}",
                5 + c,
            )
        for v in vals:
            if not 1 <= v <= rows:
                raise ParseError(f"row index {v} out of range", 5 + c)
            arr[v - 1, c] = 1
    for r in range(rows):
        idx = 4 + cols + r
        vals = [v for v in ints(idx) if v != 0]
        if len(vals) != row_deg[r]:
            raise ParseError(
                f"row {r} lists {len(vals)} entries, degree says {row_deg[r]}",
                idx + 1,
            )
        listed = np.zeros(cols, dtype=np.uint8)
        for v in vals:
            if not 1 <= v <= cols:
                raise ParseError(f"column index {v} out of range", idx + 1)
            listed[v - 1] = 1
        if not np.array_equal(listed, arr[r]):
            raise ParseError(f"row {r} list disagrees with column lists", idx + 1)
    return BitMatrix.from_array(arr)


def save_alist(m: BitMatrix, path) -> None:
    """Write ``m`` in alist text form (canonical zero-padded variant)."""
    arr = m.to_array()
    rows, cols = arr.shape
    col_deg = arr.sum(axis=0)
    row_deg = arr.sum(axis=1)
    max_col = int(col_deg.max(initial=0))
    max_row = int(row_deg.max(initial=0))
    out = [f"{cols} {rows}", f"{max_col} {max_row}"]
    out.append(" ".join(str(int(d)) for d in col_deg))
    out.append(" ".join(str(int(d)) for d in row_deg))
    for c in range(cols):
        idx = [str(int(r) + 1) for r in np.nonzero(arr[:, c])[0]]
        idx += ["0"] * (max_col - len(idx))
        out.append(" ".join(idx))
    for r in range(rows):
        idx = [str(int(c) + 1) for c in np.nonzero(arr[r])[0]]
        idx += ["0"] * (max_row - len(idx))
        out.append(" ".join(idx))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(out) + "\n")
