import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gldpc_pc.errors import DegenerateCode, LengthMismatch, ParseError, RankDeficient
from gldpc_pc.gf2 import (
    BitMatrix,
    generator_from_pcm,
    load_alist,
    rank,
    row_basis,
    save_alist,
    systematic_generator,
    to_systematic,
)


def ref_rank(arr):
    """Independent elimination oracle over python ints."""
    rows = [int("".join(str(b) for b in r), 2) if r.any() else 0 for r in arr]
    r = 0
    for col in range(arr.shape[1]):
        bit = 1 << (arr.shape[1] - 1 - col)
        piv = next((i for i in range(r, len(rows)) if rows[i] & bit), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= rows[r]
        r += 1
    return r


def row_space(arr):
    """All GF(2) combinations of the rows (small matrices only)."""
    span = {(0,) * arr.shape[1]}
    for row in arr:
        span |= {tuple((np.array(v) ^ row).tolist()) for v in span}
    return span


def test_rank_identity():
    assert rank(BitMatrix.identity(4)) == 4


def test_rank_duplicated_row():
    assert rank(BitMatrix.from_array([[1, 1], [1, 1]])) == 1


def test_rank_polar_8_4_pcm():
    # parity checks of the (8,4) polar code: transform columns 0,1,2,4
    idx = np.arange(8)
    h = np.array([((idx & f) == f).astype(np.uint8) for f in (0, 1, 2, 4)])
    m = BitMatrix.from_array(h)
    assert rank(m) == ref_rank(h) == 4


def test_get_set_round_trip():
    m = BitMatrix.zeros(3, 70)  # spans two words per row
    m.set(1, 0, 1)
    m.set(1, 69, 1)
    m.set(2, 64, 1)
    arr = m.to_array()
    assert arr[1, 0] == 1 and arr[1, 69] == 1 and arr[2, 64] == 1
    assert arr.sum() == 3
    assert m.get(1, 69) == 1 and m.get(0, 69) == 0


def test_to_systematic_single_row():
    hs, perm = to_systematic(BitMatrix.from_array([[1, 1, 1]]))
    arr = hs.to_array()
    assert arr.shape == (1, 3)
    assert arr[0, -1] == 1  # identity block in the last column
    assert sorted(perm.tolist()) == [0, 1, 2]


def test_to_systematic_already_systematic():
    m = BitMatrix.from_array([[1, 0, 1, 0], [1, 1, 0, 1]])
    hs, perm = to_systematic(m)
    arr = hs.to_array()
    assert np.array_equal(arr[:, 2:], np.eye(2, dtype=np.uint8))
    assert np.array_equal(perm, [0, 1, 2, 3])
    assert hs == m


def test_to_systematic_two_rows():
    m = BitMatrix.from_array([[1, 1, 0], [0, 1, 1]])
    hs, perm = to_systematic(m)
    arr = hs.to_array()
    assert np.array_equal(arr[:, 1:], np.eye(2, dtype=np.uint8))
    assert np.array_equal(arr[:, 0], [1, 1])
    # row space preserved once columns are un-permuted
    unperm = np.zeros_like(arr)
    unperm[:, perm] = arr
    assert row_space(unperm) == row_space(m.to_array())


def test_to_systematic_rank_deficient():
    with pytest.raises(RankDeficient) as info:
        to_systematic(BitMatrix.from_array([[1, 1, 0], [1, 1, 0]]))
    assert info.value.rank == 1


def test_generator_single_check():
    h = BitMatrix.from_array([[1, 1, 1]])
    g = generator_from_pcm(h)
    assert g.rows == 2
    prod = g @ h.transpose()
    assert not prod.to_array().any()


def test_generator_degenerate():
    with pytest.raises(DegenerateCode):
        generator_from_pcm(BitMatrix.identity(3))


def test_generator_polar_8_4_codebook():
    idx = np.arange(8)
    h = BitMatrix.from_array(
        np.array([((idx & f) == f).astype(np.uint8) for f in (0, 1, 2, 4)])
    )
    g = generator_from_pcm(h)
    assert g.rows == 4
    # row space of G == the polar codebook (all words killed by H)
    words = ((np.arange(256)[:, None] >> np.arange(8)[None, ::-1]) & 1).astype(np.uint8)
    codebook = {tuple(w.tolist()) for w in words if not h.mat_vec(w).any()}
    assert row_space(g.to_array()) == codebook


def test_systematic_generator_positions():
    h = BitMatrix.from_array([[1, 1, 0, 1], [0, 1, 1, 0]])
    g, perm = systematic_generator(h)
    arr = g.to_array()
    for i, pos in enumerate(perm[: g.rows]):
        col = arr[:, pos]
        expect = np.zeros(g.rows, dtype=np.uint8)
        expect[i] = 1
        assert np.array_equal(col, expect)


def test_row_basis_drops_dependent_rows():
    m = BitMatrix.from_array([[1, 0, 1], [0, 1, 1], [1, 1, 0]])
    b = row_basis(m)
    assert b.rows == 2
    assert row_space(b.to_array()) == row_space(m.to_array())


def test_matmul_shape_mismatch():
    a = BitMatrix.identity(3)
    b = BitMatrix.identity(4)
    with pytest.raises(LengthMismatch):
        a @ b


def test_alist_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    m = BitMatrix.from_array(rng.integers(0, 2, size=(4, 8), dtype=np.uint8))
    path = tmp_path / "m.alist"
    save_alist(m, path)
    assert load_alist(path) == m


def test_alist_hand_written(tmp_path):
    path = tmp_path / "ones.alist"
    path.write_text("3 1\n1 3\n1 1 1\n3\n1\n1\n1\n1 2 3\n")
    m = load_alist(path)
    assert (m.to_array() == np.ones((1, 3), dtype=np.uint8)).all()


def test_alist_inconsistent_header(tmp_path):
    path = tmp_path / "bad.alist"
    # column 0 claims degree 2 but lists a single entry
    path.write_text("2 2\n2 2\n2 1\n2 1\n1 0\n1 0\n1 2\n1 0\n")
    with pytest.raises(ParseError) as info:
        load_alist(path)
    assert info.value.line >= 1


def test_alist_zero_padding_read(tmp_path):
    rng = np.random.default_rng(3)
    arr = rng.integers(0, 2, size=(5, 9), dtype=np.uint8)
    arr[:, 0] = 0  # a zero column exercises degree-0 padding
    m = BitMatrix.from_array(arr)
    path = tmp_path / "m.alist"
    save_alist(m, path)
    assert load_alist(path) == m


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 32), st.integers(1, 32))
def test_rank_equals_transpose_rank(seed, rows, cols):
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, 2, size=(rows, cols), dtype=np.uint8)
    m = BitMatrix.from_array(arr)
    assert rank(m) == rank(m.transpose()) == ref_rank(arr)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_generator_annihilates_random_pcm(seed):
    rng = np.random.default_rng(seed)
    rows = int(rng.integers(1, 6))
    cols = int(rng.integers(rows + 1, 14))
    arr = rng.integers(0, 2, size=(rows, cols), dtype=np.uint8)
    h = BitMatrix.from_array(arr)
    if rank(h) == cols:
        return  # dimension 0, covered by the degenerate test
    g = generator_from_pcm(h)
    assert not (g @ h.transpose()).to_array().any()
    assert rank(g) == g.rows


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_alist_random_round_trip(seed):
    import tempfile
    from pathlib import Path

    rng = np.random.default_rng(seed)
    rows = int(rng.integers(1, 10))
    cols = int(rng.integers(1, 20))
    m = BitMatrix.from_array(rng.integers(0, 2, size=(rows, cols), dtype=np.uint8))
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "m.alist"
        save_alist(m, path)
        assert load_alist(path) == m


def test_row_space_preserved_exhaustive_small():
    rng = np.random.default_rng(11)
    for _ in range(25):
        rows = int(rng.integers(1, 5))
        cols = int(rng.integers(rows, 12))
        arr = rng.integers(0, 2, size=(rows, cols), dtype=np.uint8)
        m = BitMatrix.from_array(arr)
        basis = row_basis(m)
        if basis.rows < m.rows:
            continue
        hs, perm = to_systematic(m)
        unperm = np.zeros_like(hs.to_array())
        unperm[:, perm] = hs.to_array()
        assert row_space(unperm) == row_space(arr)
