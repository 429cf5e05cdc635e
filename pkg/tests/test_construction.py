"""Base matrices, masking, CPM dispersion, alist and bit packing."""

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import H3_PRINTED
from qcpag import alist, errors
from qcpag.base import (
    MASKED,
    BaseMatrix,
    MaskingMatrix,
    Origin,
    build_cyclic_base,
    build_prime_base,
    is_prime,
    latin_square_view,
    mask,
    parse_index_spec,
    prime_power_base,
    random_indices,
    select_submatrix,
)
from qcpag.binary import as_dense, pack_rows, unpack_rows
from qcpag.dispersion import (
    ZERO,
    QcBinaryMatrix,
    disperse,
    expand_block,
    expand_generators,
    generator_rows,
    qc_structure_check,
    section_shift,
)

small_primes = st.sampled_from([2, 3, 5, 7, 11, 13])


def test_prime_base_entries():
    B = build_prime_base(5)
    assert B.origin is Origin.PRIME_FIELD
    for i in range(5):
        for j in range(5):
            assert B[i, j] == (i * j) % 5


def test_dispersion_matches_printed_matrix():
    assert np.array_equal(disperse(build_prime_base(3)).to_dense(), H3_PRINTED)


def test_cpm_convention():
    P = expand_block(1, 4)
    assert P[0, 1] == 1 and P[3, 0] == 1 and P.sum() == 4


@pytest.mark.parametrize("bad", [0, 1, 4, 9, 15])
def test_non_prime_rejected(bad):
    with pytest.raises(errors.NotPrimeError):
        build_prime_base(bad)


def test_cyclic_base_checks():
    assert build_cyclic_base(128, 127).shape == (127, 127)
    assert build_cyclic_base(8, 7) == build_prime_base(7)  # same exponent grid
    with pytest.raises(errors.DoesNotDivideError):
        build_cyclic_base(16, 7)
    with pytest.raises(errors.QcpagError):
        build_cyclic_base(12, 11)
    with pytest.raises(errors.NotPrimeError):
        build_cyclic_base(16, 15)


@pytest.mark.parametrize("q,p", [(2, 2), (8, 2), (9, 3), (125, 5), (128, 2), (6, None), (1, None), (12, None)])
def test_prime_power(q, p):
    assert prime_power_base(q) == p


@given(st.integers(0, 2000))
def test_is_prime_oracle(n):
    assert is_prime(n) == (n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1)))


@settings(max_examples=30, deadline=None)
@given(small_primes.filter(lambda p: p > 2))
def test_latin_square(p):
    L = latin_square_view(build_prime_base(p))
    want = set(range(1, p))
    assert all(set(row) == want for row in L)
    assert all(set(col) == want for col in L.T)


def test_latin_square_needs_full_base():
    B = select_submatrix(build_prime_base(5), [0, 1], [0, 1, 2])
    with pytest.raises(errors.WrongOriginError):
        latin_square_view(B)


def test_select_submatrix_errors():
    B = build_prime_base(5)
    with pytest.raises(errors.IndexOutOfRangeError):
        select_submatrix(B, [5], [0])
    with pytest.raises(errors.DuplicateIndexError):
        select_submatrix(B, [1, 1], [0])


def test_random_indices_reproducible():
    B = build_prime_base(11)
    assert random_indices(B, 3, 5, seed=4) == random_indices(B, 3, 5, seed=4)
    rows, cols = random_indices(B, 3, 5, seed=4)
    assert len(set(rows)) == 3 and len(set(cols)) == 5 and rows == sorted(rows)


def test_mask_and_errors():
    B = build_prime_base(3)
    Z = MaskingMatrix(np.array([[1, 0, 1], [1, 1, 0], [0, 1, 1]]))
    M = mask(B, Z)
    assert M.origin is Origin.MASKED and M.n_masked == 3 and M[0, 1] is None
    H = disperse(M)
    assert H.has_zero_blocks and (H.column_weights() == 2).all()
    with pytest.raises(errors.DimensionMismatchError):
        mask(B, MaskingMatrix(np.ones((2, 3), dtype=int)))
    with pytest.raises(errors.DisconnectedMaskError):
        mask(B, MaskingMatrix(np.array([[1, 1, 1], [0, 0, 0], [1, 1, 1]])))


def test_masking_text():
    Z = MaskingMatrix.from_text("# comment\n1 0\n0 1\n")
    assert Z.n_zeros == 2
    assert MaskingMatrix.from_text(Z.to_text()).entries.tolist() == [[1, 0], [0, 1]]
    with pytest.raises(errors.FormatError):
        MaskingMatrix.from_text("1 0\n1\n")


def test_base_text_roundtrip(tmp_path):
    B = mask(build_prime_base(5), MaskingMatrix(np.eye(5, dtype=int) ^ 1))
    p = tmp_path / "b.base"
    B.save(p)
    C = BaseMatrix.load(p)
    assert C == B and C.origin is Origin.MASKED
    assert "*" in p.read_text()
    with pytest.raises(errors.FormatError):
        BaseMatrix.from_text("5 2 2\n0 1\n1 0\n")
    with pytest.raises(errors.FormatError):
        BaseMatrix.from_text("5 2 2 PrimeField\n0 1\n")


def test_masked_entries_need_masked_origin():
    with pytest.raises(errors.QcpagError):
        BaseMatrix(np.array([[MASKED, 1]]), 3, Origin.SUBMATRIX)


@pytest.mark.parametrize("spec,want", [("1..6", [1, 2, 3, 4, 5, 6]), ("0,3,5", [0, 3, 5]), ("1..3,7", [1, 2, 3, 7])])
def test_parse_index_spec(spec, want):
    assert parse_index_spec(spec) == want


@st.composite
def shift_grids(draw):
    t = draw(st.integers(1, 9))
    k = draw(st.integers(1, 4))
    r = draw(st.integers(1, 5))
    vals = draw(st.lists(st.integers(-1, t - 1), min_size=k * r, max_size=k * r))
    return QcBinaryMatrix(np.array(vals).reshape(k, r), t)


@settings(max_examples=60, deadline=None)
@given(shift_grids())
def test_dispersion_views_agree(H):
    D = H.to_dense()
    t = H.block_order
    assert np.array_equal(H.to_csr().toarray(), D)
    for i in range(H.block_rows):
        for j in range(H.block_cols):
            s = H.shifts[i, j]
            want = np.zeros((t, t), np.uint8) if s == ZERO else expand_block(int(s), t)
            assert np.array_equal(D[i * t:(i + 1) * t, j * t:(j + 1) * t], want)
    assert np.array_equal(unpack_rows(H.packed_rows(), D.shape[1]), D)


@settings(max_examples=60, deadline=None)
@given(shift_grids())
def test_qc_structure_roundtrip(H):
    R = qc_structure_check(H.to_csr(), H.block_order)
    assert np.array_equal(R.shifts, H.shifts)


@settings(max_examples=60, deadline=None)
@given(shift_grids())
def test_generator_rows_roundtrip(H):
    G = generator_rows(H)
    assert np.array_equal(expand_generators(G).shifts, H.shifts)
    t = H.block_order
    # row u of each block-row is the generator shifted section-wise u times
    D = H.to_dense()
    for bi in range(H.block_rows):
        row = G.rows[bi]
        for u in range(t):
            assert np.array_equal(D[bi * t + u], row)
            row = section_shift(row, t)


def test_qc_structure_check_rejects():
    D = disperse(build_prime_base(3)).to_dense()
    D[0, 0] ^= 1
    with pytest.raises(errors.NotBlockStructuredError) as ei:
        qc_structure_check(D, 3)
    assert ei.value.block == (0, 0)
    with pytest.raises(errors.DimensionMismatchError):
        qc_structure_check(D, 4)


def test_section_weight_exceeded():
    from qcpag.dispersion import GeneratorRows

    with pytest.raises(errors.SectionWeightExceededError):
        expand_generators(GeneratorRows(np.array([[1, 1, 0, 0, 0, 1]]), 3))


def test_shift_range_checked():
    with pytest.raises(errors.ShiftOutOfRangeError):
        QcBinaryMatrix(np.array([[3]]), 3)
    with pytest.raises(errors.ShiftOutOfRangeError):
        expand_block(-1, 3)


def test_to_base_matrix_roundtrip():
    B = build_prime_base(7)
    assert disperse(B).to_base_matrix() == B


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(1, 150), st.integers(0, 2**32 - 1))
def test_alist_roundtrip(m, n, seed):
    rng = np.random.default_rng(seed)
    D = (rng.random((m, n)) < 0.2).astype(np.uint8)
    H = alist.loads(alist.dumps(D))
    assert np.array_equal(H.toarray(), D)


def test_alist_file_and_errors(tmp_path):
    p = tmp_path / "h.alist"
    alist.write(H3_PRINTED, p)
    assert np.array_equal(alist.read(p).toarray(), H3_PRINTED)
    text = p.read_text().splitlines()
    with pytest.raises(errors.FormatError):
        alist.loads("\n".join(text[:3]))
    bad = list(text)
    bad[4] = "1 2"  # fewer entries than the declared degree
    with pytest.raises(errors.FormatError):
        alist.loads("\n".join(bad))
    bad = list(text)
    bad[4] = "1 4 99"  # row index out of range
    with pytest.raises(errors.FormatError):
        alist.loads("\n".join(bad))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(1, 200), st.integers(0, 2**32 - 1))
def test_pack_unpack(m, n, seed):
    D = (np.random.default_rng(seed).random((m, n)) < 0.5).astype(np.uint8)
    P = pack_rows(D)
    assert P.dtype == np.uint64 and P.shape == (m, (n + 63) // 64)
    assert np.array_equal(unpack_rows(P, n), D)
    # LSB-first: bit j of word 0 is column j
    assert int(P[0, 0]) & 1 == D[0, 0]


def test_as_dense_accepts_sparse():
    S = sp.csr_matrix(H3_PRINTED)
    assert np.array_equal(as_dense(S), H3_PRINTED)
