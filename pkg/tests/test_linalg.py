import numpy as np
import pytest

from sidecode.gf import FieldSpec
from sidecode.linalg import (
    RetryExhaustedError,
    SingularMatrixError,
    SparseMatrix,
    build_complement,
    invert,
    make_system,
    parse_matrix,
    permute_columns_full_rank_tail,
    q_map,
    rank,
    sample_sparse_full_rank,
    serialize_matrix,
)

from oracles import enum_vectors, matmul, matvec, rank_gf

GF2 = FieldSpec(2)
GF3 = FieldSpec(3)
GF5 = FieldSpec(5)


def dense(spec, rows):
    return SparseMatrix.from_dense(spec, np.array(rows))


class TestSparseMatrix:
    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            SparseMatrix(GF2, (1, 3), [[(0, 1), (0, 1)]])  # non-increasing
        with pytest.raises(ValueError):
            SparseMatrix(GF2, (1, 3), [[(0, 0)]])  # zero value stored
        with pytest.raises(ValueError):
            SparseMatrix(GF2, (1, 3), [[(3, 1)]])  # index out of range
        with pytest.raises(ValueError):
            SparseMatrix(GF2, (2, 3), [[(0, 1)]])  # row count mismatch

    def test_dense_round_trip(self):
        m = dense(GF3, [[0, 1, 2], [2, 0, 1]])
        assert np.array_equal(m.to_dense(), [[0, 1, 2], [2, 0, 1]])
        assert m.max_row_weight == 2

    def test_apply_identity(self):
        m = dense(GF2, np.eye(3, dtype=int))
        x = np.array([1, 0, 1])
        assert np.array_equal(m.apply(x), x)

    def test_apply_parity(self):
        m = dense(GF2, [[1, 1]])
        assert np.array_equal(m.apply([1, 1]), [0])

    def test_apply_hand_example(self):
        m = dense(GF2, [[1, 1], [0, 1]])
        assert np.array_equal(m.apply([1, 0]), [1, 0])

    def test_apply_length_mismatch(self):
        m = dense(GF2, [[1, 1]])
        with pytest.raises(ValueError):
            m.apply([1, 0, 1])

    def test_apply_matches_oracle(self):
        rng = np.random.default_rng(3)
        for p, spec in [(2, GF2), (3, GF3), (5, GF5)]:
            d = rng.integers(0, p, size=(3, 5))
            m = SparseMatrix.from_dense(spec, d)
            for _ in range(10):
                x = rng.integers(0, p, size=5)
                assert np.array_equal(m.apply(x), matvec(d, x, p))

    def test_column_slice(self):
        m = dense(GF3, [[1, 0, 2, 1], [0, 2, 0, 1]])
        s = m.column_slice(2)
        assert np.array_equal(s.to_dense(), [[2, 1], [0, 1]])

    def test_column(self):
        m = dense(GF3, [[1, 0, 2], [0, 2, 0]])
        assert np.array_equal(m.column(2), [2, 0])
        assert np.array_equal(m.column(1), [0, 2])


class TestRank:
    def test_identity(self):
        assert rank(dense(GF2, np.eye(2, dtype=int))) == 2

    def test_zero(self):
        assert rank(dense(GF2, np.zeros((3, 4), dtype=int))) == 0

    def test_dependent_rows(self):
        # rows sum to zero over GF(2), so rank drops to 2
        m = dense(GF2, [[1, 1, 0], [0, 1, 1], [1, 0, 1]])
        assert rank(m) == 2

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_oracle(self, seed):
        rng = np.random.default_rng(seed)
        p = int(rng.choice([2, 3, 5]))
        d = rng.integers(0, p, size=(rng.integers(1, 5), rng.integers(1, 6)))
        assert rank(SparseMatrix.from_dense(FieldSpec(p), d)) == rank_gf(d, p)


class TestInvert:
    def test_identity(self):
        m = dense(GF3, np.eye(3, dtype=int))
        assert np.array_equal(invert(m).to_dense(), np.eye(3, dtype=int))

    def test_self_inverse_gf2(self):
        m = dense(GF2, [[1, 1], [0, 1]])
        inv = invert(m)
        assert np.array_equal(inv.to_dense(), [[1, 1], [0, 1]])
        assert np.array_equal(matmul(m.to_dense(), inv.to_dense(), 2), np.eye(2, dtype=int))

    def test_diagonal_gf5(self):
        m = dense(GF5, [[2, 0], [0, 3]])
        assert np.array_equal(invert(m).to_dense(), [[3, 0], [0, 2]])

    def test_singular_rejected(self):
        with pytest.raises(SingularMatrixError):
            invert(dense(GF2, [[1, 1], [1, 1]]))

    def test_non_square_rejected(self):
        with pytest.raises(SingularMatrixError):
            invert(dense(GF2, [[1, 0, 1]]))

    @pytest.mark.parametrize("seed", range(6))
    def test_product_is_identity(self, seed):
        rng = np.random.default_rng(100 + seed)
        p = int(rng.choice([2, 3, 5]))
        n = int(rng.integers(2, 6))
        while True:
            d = rng.integers(0, p, size=(n, n))
            if rank_gf(d, p) == n:
                break
        inv = invert(SparseMatrix.from_dense(FieldSpec(p), d))
        assert np.array_equal(matmul(inv.to_dense(), d, p), np.eye(n, dtype=int))


class TestPermuteTail:
    def test_already_invertible_right_block(self):
        a = dense(GF2, [[1, 0, 1, 0], [0, 1, 0, 1]])
        ap, perm = permute_columns_full_rank_tail(a)
        assert np.array_equal(perm, np.arange(4))
        assert ap == a

    def test_forced_swap(self):
        a = dense(GF2, [[1, 0]])
        ap, perm = permute_columns_full_rank_tail(a)
        assert np.array_equal(ap.to_dense(), [[0, 1]])
        assert np.array_equal(perm, [1, 0])

    def test_rank_deficient_rejected(self):
        with pytest.raises(SingularMatrixError):
            permute_columns_full_rank_tail(dense(GF2, [[1, 1], [1, 1]]))

    @pytest.mark.parametrize("seed", range(5))
    def test_right_block_invertible_random(self, seed):
        a = sample_sparse_full_rank(6, 3, 2, seed=seed, spec=GF2)
        ap, perm = permute_columns_full_rank_tail(a)
        tail = ap.to_dense()[:, 3:]
        assert rank_gf(tail, 2) == 3

    @pytest.mark.parametrize("seed", range(5))
    def test_codeword_preserved(self, seed):
        # (AS)(S^{-1} x) = A x for every x
        a = sample_sparse_full_rank(5, 2, 3, seed=seed, spec=GF3)
        ap, perm = permute_columns_full_rank_tail(a)
        for x in enum_vectors(3, 5)[:50]:
            assert np.array_equal(ap.apply(x[perm]), a.apply(x))


class TestBuildComplement:
    def test_minimal_swap_system(self):
        a = dense(GF2, [[0, 1]])
        sys = build_complement(a)
        assert np.array_equal(sys.B.to_dense(), [[1, 0]])
        assert np.array_equal(sys.stacked, [[0, 1], [1, 0]])
        assert sys.ordered

    def test_q_inverts_exhaustively(self):
        a, _ = permute_columns_full_rank_tail(sample_sparse_full_rank(4, 2, 3, seed=5, spec=GF2))
        sys = build_complement(a)
        for x in enum_vectors(2, 4):
            c1 = sys.encode(x)
            c0 = sys.B.apply(x)
            assert np.array_equal(q_map(sys, c1, c0), x)

    def test_complement_is_source_prefix(self):
        a, _ = permute_columns_full_rank_tail(sample_sparse_full_rank(5, 2, 3, seed=9, spec=GF2))
        sys = build_complement(a)
        for x in enum_vectors(2, 5):
            assert np.array_equal(sys.B.apply(x), x[:3])

    def test_full_rate_boundary(self):
        # l = n: B is empty and Q is plain matrix inversion
        d = np.array([[1, 1], [0, 1]])
        sys = build_complement(dense(GF2, d))
        assert sys.B.shape == (0, 2)
        for x in enum_vectors(2, 2):
            c1 = sys.encode(x)
            assert np.array_equal(q_map(sys, c1, np.array([], dtype=np.int64)), x)

    def test_bad_tail_rejected(self):
        with pytest.raises(SingularMatrixError):
            build_complement(dense(GF2, [[1, 0]]))


class TestQMap:
    def test_zero_maps_to_zero(self):
        a, _ = permute_columns_full_rank_tail(sample_sparse_full_rank(4, 2, 2, seed=2, spec=GF2))
        sys = build_complement(a)
        z = q_map(sys, np.zeros(2, dtype=np.int64), np.zeros(2, dtype=np.int64))
        assert np.array_equal(z, np.zeros(4, dtype=np.int64))

    @pytest.mark.parametrize("p,n,l,seed", [(2, 4, 2, 0), (3, 4, 2, 1), (2, 6, 3, 2)])
    def test_bijection_exhaustive(self, p, n, l, seed):
        spec = FieldSpec(p)
        a, _ = permute_columns_full_rank_tail(sample_sparse_full_rank(n, l, 3, seed=seed, spec=spec))
        sys = build_complement(a)
        seen = set()
        for x in enum_vectors(p, n):
            pair = (tuple(sys.encode(x)), tuple(sys.B.apply(x)))
            assert pair not in seen
            seen.add(pair)
            assert np.array_equal(q_map(sys, np.array(pair[0]), np.array(pair[1])), x)
        assert len(seen) == p ** n

    def test_tail_recovery_matches_full_solve(self):
        # recovering the tail through the inverse of the right block agrees
        # with the full stacked-inverse solve
        spec = GF3
        a, _ = permute_columns_full_rank_tail(sample_sparse_full_rank(5, 2, 3, seed=4, spec=spec))
        sys = build_complement(a)
        n, l = 5, 2
        a_dense = a.to_dense()
        tail_inv = invert(SparseMatrix.from_dense(spec, a_dense[:, n - l:])).to_dense()
        for x in enum_vectors(3, 5)[:40]:
            c1 = sys.encode(x)
            c0 = sys.B.apply(x)
            c1_prime = (c1 - matvec(a_dense[:, :n - l], x[:n - l], 3)) % 3
            tail = matvec(tail_inv, c1_prime, 3)
            assert np.array_equal(tail, q_map(sys, c1, c0)[n - l:])


class TestMakeSystem:
    def test_non_ordered_indices(self):
        # codeword symbols interleaved at positions 1 and 3
        stacked = np.array([[1, 0, 0, 0],
                            [1, 1, 0, 0],
                            [0, 0, 1, 0],
                            [1, 1, 1, 1]])
        a = SparseMatrix.from_dense(GF2, stacked[[1, 3]])
        b = SparseMatrix.from_dense(GF2, stacked[[0, 2]])
        sys = make_system(a, b, I1=[1, 3])
        assert not sys.ordered
        assert np.array_equal(sys.stacked, stacked)
        for x in enum_vectors(2, 4):
            c = sys.extended_codeword(x)
            assert np.array_equal(c[sys.I1], a.apply(x))
            assert np.array_equal(c[sys.I0], b.apply(x))
            assert np.array_equal(q_map(sys, a.apply(x), b.apply(x)), x)

    def test_singular_stack_rejected(self):
        a = dense(GF2, [[1, 1]])
        b = dense(GF2, [[1, 1]])
        with pytest.raises(SingularMatrixError):
            make_system(a, b)


class TestSampler:
    def test_full_rate_weight_one_is_permutation(self):
        m = sample_sparse_full_rank(5, 5, 1, seed=0, spec=GF3)
        d = m.to_dense()
        assert rank_gf(d, 3) == 5
        assert all((row != 0).sum() == 1 for row in d)
        assert all((col != 0).sum() == 1 for col in d.T)

    def test_reported_rank(self):
        m = sample_sparse_full_rank(8, 4, 3, seed=1, spec=GF2)
        assert rank_gf(m.to_dense(), 2) == 4

    def test_deterministic(self):
        a = sample_sparse_full_rank(8, 4, 3, seed=42, spec=GF2)
        b = sample_sparse_full_rank(8, 4, 3, seed=42, spec=GF2)
        assert a == b

    def test_weight_bound_respected(self):
        m = sample_sparse_full_rank(10, 5, 2, seed=3, spec=GF5)
        assert m.max_row_weight <= 2

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            sample_sparse_full_rank(4, 5, 2, seed=0)
        with pytest.raises(ValueError):
            sample_sparse_full_rank(4, 2, 0, seed=0)

    def test_retry_exhaustion(self):
        with pytest.raises(RetryExhaustedError):
            sample_sparse_full_rank(40, 40, 1, seed=0, spec=GF2, max_attempts_per_row=1)


class TestFileFormat:
    def test_round_trip_identity(self):
        m = sample_sparse_full_rank(8, 4, 3, seed=7, spec=GF5)
        text = serialize_matrix(m)
        again = parse_matrix(text)
        assert again == m
        assert serialize_matrix(again) == text

    def test_format_shape(self):
        m = dense(GF3, [[0, 1, 2], [2, 0, 0]])
        assert serialize_matrix(m) == "3 2 3\n2 1:1 2:2\n1 0:2\n"

    def test_parse_errors(self):
        with pytest.raises(ValueError):
            parse_matrix("")
        with pytest.raises(ValueError):
            parse_matrix("2 1 3\n2 0:1\n")  # wrong entry count
        with pytest.raises(ValueError):
            parse_matrix("4 1 2\n1 0:1\n")  # composite field order
