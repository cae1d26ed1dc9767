import numpy as np
import pytest

from sidecode.decoders import ConditionalModel, EnumerationBudgetError, decode_sc, decode_ssc
from sidecode.gf import FieldSpec
from sidecode.linalg import (
    SparseMatrix,
    build_complement,
    invert,
    make_system,
    permute_columns_full_rank_tail,
    sample_sparse_full_rank,
)
from sidecode.source import noiseless_law, random_law, symmetric_channel_law
from sidecode.sumproduct import (
    FactorGraph,
    conditional_sp,
    reduce_conditional_equivalence_check,
    run_sc_ssc_algorithm,
    stage_conditional_exact,
)

import oracles

GF2 = FieldSpec(2)
GF3 = FieldSpec(3)


def ordered_system(n, l, w, seed, spec=GF2):
    a = sample_sparse_full_rank(n, l, w, seed=seed, spec=spec)
    ap, _ = permute_columns_full_rank_tail(a)
    return build_complement(ap)


def chain_matrix(spec, m, rng):
    """Bidiagonal rows -> the factor graph is a path, hence cycle-free."""
    d = np.zeros((m - 1, m), dtype=np.int64)
    for r in range(m - 1):
        d[r, r] = rng.integers(1, spec.p)
        d[r, r + 1] = rng.integers(1, spec.p)
    return SparseMatrix.from_dense(spec, d)


class TestConditionalSp:
    @pytest.mark.parametrize("trial", range(12))
    def test_exact_on_trees(self, trial):
        rng = np.random.default_rng(trial)
        spec = FieldSpec(int(rng.choice([2, 3])))
        m = int(rng.integers(4, 11))
        a = chain_matrix(spec, m, rng)
        law = random_law(spec, 2, seed=trial)
        y = rng.integers(0, 2, m)
        priors = law.cond_x_given_y[:, y].T
        x_star = rng.integers(0, spec.p, m)
        syndrome = a.apply(x_star)
        exact, _ = stage_conditional_exact(a, priors, syndrome)
        belief, zero = conditional_sp(a, priors, syndrome, iterations=2 * m)
        assert not zero
        assert np.abs(belief - exact).max() < 1e-9

    def test_unconstrained_belief_is_prior(self):
        # no check rows at all: belief must be the per-symbol posterior
        a = SparseMatrix(GF2, (0, 3), [])
        law = random_law(GF2, 2, seed=5)
        y = np.array([0, 1, 0])
        priors = law.cond_x_given_y[:, y].T
        belief, zero = conditional_sp(a, priors, np.array([], dtype=np.int64), 1)
        assert not zero
        assert np.allclose(belief, priors[0], atol=1e-15)

    def test_single_parity_check_two_variables(self):
        # x0 + x1 = s over GF(2): uniform partner -> uniform belief;
        # biased partner -> belief is the (possibly flipped) bias
        a = SparseMatrix.from_dense(GF2, [[1, 1]])
        uniform = np.array([[0.5, 0.5], [0.5, 0.5]])
        for s in (0, 1):
            belief, _ = conditional_sp(a, uniform, np.array([s]), 5)
            assert np.allclose(belief, 0.5)
        biased = np.array([[0.5, 0.5], [0.8, 0.2]])
        belief0, _ = conditional_sp(a, biased, np.array([0]), 5)
        assert np.allclose(belief0, [0.8, 0.2])
        belief1, _ = conditional_sp(a, biased, np.array([1]), 5)
        assert np.allclose(belief1, [0.2, 0.8])

    def test_messages_stay_normalized(self):
        rng = np.random.default_rng(3)
        a = sample_sparse_full_rank(6, 3, 3, seed=2, spec=GF3)
        law = random_law(GF3, 2, seed=3)
        y = rng.integers(0, 2, 6)
        graph = FactorGraph(a, law.cond_x_given_y[:, y].T, np.array([1, 0, 2]))
        beliefs, _ = graph.run(iterations=4)
        assert np.allclose(beliefs.sum(axis=1), 1.0)
        assert (beliefs >= 0).all()

    def test_belief_invariant_under_check_order(self):
        rng = np.random.default_rng(4)
        a_dense = rng.integers(0, 2, size=(3, 6))
        a_dense[:, 0] = [1, 0, 1]
        law = random_law(GF2, 2, seed=7)
        y = rng.integers(0, 2, 6)
        priors = law.cond_x_given_y[:, y].T
        syn = np.array([0, 1, 1])
        b1, _ = conditional_sp(SparseMatrix.from_dense(GF2, a_dense), priors, syn, 8)
        perm = [2, 0, 1]
        b2, _ = conditional_sp(SparseMatrix.from_dense(GF2, a_dense[perm]),
                               priors, syn[perm], 8)
        assert np.allclose(b1, b2, atol=1e-12)

    def test_zero_support_flag_on_infeasible_empty_check(self):
        a = SparseMatrix.from_dense(GF2, [[0, 0], [1, 1]])
        priors = np.array([[0.5, 0.5], [0.5, 0.5]])
        _, zero = conditional_sp(a, priors, np.array([1, 0]), 2)
        assert zero

    def test_stage_budget(self):
        a = SparseMatrix(GF2, (0, 20), [])
        priors = np.full((20, 2), 0.5)
        with pytest.raises(EnumerationBudgetError):
            stage_conditional_exact(a, priors, np.array([], dtype=np.int64))


class TestSyndromeRecursion:
    @pytest.mark.parametrize("seed", range(4))
    def test_solution_sets_agree(self, seed):
        # the suffix system A_j^n x = c'(j) has exactly the coset suffixes
        sys = ordered_system(6, 3, 3, seed=seed)
        a_dense = sys.A.to_dense()
        rng = np.random.default_rng(seed)
        x_star = rng.integers(0, 2, 6)
        c1 = sys.encode(x_star)
        for j in range(1, 4):
            prefix = x_star[:j]
            syndrome = (c1 - a_dense[:, :j] @ prefix) % 2
            suffix_solutions = {
                tuple(s) for s in oracles.enum_vectors(2, 6 - j)
                if np.array_equal(oracles.matvec(a_dense[:, j:], s, 2), syndrome)}
            coset_suffixes = {
                tuple(x[j:]) for x in oracles.coset_members(a_dense, c1, 2)
                if np.array_equal(x[:j], prefix)}
            assert suffix_solutions == coset_suffixes

    def test_recursive_column_delete_equals_fresh_slice(self):
        a = sample_sparse_full_rank(8, 4, 3, seed=11, spec=GF3)
        current = a
        for j in range(1, 8):
            current = current.column_slice(1)
            assert current == a.column_slice(j)


class TestRunAlgorithm:
    def test_requires_vi_structure(self):
        # complement with a permuted (non-identity) left block is rejected
        stacked = np.array([[1, 1, 0], [0, 1, 0], [1, 0, 1]])
        a = SparseMatrix.from_dense(GF2, stacked[:1])
        b = SparseMatrix.from_dense(GF2, stacked[1:][::-1])
        sys = make_system(a, b)
        law = symmetric_channel_law(GF2, 0.1)
        with pytest.raises(ValueError):
            run_sc_ssc_algorithm(sys, law, np.array([0]), np.zeros(3, dtype=np.int64))

    def test_full_rate_skips_loop(self):
        d = np.array([[1, 1], [0, 1]])
        sys = build_complement(SparseMatrix.from_dense(GF2, d))
        law = symmetric_channel_law(GF2, 0.3)
        a_inv = invert(sys.A).to_dense()
        for c1 in oracles.enum_vectors(2, 2):
            res = run_sc_ssc_algorithm(sys, law, c1, np.zeros(2, dtype=np.int64))
            assert np.array_equal(res.x_hat, oracles.matvec(a_inv, c1, 2))

    def test_noiseless_sparse_sp_one_iteration(self):
        sys = ordered_system(8, 4, 3, seed=1)
        law = noiseless_law(GF2)
        rng = np.random.default_rng(2)
        for _ in range(20):
            x = rng.integers(0, 2, 8)
            res = run_sc_ssc_algorithm(sys, law, sys.encode(x), x,
                                       method="sum-product", iterations=1)
            assert np.array_equal(res.x_hat, x)

    @pytest.mark.parametrize("p,seed", [(2, 0), (2, 1), (3, 2)])
    def test_exact_mode_equals_decode_sc_everywhere(self, p, seed):
        spec = FieldSpec(p)
        sys = ordered_system(4, 2, 3, seed=seed, spec=spec)
        law = random_law(spec, 2, seed=seed + 40)
        model = ConditionalModel(sys, law)
        for c1 in oracles.enum_vectors(p, 2):
            for y in oracles.enum_vectors(2, 4):
                a = decode_sc(model, c1, y).x_hat
                b = run_sc_ssc_algorithm(sys, law, c1, y, method="exact").x_hat
                assert np.array_equal(a, b)

    def test_exact_mode_equals_decode_ssc_same_seed(self):
        sys = ordered_system(4, 2, 3, seed=3)
        law = random_law(GF2, 2, seed=43)
        model = ConditionalModel(sys, law)
        rng = np.random.default_rng(5)
        for trial in range(20):
            c1 = rng.integers(0, 2, 2)
            y = rng.integers(0, 2, 4)
            a = decode_ssc(model, c1, y, seed=trial).x_hat
            b = run_sc_ssc_algorithm(sys, law, c1, y, mode="stochastic",
                                     method="exact", seed=trial).x_hat
            assert np.array_equal(a, b)

    def test_stochastic_deterministic_given_seed(self):
        sys = ordered_system(6, 3, 3, seed=4)
        law = symmetric_channel_law(GF2, 0.2)
        c1 = np.array([1, 0, 1])
        y = np.array([0, 1, 1, 0, 0, 1])
        a = run_sc_ssc_algorithm(sys, law, c1, y, mode="stochastic",
                                 method="sum-product", seed=17)
        b = run_sc_ssc_algorithm(sys, law, c1, y, mode="stochastic",
                                 method="sum-product", seed=17)
        assert np.array_equal(a.x_hat, b.x_hat)

    def test_bad_arguments(self):
        sys = ordered_system(4, 2, 3, seed=1)
        law = symmetric_channel_law(GF2, 0.1)
        with pytest.raises(ValueError):
            run_sc_ssc_algorithm(sys, law, np.zeros(2), np.zeros(4), mode="sometimes")
        with pytest.raises(ValueError):
            run_sc_ssc_algorithm(sys, law, np.zeros(2), np.zeros(4), method="magic")
        with pytest.raises(ValueError):
            run_sc_ssc_algorithm(sys, law, np.zeros(3), np.zeros(4))


class TestSmapSumProduct:
    def test_exact_on_tree_structured_encoder(self):
        # staircase rows keep the coset graph cycle-free, so the beliefs are
        # the exact coordinate posteriors and the outputs must agree
        from sidecode.decoders import decode_smap
        from sidecode.linalg import make_system
        from sidecode.sumproduct import smap_sum_product

        rng = np.random.default_rng(8)
        dense = np.zeros((3, 4), dtype=np.int64)
        for r in range(3):
            dense[r, r] = 1
            dense[r, r + 1] = 1
        a = SparseMatrix.from_dense(GF2, dense)
        b = SparseMatrix.from_dense(GF2, np.array([[0, 0, 0, 1]]))
        sys = make_system(a, b, I1=[0, 1, 2])
        law = random_law(GF2, 2, seed=3)
        model = ConditionalModel(sys, law)
        for _ in range(20):
            c1 = rng.integers(0, 2, 3)
            y = rng.integers(0, 2, 4)
            want = decode_smap(model, c1, y).x_hat
            got = smap_sum_product(sys, law, c1, y, iterations=10).x_hat
            assert np.array_equal(want, got)

    def test_noiseless_recovery(self):
        from sidecode.sumproduct import smap_sum_product

        sys = ordered_system(8, 4, 3, seed=1)
        law = noiseless_law(GF2)
        rng = np.random.default_rng(4)
        for _ in range(10):
            x = rng.integers(0, 2, 8)
            got = smap_sum_product(sys, law, sys.encode(x), x, iterations=1)
            assert np.array_equal(got.x_hat, x)

    def test_validation(self):
        from sidecode.sumproduct import smap_sum_product

        sys = ordered_system(4, 2, 3, seed=1)
        law = symmetric_channel_law(GF2, 0.1)
        with pytest.raises(ValueError):
            smap_sum_product(sys, law, np.zeros(3), np.zeros(4))


class TestEquivalence:
    @pytest.mark.parametrize("seed", range(3))
    def test_small_gf2(self, seed):
        sys = ordered_system(4, 2, 3, seed=seed)
        law = random_law(GF2, 2, seed=seed + 60)
        assert reduce_conditional_equivalence_check(sys, law)

    def test_small_gf3(self):
        sys = ordered_system(4, 2, 3, seed=1, spec=GF3)
        law = random_law(GF3, 2, seed=61)
        assert reduce_conditional_equivalence_check(sys, law)

    def test_deterministic_law_point_masses(self):
        sys = ordered_system(4, 2, 3, seed=2)
        assert reduce_conditional_equivalence_check(sys, noiseless_law(GF2))
