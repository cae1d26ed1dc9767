"""Sum-product message passing for sparse encoders over GF(p).

At stage j of successive-cancellation decoding the conditional of the next
source symbol is a ratio of constrained sums

    sum over suffixes x_j..x_n with A_j^n x = c'_1(j)
    of the product of per-symbol posteriors mu(x_k | y_k),

where c'_1(j) is the running syndrome c1 - A_1^{j-1} x_1^{j-1}. For sparse
A this is the classic factor-graph marginalization: variable nodes are the
active suffix coordinates, check nodes are the rows of the active
sub-matrix, and check-node messages are cyclic convolutions over GF(p)
(computed directly in O(p^2) per symbol pair; no transform).

``run_sc_ssc_algorithm`` is the full decoding loop: compute the stage
conditional (exactly, or by message passing), decide the symbol (mode or
seeded draw), update the syndrome, and close with the inverse of the
rightmost l x l block of A once every free symbol is fixed.
"""

from __future__ import annotations

import numpy as np

from .decoders import DecodeResult, EnumerationBudgetError, StageDecision, _draw, \
    argmax_smallest, enumerate_vectors
from .linalg import ExtendedCodeSystem, SparseMatrix, invert_dense
from .source import JointSourceLaw

STAGE_EXACT_BUDGET = 2 ** 16


def _cyclic_convolve(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    out = np.zeros(p)
    for u in range(p):
        if a[u]:
            out += a[u] * np.roll(b, u)
    return out


def _coefficient_scale(dist: np.ndarray, coeff: int, p: int) -> np.ndarray:
    """Distribution of coeff * X when X ~ dist (coeff nonzero)."""
    inv = pow(int(coeff), p - 2, p)
    idx = (inv * np.arange(p)) % p
    return dist[idx]


def _normalize_message(m: np.ndarray) -> tuple[np.ndarray, bool]:
    total = m.sum()
    if total <= 0.0:
        return np.full(len(m), 1.0 / len(m)), True
    return m / total, False


class FactorGraph:
    """Factor graph for one stage: variables x_j..x_n, checks A_j^n x = s.

    Messages live on edges as probability vectors over X and stay
    normalized after every update (flooding schedule).
    """

    def __init__(self, matrix: SparseMatrix, priors: np.ndarray, syndrome: np.ndarray):
        l, m = matrix.shape
        priors = np.asarray(priors, dtype=np.float64)
        syndrome = np.asarray(syndrome, dtype=np.int64)
        if priors.shape != (m, matrix.spec.p):
            raise ValueError(f"priors must be {m} x {matrix.spec.p}")
        if syndrome.shape != (l,):
            raise ValueError(f"syndrome must have length {l}")
        self.matrix = matrix
        self.p = matrix.spec.p
        self.n_vars = m
        self.n_checks = l
        self.priors = np.array([_normalize_message(row)[0] for row in priors]) \
            if m else priors.reshape(0, self.p)
        self.syndrome = syndrome % self.p
        # edge lists: one entry per (check, position-in-row)
        self.check_vars = [matrix.row_index[r] for r in range(l)]
        self.check_coeffs = [matrix.row_value[r] for r in range(l)]
        self.var_checks: list[list[tuple[int, int]]] = [[] for _ in range(m)]
        for r in range(l):
            for pos, v in enumerate(self.check_vars[r]):
                self.var_checks[int(v)].append((r, pos))
        # empty check rows impose 0 == s_r with no edges to carry it
        self.infeasible = any(self.check_vars[r].size == 0 and self.syndrome[r] != 0
                              for r in range(l))

    def run(self, iterations: int) -> tuple[np.ndarray, np.ndarray]:
        """Flooding sum-product; returns (beliefs, zero_support flags)."""
        if iterations < 1:
            raise ValueError("iterations must be >= 1")
        p = self.p
        # var -> check messages, indexed like the check edge lists
        q = [np.array([self.priors[v] for v in self.check_vars[r]]).reshape(-1, p)
             for r in range(self.n_checks)]
        r_msg = [np.full((self.check_vars[r].size, p), 1.0 / p)
                 for r in range(self.n_checks)]
        for _ in range(iterations):
            # check -> var: leave-one-out convolution of the scaled neighbors
            for r in range(self.n_checks):
                deg = self.check_vars[r].size
                if deg == 0:
                    continue
                scaled = [_coefficient_scale(q[r][k], self.check_coeffs[r][k], p)
                          for k in range(deg)]
                prefix = [None] * (deg + 1)
                prefix[0] = np.zeros(p)
                prefix[0][0] = 1.0
                for k in range(deg):
                    prefix[k + 1] = _cyclic_convolve(prefix[k], scaled[k], p)
                suffix = [None] * (deg + 1)
                suffix[deg] = np.zeros(p)
                suffix[deg][0] = 1.0
                for k in range(deg - 1, -1, -1):
                    suffix[k] = _cyclic_convolve(suffix[k + 1], scaled[k], p)
                for k in range(deg):
                    others = _cyclic_convolve(prefix[k], suffix[k + 1], p)
                    coeff = int(self.check_coeffs[r][k])
                    targets = (self.syndrome[r] - coeff * np.arange(p)) % p
                    r_msg[r][k], _ = _normalize_message(others[targets])
            # var -> check: prior times all other incoming check messages
            for r in range(self.n_checks):
                for k, v in enumerate(self.check_vars[r]):
                    m = self.priors[int(v)].copy()
                    for (r2, k2) in self.var_checks[int(v)]:
                        if r2 == r and k2 == k:
                            continue
                        m = m * r_msg[r2][k2]
                    q[r][k], _ = _normalize_message(m)
        beliefs = np.zeros((self.n_vars, p))
        zero = np.zeros(self.n_vars, dtype=bool)
        for v in range(self.n_vars):
            b = self.priors[v].copy()
            for (r, k) in self.var_checks[v]:
                b = b * r_msg[r][k]
            beliefs[v], zero[v] = _normalize_message(b)
        if self.infeasible:
            zero[:] = True
        return beliefs, zero


def conditional_sp(matrix: SparseMatrix, priors: np.ndarray, syndrome: np.ndarray,
                   iterations: int) -> tuple[np.ndarray, bool]:
    """Sum-product approximation of the first active symbol's conditional.

    `matrix` is the active sub-matrix A_j^n, `priors` the per-coordinate
    posteriors mu(x_k | y_k) for the suffix, `syndrome` the running target
    c'_1(j). Returns (belief over X for the first variable, zero-support
    flag). Exact on cycle-free graphs once iterations reach the diameter.
    """
    graph = FactorGraph(matrix, priors, syndrome)
    beliefs, zero = graph.run(iterations)
    if graph.n_vars == 0:
        raise ValueError("no active variables")
    return beliefs[0], bool(zero[0])


def smap_sum_product(sys: ExtendedCodeSystem, law: JointSourceLaw, c1, y,
                     iterations: int = 20, want_trace: bool = False) -> DecodeResult:
    """Symbol-wise MAP via message passing on the full coset graph.

    One factor graph over all n source symbols with the rows of A as
    checks (the classic sparse-code decoder); each coordinate is set to
    the mode of its belief. Approximates the per-coordinate posteriors
    when the graph has cycles, and like its exact counterpart the output
    may fall outside the coset.
    """
    if sys.spec != law.spec:
        raise ValueError("system and law must share a field")
    c1 = np.asarray(c1, dtype=np.int64) % sys.spec.p
    y = np.asarray(y, dtype=np.int64)
    if c1.shape != (sys.l,):
        raise ValueError(f"codeword must have length {sys.l}")
    if y.shape != (sys.n,):
        raise ValueError(f"side information must have length {sys.n}")
    graph = FactorGraph(sys.A, law.cond_x_given_y[:, y].T, c1)
    beliefs, zero = graph.run(iterations)
    x_hat = np.zeros(sys.n, dtype=np.int64)
    trace = [] if want_trace else None
    for t in range(sys.n):
        chosen, tie = argmax_smallest(beliefs[t])
        x_hat[t] = chosen
        if want_trace:
            trace.append(StageDecision(index=t, chosen=chosen, posterior=beliefs[t],
                                       tie=tie, zero_support=bool(zero[t])))
    return DecodeResult(x_hat=x_hat, trace=trace)


def stage_conditional_exact(matrix: SparseMatrix, priors: np.ndarray,
                            syndrome: np.ndarray) -> tuple[np.ndarray, bool]:
    """Exact constrained marginal of the first active symbol by suffix
    enumeration (ratio of the two constrained sums)."""
    l, m = matrix.shape
    p = matrix.spec.p
    if p ** m > STAGE_EXACT_BUDGET:
        raise EnumerationBudgetError(
            f"stage enumeration p^m = {p}^{m} exceeds {STAGE_EXACT_BUDGET}")
    suffixes = enumerate_vectors(p, m)
    ok = (matrix.apply(suffixes) == np.asarray(syndrome) % p).all(axis=1)
    w = np.ones(len(suffixes))
    for k in range(m):
        w *= priors[k][suffixes[:, k]]
    w = w * ok
    scores = np.bincount(suffixes[:, 0], weights=w, minlength=p)
    total = scores.sum()
    if total <= 0.0:
        return np.full(p, 1.0 / p), True
    return scores / total, False


def _check_vi_structure(sys: ExtendedCodeSystem) -> None:
    n, l = sys.n, sys.l
    if not sys.ordered:
        raise ValueError("decoding loop requires ordered index sets")
    b = sys.B.to_dense()
    expected = np.zeros((n - l, n), dtype=np.int64)
    expected[:, :n - l] = np.eye(n - l, dtype=np.int64)
    if not np.array_equal(b, expected):
        raise ValueError("complement must be [I | 0]")
    # raises SingularMatrixError when the tail block is not invertible
    invert_dense(sys.A.to_dense()[:, n - l:], sys.spec.p)


def run_sc_ssc_algorithm(sys: ExtendedCodeSystem, law: JointSourceLaw, c1, y,
                         mode: str = "deterministic", method: str = "exact",
                         iterations: int = 20, seed=None,
                         want_trace: bool = False) -> DecodeResult:
    """Syndrome-update SC/SSC decoding loop for sparse ordered systems.

    Per free stage: form the stage conditional from the active sub-matrix
    and running syndrome (exactly or via `conditional_sp`), fix the symbol
    by mode ('deterministic') or seeded draw ('stochastic'), subtract the
    fixed symbol's column from the syndrome, and finally solve the
    rightmost l x l block for the remaining source symbols.
    """
    if mode not in ("deterministic", "stochastic"):
        raise ValueError(f"unknown mode {mode!r}")
    if method not in ("exact", "sum-product"):
        raise ValueError(f"unknown method {method!r}")
    _check_vi_structure(sys)
    if sys.spec != law.spec:
        raise ValueError("system and law must share a field")
    n, l, p = sys.n, sys.l, sys.spec.p
    c1 = np.asarray(c1, dtype=np.int64) % p
    y = np.asarray(y, dtype=np.int64)
    if c1.shape != (l,):
        raise ValueError(f"codeword must have length {l}")
    if y.shape != (n,):
        raise ValueError(f"side information must have length {n}")
    rng = None
    if mode == "stochastic":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    all_priors = law.cond_x_given_y[:, y].T  # (n, p)
    syndrome = c1.copy()
    x_hat = np.zeros(n, dtype=np.int64)
    trace = [] if want_trace else None
    for j in range(n - l):
        active = sys.A.column_slice(j)
        if method == "exact":
            probs, zero = stage_conditional_exact(active, all_priors[j:], syndrome)
        else:
            probs, zero = conditional_sp(active, all_priors[j:], syndrome, iterations)
        if rng is None:
            chosen, _ = argmax_smallest(probs)
            drawn = False
        else:
            chosen = _draw(rng, probs)
            drawn = True
        x_hat[j] = chosen
        syndrome = (syndrome - chosen * sys.A.column(j)) % p
        if want_trace:
            trace.append(StageDecision(index=l + j, chosen=chosen, posterior=probs,
                                       zero_support=zero, drawn=drawn))
    tail_inv = invert_dense(sys.A.to_dense()[:, n - l:], p)
    x_hat[n - l:] = (tail_inv @ syndrome) % p
    return DecodeResult(x_hat=x_hat, trace=trace)


def reduce_conditional_equivalence_check(sys: ExtendedCodeSystem, law: JointSourceLaw,
                                         tolerance: float = 1e-12) -> bool:
    """Verify that the three routes to the stage conditional agree everywhere.

    Route 1 marginalizes the joint law of the extended codeword through the
    bijection; route 2 sums the source-space posterior under the full coset
    constraint; route 3 enumerates suffixes against the running syndrome.
    Checked for every stage, prefix, codeword and side-information block of
    a small instance (exact summation on all routes, no message passing).

    Conditioning events of probability zero are excluded from the route-3
    comparison: the syndrome form cancels the common prefix factor from
    numerator and denominator, which is valid only when that factor is
    positive, and the conditional itself is undefined there. Routes 1 and 2
    must still agree that the event has no support.
    """
    from .decoders import ConditionalModel, sc_conditional

    _check_vi_structure(sys)
    n, l, p = sys.n, sys.l, sys.spec.p
    model = ConditionalModel(sys, law)
    a_dense = sys.A.to_dense()
    all_x = enumerate_vectors(p, n)
    for y in enumerate_vectors(law.y_size, n):
        priors = law.cond_x_given_y[:, y].T
        cond_w = np.ones(len(all_x))
        for k in range(n):
            cond_w *= priors[k][all_x[:, k]]
        for c1 in enumerate_vectors(p, l):
            in_coset = (sys.A.apply(all_x) == c1).all(axis=1)
            for j in range(n - l):
                for prefix in enumerate_vectors(p, j):
                    # route 1: conditional of extended-codeword symbol l+j
                    c_prefix = np.concatenate([c1, prefix])
                    r1, z1 = sc_conditional(model, l + j, c_prefix, y)
                    # route 2: full coset-constrained ratio in source space
                    sel = in_coset & (all_x[:, :j] == prefix).all(axis=1)
                    num = np.bincount(all_x[sel, j], weights=cond_w[sel], minlength=p)
                    if num.sum() > 0:
                        r2, z2 = num / num.sum(), False
                    else:
                        r2, z2 = np.full(p, 1.0 / p), True
                    if z1 != z2:
                        return False
                    if z1:
                        continue
                    # route 3: suffix enumeration against the running syndrome
                    syndrome = (c1 - a_dense[:, :j] @ prefix) % p
                    r3, z3 = stage_conditional_exact(sys.A.column_slice(j),
                                                     priors[j:], syndrome)
                    if z3:
                        return False
                    if np.abs(r1 - r2).max() > tolerance or np.abs(r2 - r3).max() > tolerance:
                        return False
    return True
