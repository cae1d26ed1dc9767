"""Block decoders for linear source codes with decoder side information.

Five decoders over exact conditional probabilities, all sharing one
enumeration backend:

* block MAP        -- argmax of mu(x|y) over the coset {x : Ax = c1}
* typical-set      -- unique coset member of the conditional typical set
* symbol-wise MAP  -- per-coordinate posterior modes given (c1, y); the
                      output is allowed to fall outside the coset
* SC               -- sequential per-index posterior modes over the
                      extended codeword, frozen indices copied from c1
* SSC              -- the same pass with each free index sampled from its
                      posterior instead of taking the mode

Every argmax breaks ties toward the smallest field element so that results
are reproducible and the optimality comparisons in the test-suite are
well defined. Exact block error probabilities are computed by summing the
joint law over all (x, y) pairs; for SSC the internal randomness is summed
analytically (product of per-stage probabilities along the true path), so
the factor-two optimality bound can be checked exactly rather than
statistically.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .linalg import ExtendedCodeSystem
from .source import JointSourceLaw, entropy_base

EXACT_BUDGET = 2 ** 24

# Posterior values within this relative distance of the maximum count as
# tied. Exact ties are common (cosets often contain blocks with identical
# symbol multisets) and independent summation orders then disagree in the
# last ulp; a small relative band makes every route resolve them to the
# same smallest symbol.
TIE_REL_TOL = 1e-9


class EnumerationBudgetError(RuntimeError):
    """Requested exact computation exceeds the enumeration budget."""


def argmax_smallest(scores) -> tuple[int, bool]:
    """(index of the max, tie flag), near-ties resolved to the smallest index."""
    scores = np.asarray(scores, dtype=np.float64)
    top = scores.max()
    if top <= 0.0:
        return 0, True
    near = scores >= top * (1.0 - TIE_REL_TOL)
    return int(np.argmax(near)), bool(near.sum() > 1)


def argmax_smallest_rows(scores: np.ndarray) -> np.ndarray:
    """Vectorized argmax_smallest along axis 0 of a (symbols x cases) array."""
    top = scores.max(axis=0)
    near = scores >= top[None, :] * (1.0 - TIE_REL_TOL)
    return np.argmax(near, axis=0)


@dataclass
class StageDecision:
    """One per-index decision record for the decode trace."""

    index: int
    chosen: int
    posterior: np.ndarray | None = None
    tie: bool = False
    zero_support: bool = False
    drawn: bool = False


@dataclass
class DecodeResult:
    """Decoder output: the reconstruction, or None for a declared failure."""

    x_hat: np.ndarray | None
    trace: list[StageDecision] | None = None

    @property
    def failed(self) -> bool:
        return self.x_hat is None


def enumerate_vectors(radix: int, length: int) -> np.ndarray:
    """All radix^length tuples as rows, in lexicographic order (MSB first)."""
    count = radix ** length
    out = np.zeros((count, length), dtype=np.int64)
    idx = np.arange(count)
    for t in range(length - 1, -1, -1):
        out[:, t] = idx % radix
        idx //= radix
    return out


def vector_codes(vectors: np.ndarray, radix: int) -> np.ndarray:
    """Integer code of each row, MSB first (inverse of enumerate_vectors)."""
    length = vectors.shape[-1]
    weights = radix ** np.arange(length - 1, -1, -1, dtype=np.int64)
    return vectors @ weights


class ConditionalModel:
    """An extended-code system paired with a source law, exact-enumeration mode.

    Caches the full enumeration of source blocks and their extended
    codewords; everything a decoder needs for one call is then a weight
    column over source blocks.
    """

    def __init__(self, sys: ExtendedCodeSystem, law: JointSourceLaw, mode: str = "exact"):
        if sys.spec != law.spec:
            raise ValueError("system and law must share a field")
        if mode != "exact":
            raise ValueError(f"unsupported evaluation mode {mode!r}")
        self.sys = sys
        self.law = law
        self.mode = mode
        p, n = sys.spec.p, sys.n
        if p ** n > EXACT_BUDGET:
            raise EnumerationBudgetError(f"p^n = {p}^{n} exceeds the exact budget {EXACT_BUDGET}")
        self._all_x: np.ndarray | None = None
        self._all_c: np.ndarray | None = None
        self._c1_code: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.sys.n

    @property
    def p(self) -> int:
        return self.sys.spec.p

    @property
    def all_x(self) -> np.ndarray:
        if self._all_x is None:
            self._all_x = enumerate_vectors(self.p, self.n)
        return self._all_x

    @property
    def all_c(self) -> np.ndarray:
        if self._all_c is None:
            self._all_c = (self.all_x @ self.sys.stacked.T) % self.p
        return self._all_c

    @property
    def c1_code(self) -> np.ndarray:
        """Codeword (coset) code of every enumerated source block."""
        if self._c1_code is None:
            self._c1_code = vector_codes(self.all_c[:, self.sys.I1], self.p)
        return self._c1_code

    def weight_column(self, y) -> np.ndarray:
        """Joint weights mu(x, y) for every enumerated x at this fixed y."""
        y = np.asarray(y, dtype=np.int64)
        if y.shape != (self.n,):
            raise ValueError(f"side information must have length {self.n}")
        w = np.ones(len(self.all_x))
        for t in range(self.n):
            w *= self.law.pmf[self.all_x[:, t], y[t]]
        return w

    def coset_rows(self, c1) -> np.ndarray:
        c1 = np.asarray(c1, dtype=np.int64)
        if c1.shape != (self.sys.l,):
            raise ValueError(f"codeword must have length {self.sys.l}")
        code = int(vector_codes(c1[None, :], self.p)[0]) if self.sys.l else 0
        return np.nonzero(self.c1_code == code)[0]


def _stage_scores(model: ConditionalModel, rows: np.ndarray, w: np.ndarray,
                  stage: int) -> np.ndarray:
    """Unnormalized posterior of extended-codeword symbol `stage` over `rows`."""
    return np.bincount(model.all_c[rows, stage], weights=w[rows], minlength=model.p)


def _normalize(scores: np.ndarray) -> tuple[np.ndarray, bool]:
    total = scores.sum()
    if total <= 0.0:
        return np.full(len(scores), 1.0 / len(scores)), True
    return scores / total, False


def _draw(rng: np.random.Generator, probs: np.ndarray) -> int:
    cum = np.cumsum(probs)
    return int(min(np.searchsorted(cum, rng.random(), side="right"), len(probs) - 1))


def decode_map(model: ConditionalModel, c1, y) -> DecodeResult:
    """Block-MAP reconstruction: argmax of mu(x|y) over the coset Ax = c1."""
    rows = model.coset_rows(c1)
    w = model.weight_column(y)
    idx, _ = argmax_smallest(w[rows])  # rows ascend, so ties pick the smallest x
    return DecodeResult(x_hat=model.all_x[rows[idx]].copy())


def decode_typical(model: ConditionalModel, c1, y, epsilon: float) -> DecodeResult:
    """Unique typical coset member, or a failure result when 0 or >= 2 qualify."""
    rows = model.coset_rows(c1)
    y = np.asarray(y, dtype=np.int64)
    w = model.weight_column(y)
    mu_y = model.law.y_marginal[y].prod()
    if mu_y == 0:
        raise ValueError("side-information block has zero probability")
    n, p = model.n, model.p
    with np.errstate(divide="ignore"):
        log_cond = np.log(w[rows] / mu_y) / math.log(p)
    h = model.law.conditional_entropy()
    typical = np.abs(log_cond + n * h) <= n * epsilon + 1e-12
    hits = rows[typical]
    if hits.size != 1:
        return DecodeResult(x_hat=None)
    return DecodeResult(x_hat=model.all_x[hits[0]].copy())


def decode_smap(model: ConditionalModel, c1, y, want_trace: bool = False) -> DecodeResult:
    """Per-coordinate posterior modes given (c1, y); may leave the coset."""
    rows = model.coset_rows(c1)
    w = model.weight_column(y)
    wr = w[rows]
    xr = model.all_x[rows]
    p, n = model.p, model.n
    x_hat = np.zeros(n, dtype=np.int64)
    trace = [] if want_trace else None
    for t in range(n):
        scores = np.bincount(xr[:, t], weights=wr, minlength=p)
        posterior, zero = _normalize(scores)
        chosen, tie = argmax_smallest(posterior)
        x_hat[t] = chosen
        if want_trace:
            trace.append(StageDecision(index=t, chosen=chosen, posterior=posterior,
                                       tie=tie, zero_support=zero))
    return DecodeResult(x_hat=x_hat, trace=trace)


def sc_conditional(model: ConditionalModel, i: int, c_prefix, y) -> tuple[np.ndarray, bool]:
    """Exact posterior of extended-codeword symbol i given the first i symbols.

    `i` is 0-based and `c_prefix` holds the already-fixed symbols c[0..i-1].
    Returns (probability vector over X, zero-support flag); the flag is set
    and the vector is uniform when the conditioning event has zero mass.
    """
    c_prefix = np.asarray(c_prefix, dtype=np.int64)
    if not 0 <= i < model.n:
        raise ValueError(f"stage {i} outside [0, {model.n})")
    if c_prefix.shape != (i,):
        raise ValueError(f"prefix must have length {i}")
    w = model.weight_column(y)
    rows = np.nonzero((model.all_c[:, :i] == c_prefix).all(axis=1))[0]
    scores = _stage_scores(model, rows, w, i)
    return _normalize(scores)


def _sequential_decode(model: ConditionalModel, c1, y, rng: np.random.Generator | None,
                       want_trace: bool) -> DecodeResult:
    """Shared SC/SSC pass; rng=None takes the mode, otherwise samples."""
    c1 = np.asarray(c1, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    sys = model.sys
    if c1.shape != (sys.l,):
        raise ValueError(f"codeword must have length {sys.l}")
    w = model.weight_column(y)
    frozen_pos = {int(idx): j for j, idx in enumerate(sys.I1)}
    mask = np.ones(len(w), dtype=bool)
    c_hat = np.zeros(model.n, dtype=np.int64)
    trace = [] if want_trace else None
    for i in range(model.n):
        rows = np.nonzero(mask)[0]
        scores = _stage_scores(model, rows, w, i)
        posterior, zero = _normalize(scores)
        tie = False
        if i in frozen_pos:
            chosen = int(c1[frozen_pos[i]])
            drawn = False
        elif rng is None:
            chosen, tie = argmax_smallest(posterior)
            drawn = False
        else:
            chosen = _draw(rng, posterior)
            drawn = True
        c_hat[i] = chosen
        mask &= model.all_c[:, i] == chosen
        if want_trace:
            trace.append(StageDecision(index=i, chosen=chosen, posterior=posterior,
                                       tie=tie, zero_support=zero, drawn=drawn))
    x_hat = (c_hat @ sys.stacked_inv.T) % model.p
    return DecodeResult(x_hat=x_hat, trace=trace)


def decode_sc(model: ConditionalModel, c1, y, want_trace: bool = False) -> DecodeResult:
    """Deterministic successive-cancellation decoding of the extended codeword."""
    return _sequential_decode(model, c1, y, rng=None, want_trace=want_trace)


def decode_ssc(model: ConditionalModel, c1, y, seed, want_trace: bool = False) -> DecodeResult:
    """Stochastic SC: free indices are sampled from their exact posteriors."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return _sequential_decode(model, c1, y, rng=rng, want_trace=want_trace)


# ---------------------------------------------------------------------------
# Exact error probabilities over the full (x, y) product space.
# ---------------------------------------------------------------------------

class ExactErrorEngine:
    """Exact block/stage error probabilities by full joint enumeration.

    Builds the matrix W[x, y] = mu(x, y) over all p^n source blocks and all
    |Y|^n side-information blocks, then evaluates each decoder's error
    probability by vectorized sweeps. All decision rules match the per-call
    decoders (same mode/tie conventions), which the test-suite verifies.
    """

    def __init__(self, model: ConditionalModel):
        self.model = model
        p, n, ys = model.p, model.n, model.law.y_size
        if (p ** n) * (ys ** n) > EXACT_BUDGET:
            raise EnumerationBudgetError(
                f"joint enumeration p^n * |Y|^n = {p ** n * ys ** n} exceeds {EXACT_BUDGET}")
        self.n_y = ys ** n
        self.all_y = enumerate_vectors(ys, n)
        W = np.ones((p ** n, self.n_y))
        for t in range(n):
            W *= model.law.pmf[np.ix_(model.all_x[:, t], self.all_y[:, t])]
        self.W = W
        # prefix codes of the extended codeword at every depth
        self.prefix_codes = [vector_codes(model.all_c[:, :i], p) for i in range(n + 1)]
        self.prefix_order = [np.argsort(pc, kind="stable") for pc in self.prefix_codes]
        self._level_sums: dict[int, np.ndarray] = {}

    def level_sums(self, i: int) -> np.ndarray:
        """S_i[g, y] = total mass of source blocks whose first i extended
        symbols have code g (shape p^i x |Y|^n)."""
        if i not in self._level_sums:
            p, n = self.model.p, self.model.n
            order = self.prefix_order[i]
            group = p ** (n - i)
            starts = np.arange(0, p ** n, group)
            self._level_sums[i] = np.add.reduceat(self.W[order], starts, axis=0)
        return self._level_sums[i]

    def map_error(self) -> float:
        p, l, n = self.model.p, self.model.sys.l, self.model.n
        order = np.argsort(self.model.c1_code, kind="stable")
        starts = np.arange(0, p ** n, p ** (n - l))
        coset_max = np.maximum.reduceat(self.W[order], starts, axis=0)
        return 1.0 - float(coset_max.sum())

    def smap_error(self) -> float:
        model = self.model
        p, l, n = model.p, model.sys.l, model.n
        order = np.argsort(model.c1_code, kind="stable")
        group = p ** (n - l)
        p_correct = 0.0
        pow_weights = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
        for g in range(p ** l):
            rows = order[g * group:(g + 1) * group]
            sub = self.W[rows]
            chosen = np.zeros((n, self.n_y), dtype=np.int64)
            for t in range(n):
                onehot = (model.all_x[rows, t][None, :] == np.arange(p)[:, None]).astype(float)
                chosen[t] = argmax_smallest_rows(onehot @ sub)
            xhat_idx = pow_weights @ chosen
            valid = model.c1_code[xhat_idx] == g
            p_correct += float(self.W[xhat_idx, np.arange(self.n_y)][valid].sum())
        return 1.0 - p_correct

    def typical_error(self, epsilon: float) -> float:
        model = self.model
        p, l, n = model.p, model.sys.l, model.n
        mu_y = model.law.y_marginal[self.all_y].prod(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_cond = np.log(self.W / mu_y[None, :]) / math.log(p)
        log_cond[:, mu_y == 0] = -math.inf
        h = model.law.conditional_entropy()
        typ = np.abs(log_cond + n * h) <= n * epsilon + 1e-12
        order = np.argsort(model.c1_code, kind="stable")
        starts = np.arange(0, p ** n, p ** (n - l))
        counts = np.add.reduceat(typ[order].astype(np.int64), starts, axis=0)
        unique = counts[model.c1_code] == 1
        return 1.0 - float(self.W[typ & unique].sum())

    def _sc_paths(self) -> tuple[np.ndarray, np.ndarray]:
        """Deterministic SC decode for every (coset, y).

        Returns (chat, coset_codes): chat[g] is the n x |Y|^n matrix of
        decoded extended codewords for coset g.
        """
        model = self.model
        p, l, n = model.p, model.sys.l, model.n
        order = np.argsort(model.c1_code, kind="stable")
        group = p ** (n - l)
        frozen_pos = {int(idx): j for j, idx in enumerate(model.sys.I1)}
        c1_digits = enumerate_vectors(p, l)
        chat_all = np.zeros((p ** l, n, self.n_y), dtype=np.int64)
        for g in range(p ** l):
            rows = order[g * group:(g + 1) * group]
            sub_w = self.W[rows]
            sub_c = model.all_c[rows]
            mask = np.ones((group, self.n_y), dtype=bool)
            for i in range(n):
                if i in frozen_pos:
                    chosen = np.full(self.n_y, c1_digits[g, frozen_pos[i]], dtype=np.int64)
                else:
                    scores = np.zeros((p, self.n_y))
                    for a in range(p):
                        sel = sub_c[:, i] == a
                        if sel.any():
                            scores[a] = (sub_w[sel] * mask[sel]).sum(axis=0)
                    chosen = argmax_smallest_rows(scores)
                chat_all[g, i] = chosen
                mask &= sub_c[:, i][:, None] == chosen[None, :]
        return chat_all, np.arange(p ** l)

    def sc_error(self) -> float:
        """P(psi(AX, Y) != X): decode, map back through the bijection, compare."""
        model = self.model
        p, n = model.p, model.n
        chat_all, _ = self._sc_paths()
        pow_weights = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
        p_correct = 0.0
        ycols = np.arange(self.n_y)
        for g in range(chat_all.shape[0]):
            xhat = (model.sys.stacked_inv @ chat_all[g]) % p
            xhat_idx = pow_weights @ xhat
            p_correct += float(self.W[xhat_idx, ycols].sum())
        return 1.0 - p_correct

    def _codeword_joint(self) -> np.ndarray:
        """mu over extended codewords: row c holds the mass of the source
        block the bijection maps to c (the joint law transported through Q)."""
        ccode = vector_codes(self.model.all_c, self.model.p)
        x_of_c = np.empty_like(ccode)
        x_of_c[ccode] = np.arange(len(ccode))
        return self.W[x_of_c]

    def f_error_sc(self) -> float:
        """P(f(C1, Y) != (C0, C1)): same decisions, accounted in codeword space."""
        model = self.model
        p, n = model.p, model.n
        chat_all, _ = self._sc_paths()
        pow_weights = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
        w_c = self._codeword_joint()
        p_correct = 0.0
        ycols = np.arange(self.n_y)
        for g in range(chat_all.shape[0]):
            chat_code = pow_weights @ chat_all[g]
            p_correct += float(w_c[chat_code, ycols].sum())
        return 1.0 - p_correct

    def _true_path_stage_probs(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-(x, y) conditional of the true symbol at stage i and the
        group-decision table (num, den) used by both SC stage errors and the
        SSC path-sum."""
        num = self.level_sums(i + 1)[self.prefix_codes[i + 1]]
        den = self.level_sums(i)[self.prefix_codes[i]]
        return num, den

    def ssc_error(self) -> float:
        """Exact SSC error via the analytic path-sum over internal draws."""
        model = self.model
        correct = np.ones_like(self.W)
        for i in (int(v) for v in model.sys.I0):
            num, den = self._true_path_stage_probs(i)
            ratio = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
            correct *= ratio
        return 1.0 - float((self.W * correct).sum())

    def f_error_ssc(self) -> float:
        """SSC path-sum accumulated entirely in codeword space.

        The c-enumeration lists codewords in lexicographic order, so the
        prefix groups at every depth are contiguous blocks and the running
        conditionals come from plain block sums; no decision tables or
        source-space structures are reused.
        """
        model = self.model
        p, n = model.p, model.n
        w_c = self._codeword_joint()
        codes = np.arange(p ** n)
        level = {i: np.add.reduceat(w_c, np.arange(0, p ** n, p ** (n - i)), axis=0)
                 for i in range(n + 1)}
        correct = np.ones_like(w_c)
        for i in (int(v) for v in model.sys.I0):
            num = level[i + 1][codes // p ** (n - i - 1)]
            den = level[i][codes // p ** (n - i)]
            correct *= np.divide(num, den, out=np.zeros_like(num), where=den > 0)
        return 1.0 - float((w_c * correct).sum())

    def stage_error_probabilities(self) -> np.ndarray:
        """P(f_i(C_1^{i-1}, Y) != C_i) for every stage, true-prefix conditioning.

        Frozen stages (i in I1) copy their symbol and are exact by
        definition, so their entry is 0; free stages use the posterior-mode
        rule with the smallest-symbol tie-break.
        """
        model = self.model
        p, n = model.p, model.n
        errs = np.zeros(n)
        frozen = set(int(v) for v in model.sys.I1)
        for i in range(n):
            if i in frozen:
                continue
            level = self.level_sums(i + 1).reshape(p ** i, p, self.n_y)
            top = level.max(axis=1)
            decision = np.argmax(level >= top[:, None, :] * (1.0 - TIE_REL_TOL), axis=1)
            d_per_x = decision[self.prefix_codes[i]]
            wrong = d_per_x != model.all_c[:, i][:, None]
            errs[i] = float(self.W[wrong].sum())
        return errs

    def stage_entropies(self) -> np.ndarray:
        """H(C_i | C_1^{i-1}, Y) for every stage, base |X|."""
        model = self.model
        p, n = model.p, model.n
        h_y = entropy_base(model.law.y_marginal, p) * n
        h_prev = 0.0
        out = np.zeros(n)
        for i in range(1, n + 1):
            h_joint = entropy_base(self.level_sums(i).reshape(-1), p)
            h_cur = h_joint - h_y
            out[i - 1] = h_cur - h_prev
            h_prev = h_cur
        return out


def block_error_probability(model: ConditionalModel, decoder: str,
                            epsilon: float | None = None) -> float:
    """Exact Prob(decode(AX, Y) != X) for one of the five decoders.

    For 'ssc' the internal randomness is marginalized analytically; the
    result is the exact average over both the source and the decoder's own
    coin flips.
    """
    engine = model_engine(model)
    if decoder == "map":
        return engine.map_error()
    if decoder == "smap":
        return engine.smap_error()
    if decoder == "typical":
        if epsilon is None:
            raise ValueError("typical-set decoding needs an epsilon")
        return engine.typical_error(epsilon)
    if decoder == "sc":
        return engine.sc_error()
    if decoder == "ssc":
        return engine.ssc_error()
    raise ValueError(f"unknown decoder {decoder!r}")


def model_engine(model: ConditionalModel) -> ExactErrorEngine:
    """Memoized ExactErrorEngine for the model."""
    engine = getattr(model, "_engine", None)
    if engine is None:
        engine = ExactErrorEngine(model)
        model._engine = engine
    return engine
