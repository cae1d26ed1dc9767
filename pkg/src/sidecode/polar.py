"""Polar source code over GF(p): transform, exact/Monte-Carlo construction,
and O(n log n) SC/SSC decoding.

The extended codeword is c = tS_br * tG * x for the polarization transform
G = [[1,0],[1,1]]^(tensor k) * S_br. Because the bit-reversal permutation is
a symmetric involution, this collapses to c = [[1,1],[0,1]]^(tensor k) * x,
which the butterfly below evaluates in n log n symbol operations; the
literal dense product is kept as a test reference.

Decoding processes c in natural order. Splitting the block in halves gives
c_top = T(x_top) + T(x_bot) = T(x_top + x_bot) and c_bot = T(x_bot), so the
first half of the indices is a half-size instance on the coordinate-sum
synthetic pair source ("minus": X1+X2 with side info (Y1, Y2)) and, once
c_top is known, the second half is a half-size instance on the "plus"
source (X2 with side info (Y1, Y2, X1+X2)). The per-index conditional
P(c_i | c_1..c_{i-1}, y) is therefore the leaf posterior of that recursion,
and index-wise figures of merit (conditional entropy, Bhattacharyya Z) are
exactly the single-letter quantities of the corresponding leaf pair law.

Code construction follows the Z threshold 2^(-n^beta): indices whose Z is
below the threshold are reconstructed by the decoder (I0); the rest are
emitted as the codeword (I1), so the rate is |I1|/n.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .decoders import DecodeResult, EnumerationBudgetError, StageDecision, \
    TIE_REL_TOL, argmax_smallest, argmax_smallest_rows
from .gf import FieldSpec
from .source import JointSourceLaw, entropy_base

LEAF_LAW_BUDGET = 2 ** 22


def bit_reversal_permutation(k: int) -> np.ndarray:
    """br[i] = the k-bit reversal of i."""
    n = 1 << k
    br = np.zeros(n, dtype=np.int64)
    for i in range(n):
        v = 0
        for b in range(k):
            v |= ((i >> b) & 1) << (k - 1 - b)
        br[i] = v
    return br


def dense_transform_matrix(k: int, p: int) -> np.ndarray:
    """Literal dense evaluation of tS_br * tG with G = F^(tensor k) * S_br.

    Reference path for tests; the butterfly transform must match it.
    """
    f = np.array([[1, 0], [1, 1]], dtype=np.int64)
    g = np.array([[1]], dtype=np.int64)
    for _ in range(k):
        g = np.kron(f, g)
    br = bit_reversal_permutation(k)
    s_br = np.zeros((1 << k, 1 << k), dtype=np.int64)
    s_br[np.arange(1 << k), br] = 1
    g = (g @ s_br) % p
    return (s_br.T @ g.T) % p


def _check_power_of_two(n: int) -> int:
    if n <= 0 or (n & (n - 1)) != 0:
        raise ValueError(f"block length must be a power of two, got {n}")
    return n.bit_length() - 1


def polar_transform(x, p: int) -> np.ndarray:
    """Butterfly evaluation of the extended codeword c from a source block x."""
    x = np.asarray(x, dtype=np.int64)
    n = x.shape[-1]
    _check_power_of_two(n)
    c = x.copy() % p
    h = n // 2
    while h >= 1:
        view = c.reshape(-1, 2 * h)
        view[:, :h] = (view[:, :h] + view[:, h:]) % p
        h //= 2
    return c.reshape(x.shape)


def polar_inverse_transform(c, p: int) -> np.ndarray:
    """Inverse butterfly: recovers the source block from an extended codeword."""
    c = np.asarray(c, dtype=np.int64)
    n = c.shape[-1]
    _check_power_of_two(n)
    x = c.copy() % p
    h = 1
    while h <= n // 2:
        view = x.reshape(-1, 2 * h)
        view[:, :h] = (view[:, :h] - view[:, h:]) % p
        h *= 2
    return x.reshape(c.shape)


# ---------------------------------------------------------------------------
# Batched probability kernels (leading axes broadcast, last axis = symbols).
# ---------------------------------------------------------------------------

def _pair_convolve(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """out[..., s] = sum_a a[..., a] * b[..., s - a mod p]."""
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for u in range(p):
        out += a[..., u:u + 1] * np.roll(b, u, axis=-1)
    return out


def _plus_posterior(top: np.ndarray, bot: np.ndarray, s: np.ndarray, p: int) -> np.ndarray:
    """out[..., x2] = top[..., s - x2 mod p] * bot[..., x2]."""
    idx = (s[..., None] - np.arange(p)) % p
    return np.take_along_axis(top, idx, axis=-1) * bot


def _renormalize(post: np.ndarray) -> np.ndarray:
    total = post.sum(axis=-1, keepdims=True)
    safe = np.where(total > 0, total, 1.0)
    out = post / safe
    flat = np.broadcast_to((total <= 0), out.shape)
    return np.where(flat, 1.0 / post.shape[-1], out)


# ---------------------------------------------------------------------------
# Exact leaf pair laws (side-information alphabet tracked symbolically).
# ---------------------------------------------------------------------------

def _merge_side_symbols(w: np.ndarray, cond: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Drop zero-mass side symbols and pool those with identical conditionals.

    Side symbols only influence anything through their conditional column
    and weight, so pooling exactly equal columns is lossless. Equality is
    bitwise; symmetric constructions produce bit-identical duplicates.
    """
    keep = w > 0
    w, cond = w[keep], cond[keep]
    seen: dict[bytes, int] = {}
    out_w: list[float] = []
    out_c: list[np.ndarray] = []
    for k in range(len(w)):
        key = cond[k].tobytes()
        if key in seen:
            out_w[seen[key]] += w[k]
        else:
            seen[key] = len(out_w)
            out_w.append(float(w[k]))
            out_c.append(cond[k])
    return np.array(out_w), np.array(out_c)


def _minus_law(w: np.ndarray, cond: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Pair law of (X1 + X2, (Y1, Y2)) for two independent copies."""
    m = len(w)
    if m * m > LEAF_LAW_BUDGET:
        raise EnumerationBudgetError(f"synthetic side alphabet {m}^2 exceeds budget")
    w2 = np.outer(w, w).reshape(-1)
    conv = _pair_convolve(cond[:, None, :], cond[None, :, :], p).reshape(-1, p)
    return _merge_side_symbols(w2, conv)


def _plus_law(w: np.ndarray, cond: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Pair law of (X2, (Y1, Y2, X1 + X2)) for two independent copies."""
    m = len(w)
    if m * m * p > LEAF_LAW_BUDGET:
        raise EnumerationBudgetError(f"synthetic side alphabet {m}^2*{p} exceeds budget")
    # joint over (y1, y2, s, x2): cond[y1, s - x2] * cond[y2, x2] * w1 * w2
    s_vals = np.arange(p)
    idx = (s_vals[:, None] - np.arange(p)[None, :]) % p  # (s, x2) -> s - x2
    top = cond[:, idx]                                   # (y1, s, x2)
    joint = top[:, None, :, :] * cond[None, :, None, :]  # (y1, y2, s, x2)
    joint = joint * np.outer(w, w)[:, :, None, None]
    joint = joint.reshape(-1, p)
    weights = joint.sum(axis=1)
    keep = weights > 0
    cond_new = joint[keep] / weights[keep][:, None]
    return _merge_side_symbols(weights[keep], cond_new)


def _leaf_laws(w: np.ndarray, cond: np.ndarray, depth: int, p: int) \
        -> list[tuple[np.ndarray, np.ndarray]]:
    if depth == 0:
        return [(w, cond)]
    minus = _leaf_laws(*_minus_law(w, cond, p), depth - 1, p)
    plus = _leaf_laws(*_plus_law(w, cond, p), depth - 1, p)
    return minus + plus


def _law_as_pair(law: JointSourceLaw) -> tuple[np.ndarray, np.ndarray]:
    return law.y_marginal.copy(), law.cond_x_given_y.T.copy()


def leaf_pair_law(law: JointSourceLaw, k: int, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Side weights and conditional columns of the synthetic pair law whose
    single-letter statistics equal those of index i (0-based) at depth k."""
    if not 0 <= i < (1 << k):
        raise ValueError(f"index {i} outside [0, {1 << k})")
    w, cond = _law_as_pair(law)
    p = law.p
    for b in range(k - 1, -1, -1):
        if (i >> b) & 1:
            w, cond = _plus_law(w, cond, p)
        else:
            w, cond = _minus_law(w, cond, p)
    return w, cond


def _pair_entropy(w: np.ndarray, cond: np.ndarray, p: int) -> float:
    return float(sum(wv * entropy_base(cv, p) for wv, cv in zip(w, cond)))


def _pair_bhattacharyya(w: np.ndarray, cond: np.ndarray, p: int) -> float:
    root = np.sqrt(cond)
    cross = root.sum(axis=1) ** 2 - (cond.sum(axis=1))
    return float((w * cross).sum() / (p - 1))


def exact_stage_entropies(law: JointSourceLaw, k: int) -> np.ndarray:
    """H(C_i | C_1^{i-1}, Y) for every index, from the leaf pair laws."""
    leaves = _leaf_laws(*_law_as_pair(law), k, law.p)
    return np.array([_pair_entropy(w, c, law.p) for w, c in leaves])


def exact_bhattacharyya(law: JointSourceLaw, k: int) -> np.ndarray:
    """Z(C_i | C_1^{i-1}, Y) for every index, from the leaf pair laws."""
    leaves = _leaf_laws(*_law_as_pair(law), k, law.p)
    return np.array([_pair_bhattacharyya(w, c, law.p) for w, c in leaves])


# ---------------------------------------------------------------------------
# Conditionals for a concrete (y, prefix) query and along sampled paths.
# ---------------------------------------------------------------------------

@dataclass
class SymbolPosterior:
    """Posterior of one extended-codeword symbol given its prefix and y."""

    index: int
    probs: np.ndarray
    prefix: np.ndarray
    zero_support: bool = False


def _stage_posterior(post: np.ndarray, prefix: np.ndarray, i: int, p: int) -> np.ndarray:
    """Unnormalized posterior of c_i given c_1^{i-1} for one block."""
    m = post.shape[0]
    if m == 1:
        return post[0]
    half = m // 2
    if i < half:
        minus = _pair_convolve(post[:half], post[half:], p)
        return _stage_posterior(minus, prefix, i, p)
    s = polar_inverse_transform(prefix[:half], p)
    plus = _plus_posterior(post[:half], post[half:], s, p)
    return _stage_posterior(plus, prefix[half:], i - half, p)


def polar_conditionals(law: JointSourceLaw, y, prefix) -> SymbolPosterior:
    """Exact P(C_i = . | C_1^{i-1} = prefix, Y = y) with i = len(prefix)."""
    y = np.asarray(y, dtype=np.int64)
    prefix = np.asarray(prefix, dtype=np.int64)
    n = y.shape[0]
    _check_power_of_two(n)
    i = prefix.shape[0]
    if not 0 <= i < n:
        raise ValueError(f"prefix length {i} outside [0, {n})")
    post = law.pmf[:, y].T.astype(np.float64)
    raw = _stage_posterior(post, prefix, i, law.p)
    total = raw.sum()
    if total <= 0:
        return SymbolPosterior(index=i, probs=np.full(law.p, 1.0 / law.p),
                               prefix=prefix, zero_support=True)
    return SymbolPosterior(index=i, probs=raw / total, prefix=prefix)


def _path_posteriors(post: np.ndarray, c_true: np.ndarray, p: int) -> np.ndarray:
    """Posterior at every index along the true prefix path, batched.

    post: (B, m, p) per-coordinate posteriors, c_true: (B, m) true extended
    codeword block. Returns (B, m, p) normalized stage posteriors.
    """
    B, m, _ = post.shape
    if m == 1:
        return _renormalize(post)
    half = m // 2
    minus = _renormalize(_pair_convolve(post[:, :half], post[:, half:], p))
    out_top = _path_posteriors(minus, c_true[:, :half], p)
    s = polar_inverse_transform(c_true[:, :half], p)
    plus = _renormalize(_plus_posterior(post[:, :half], post[:, half:], s, p))
    out_bot = _path_posteriors(plus, c_true[:, half:], p)
    return np.concatenate([out_top, out_bot], axis=1)


def _batched_draw(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    cum = np.cumsum(probs, axis=-1)
    u = rng.random(probs.shape[0])
    return np.minimum((cum <= u[:, None]).sum(axis=1), probs.shape[-1] - 1)


def _decode_block(post: np.ndarray, offset: int, frozen: np.ndarray,
                  frozen_vals: np.ndarray, rng, p: int,
                  sink: list | None) -> np.ndarray:
    """Sequential SC/SSC decoding of one transform block, batched over trials.

    Returns the decoded c block (B, m). rng=None takes posterior modes,
    otherwise symbols are drawn. `sink` collects per-index StageDecision
    lists for single-trial traces.
    """
    B, m, _ = post.shape
    if m == 1:
        probs = _renormalize(post[:, 0, :])
        if frozen[offset]:
            c = frozen_vals[:, offset].copy()
            drawn = False
        elif rng is None:
            c = argmax_smallest_rows(probs.T)
            drawn = False
        else:
            c = _batched_draw(rng, probs)
            drawn = True
        if sink is not None:
            sink.append(StageDecision(index=offset, chosen=int(c[0]),
                                      posterior=probs[0],
                                      zero_support=bool(post[0, 0].sum() <= 0),
                                      drawn=drawn))
        return c[:, None]
    half = m // 2
    minus = _renormalize(_pair_convolve(post[:, :half], post[:, half:], p))
    c_top = _decode_block(minus, offset, frozen, frozen_vals, rng, p, sink)
    s = polar_inverse_transform(c_top, p)
    plus = _renormalize(_plus_posterior(post[:, :half], post[:, half:], s, p))
    c_bot = _decode_block(plus, offset + half, frozen, frozen_vals, rng, p, sink)
    return np.concatenate([c_top, c_bot], axis=1)


# ---------------------------------------------------------------------------
# Code construction and the public encode/decode pair.
# ---------------------------------------------------------------------------

@dataclass
class PolarCode:
    """Index partition of the polar transform for one source law.

    z holds the per-index Bhattacharyya figures (method 'exact' or
    'monte-carlo'); indices with z <= 2^(-n^beta) form I0 and are
    reconstructed by the decoder, the rest form the codeword positions I1.
    """

    spec: FieldSpec
    k: int
    beta: float
    method: str
    z: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=np.float64)
        if self.z.shape != (self.n,):
            raise ValueError(f"need {self.n} z values, got {self.z.shape}")

    @property
    def n(self) -> int:
        return 1 << self.k

    @property
    def threshold(self) -> float:
        return 2.0 ** (-(float(self.n) ** self.beta))

    @property
    def I0(self) -> np.ndarray:
        return np.nonzero(self.z <= self.threshold)[0]

    @property
    def I1(self) -> np.ndarray:
        return np.nonzero(self.z > self.threshold)[0]

    @property
    def rate(self) -> float:
        return len(self.I1) / self.n

    def frozen_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.I1] = True
        return mask

    def serialize(self) -> str:
        lines = [f"{self.spec.p} {self.k} {float(self.beta)!r} {self.method}"]
        mask = self.frozen_mask()
        for i in range(self.n):
            lines.append(f"{i} {float(self.z[i])!r} {int(mask[i])}")
        return "\n".join(lines) + "\n"


def parse_polar_code(text: str) -> PolarCode:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty polar code file")
    toks = lines[0].split()
    if len(toks) != 4:
        raise ValueError(f"bad polar header {lines[0]!r}")
    p, k, beta, method = int(toks[0]), int(toks[1]), float(toks[2]), toks[3]
    n = 1 << k
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} index lines, got {len(lines) - 1}")
    z = np.zeros(n)
    flags = np.zeros(n, dtype=bool)
    for ln in lines[1:]:
        i_s, z_s, f_s = ln.split()
        z[int(i_s)] = float(z_s)
        flags[int(i_s)] = bool(int(f_s))
    code = PolarCode(spec=FieldSpec(p), k=k, beta=beta, method=method, z=z)
    if not np.array_equal(code.frozen_mask(), flags):
        raise ValueError("frozen flags inconsistent with z values and threshold")
    return code


def write_polar_code(code: PolarCode, path) -> None:
    with open(path, "w") as fh:
        fh.write(code.serialize())


def read_polar_code(path) -> PolarCode:
    with open(path) as fh:
        return parse_polar_code(fh.read())


def monte_carlo_bhattacharyya(law: JointSourceLaw, k: int, samples: int, seed,
                              batch: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """Per-index Z estimates from sampled true-path posteriors.

    Each sampled block contributes one term per index (the Bhattacharyya
    sum of the posterior at that index given the block's own prefix), so
    `samples` is the per-index sample budget. Returns (estimates, standard
    errors).
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    n = 1 << k
    p = law.p
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    total = np.zeros(n)
    total_sq = np.zeros(n)
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        s = law.sample_block(n * b, rng)
        x = s.x.reshape(b, n)
        y = s.y.reshape(b, n)
        c = polar_transform(x, p)
        post = law.pmf[:, y.reshape(-1)].T.reshape(b, n, p).astype(np.float64)
        path = _path_posteriors(post, c, p)
        z_terms = (np.sqrt(path).sum(axis=-1) ** 2 - 1.0) / (p - 1)
        total += z_terms.sum(axis=0)
        total_sq += (z_terms ** 2).sum(axis=0)
        done += b
    mean = total / samples
    var = np.maximum(total_sq / samples - mean ** 2, 0.0)
    stderr = np.sqrt(var / samples)
    return mean, stderr


def bhattacharyya(law: JointSourceLaw, k: int, i: int, method: str = "exact",
                  budget: int = 100_000, seed=None) -> tuple[float, float | None]:
    """Z(C_i | C_1^{i-1}, Y) for one index: exact value or (estimate, stderr)."""
    if method == "exact":
        w, cond = leaf_pair_law(law, k, i)
        return _pair_bhattacharyya(w, cond, law.p), None
    if method == "monte-carlo":
        mean, stderr = monte_carlo_bhattacharyya(law, k, budget, seed)
        return float(mean[i]), float(stderr[i])
    raise ValueError(f"unknown method {method!r}")


def construct(law: JointSourceLaw, k: int, beta: float = 0.3, method: str = "exact",
              budget: int = 100_000, seed=None) -> PolarCode:
    """Build the index partition for a law by computing or estimating every Z."""
    if not 0.0 < beta < 0.5:
        raise ValueError(f"beta must lie in (0, 1/2), got {beta}")
    if method == "exact":
        z = exact_bhattacharyya(law, k)
    elif method == "monte-carlo":
        z, _ = monte_carlo_bhattacharyya(law, k, budget, seed)
    else:
        raise ValueError(f"unknown method {method!r}")
    return PolarCode(spec=law.spec, k=k, beta=beta, method=method, z=z)


def polar_encode(code: PolarCode, x) -> np.ndarray:
    """Extended-codeword symbols at the codeword positions, ascending index."""
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (code.n,):
        raise ValueError(f"source block must have length {code.n}")
    c = polar_transform(x, code.spec.p)
    return c[code.I1]


def polar_decode(code: PolarCode, law: JointSourceLaw, c1, y, mode: str = "sc",
                 seed=None, want_trace: bool = False) -> DecodeResult:
    """SC or SSC decoding; frozen positions are copied from the codeword."""
    if mode not in ("sc", "ssc"):
        raise ValueError(f"unknown mode {mode!r}")
    if law.spec != code.spec:
        raise ValueError("code and law must share a field")
    c1 = np.asarray(c1, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    n, p = code.n, code.spec.p
    if c1.shape != (len(code.I1),):
        raise ValueError(f"codeword must have length {len(code.I1)}")
    if y.shape != (n,):
        raise ValueError(f"side information must have length {n}")
    rng = None
    if mode == "ssc":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    frozen = code.frozen_mask()
    frozen_vals = np.zeros((1, n), dtype=np.int64)
    frozen_vals[0, code.I1] = c1
    post = law.pmf[:, y].T[None, :, :].astype(np.float64)
    sink: list | None = [] if want_trace else None
    c_hat = _decode_block(post, 0, frozen, frozen_vals, rng, p, sink)
    x_hat = polar_inverse_transform(c_hat[0], p)
    if sink is not None:
        sink.sort(key=lambda d: d.index)
    return DecodeResult(x_hat=x_hat, trace=sink)


def as_extended_system(code: PolarCode):
    """The polar code as a general (non-ordered) extended-code system.

    The stacked map is the dense transform with codeword rows at I1, so
    the generic decoders and the exact error engine apply directly. Only
    sensible at small n (dense matrix plus enumeration downstream).
    """
    from .linalg import SparseMatrix, make_system

    t = dense_transform_matrix(code.k, code.spec.p)
    a = SparseMatrix.from_dense(code.spec, t[code.I1])
    b = SparseMatrix.from_dense(code.spec, t[code.I0])
    return make_system(a, b, I1=code.I1)


def polar_decode_batch(code: PolarCode, law: JointSourceLaw, c1: np.ndarray,
                       y: np.ndarray, mode: str = "sc", seed=None) -> np.ndarray:
    """Decode many independent trials at once; rows of c1/y are trials."""
    if mode not in ("sc", "ssc"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = None
    if mode == "ssc":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n, p = code.n, code.spec.p
    B = y.shape[0]
    frozen = code.frozen_mask()
    frozen_vals = np.zeros((B, n), dtype=np.int64)
    frozen_vals[:, code.I1] = c1
    post = law.pmf[:, y.reshape(-1)].T.reshape(B, n, p).astype(np.float64)
    c_hat = _decode_block(post, 0, frozen, frozen_vals, rng, p, None)
    return polar_inverse_transform(c_hat, p)
