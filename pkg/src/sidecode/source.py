"""Memoryless joint source / side-information models.

A JointSourceLaw is a single-letter joint pmf on X x Y where X = GF(p) and
Y is an abstract finite set (the decoder-only side information; nothing is
ever computed algebraically on Y). Blocks are i.i.d. across coordinates.
Entropies and log-probabilities use log base |X| throughout, matching the
convention used by every bound in this package.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .gf import FieldSpec

MAX_Y_SIZE = 64
_PMF_TOL = 1e-12


@dataclass(frozen=True)
class BlockSample:
    """A source block and its side-information block, same length."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("x and y blocks must have the same length")


class JointSourceLaw:
    """Single-letter joint pmf mu(x, y) with X = GF(p), |Y| <= 64."""

    def __init__(self, spec: FieldSpec, pmf):
        pmf = np.asarray(pmf, dtype=np.float64)
        if pmf.ndim != 2 or pmf.shape[0] != spec.p:
            raise ValueError(f"pmf must be {spec.p} x |Y|, got shape {pmf.shape}")
        if pmf.shape[1] < 1 or pmf.shape[1] > MAX_Y_SIZE:
            raise ValueError(f"|Y| must be in [1, {MAX_Y_SIZE}], got {pmf.shape[1]}")
        if np.any(pmf < 0):
            raise ValueError("pmf entries must be nonnegative")
        if abs(pmf.sum() - 1.0) > _PMF_TOL:
            raise ValueError(f"pmf sums to {pmf.sum()!r}, not 1")
        self.spec = spec
        self.pmf = pmf
        self.y_size = pmf.shape[1]
        self.y_marginal = pmf.sum(axis=0)
        self.x_marginal = pmf.sum(axis=1)
        # conditional columns mu(x | y); zero-probability y keeps a zero column
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = pmf / self.y_marginal[None, :]
        cond[:, self.y_marginal == 0] = 0.0
        self.cond_x_given_y = cond

    @property
    def p(self) -> int:
        return self.spec.p

    def conditional_entropy(self) -> float:
        """H(X|Y) in base-|X| units."""
        h = 0.0
        for y in range(self.y_size):
            wy = self.y_marginal[y]
            if wy == 0:
                continue
            h += wy * entropy_base(self.cond_x_given_y[:, y], self.p)
        return h

    def sample_block(self, n: int, seed) -> BlockSample:
        """n i.i.d. draws from the joint pmf; reproducible from the seed."""
        if n < 1:
            raise ValueError(f"block length must be >= 1, got {n}")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        flat = rng.choice(self.p * self.y_size, size=n, p=self.pmf.reshape(-1))
        return BlockSample(x=flat // self.y_size, y=flat % self.y_size)

    def block_log_prob(self, x, y) -> float:
        """Sum of per-symbol log mu(x_i | y_i), base |X|; -inf on zero mass."""
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        if x.shape != y.shape:
            raise ValueError("x and y must have the same length")
        if np.any(self.y_marginal[y] == 0):
            raise ValueError("side-information symbol with zero marginal probability")
        probs = self.cond_x_given_y[x, y]
        if np.any(probs == 0):
            return -math.inf
        return float(np.log(probs).sum() / math.log(self.p))

    def typical_set_membership(self, x, y, epsilon: float) -> bool:
        """Whether |log mu(x|y) + n H(X|Y)| <= n epsilon (log base |X|)."""
        n = len(np.asarray(x))
        lp = self.block_log_prob(x, y)
        return abs(lp + n * self.conditional_entropy()) <= n * epsilon + 1e-12

    def serialize(self) -> str:
        lines = [f"{self.p} {self.y_size}"]
        for row in self.pmf:
            lines.append(" ".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"JointSourceLaw(GF({self.p}), |Y|={self.y_size})"


def entropy_base(probs: np.ndarray, base: int | float) -> float:
    """Shannon entropy of a pmf vector in the given log base; 0 log 0 = 0."""
    probs = np.asarray(probs, dtype=np.float64)
    nz = probs[probs > 0]
    if nz.size == 0:
        return 0.0
    return float(-(nz * np.log(nz)).sum() / math.log(base))


def binary_entropy(theta: float, base: int | float = 2) -> float:
    """h(theta) = -theta log theta - (1-theta) log(1-theta), given log base."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    if theta in (0.0, 1.0):
        return 0.0
    lg = math.log(base)
    return (-theta * math.log(theta) - (1 - theta) * math.log(1 - theta)) / lg


def symmetric_channel_law(spec: FieldSpec, flip: float) -> JointSourceLaw:
    """Uniform X observed through a p-ary symmetric channel: Y = X with
    probability 1-flip, otherwise uniform over the other p-1 symbols.
    For p = 2 this is the usual binary symmetric pair."""
    p = spec.p
    if not 0.0 <= flip <= 1.0:
        raise ValueError(f"flip probability must lie in [0, 1], got {flip}")
    pmf = np.full((p, p), flip / (p - 1) / p if p > 1 else 0.0)
    np.fill_diagonal(pmf, (1.0 - flip) / p)
    return JointSourceLaw(spec, pmf)


def noiseless_law(spec: FieldSpec) -> JointSourceLaw:
    """Uniform X with Y = X: the decoder sees the source exactly."""
    return JointSourceLaw(spec, np.eye(spec.p) / spec.p)


def uniform_independent_law(spec: FieldSpec, y_size: int = 1) -> JointSourceLaw:
    """Uniform X independent of a uniform Y: side information is useless."""
    p = spec.p
    return JointSourceLaw(spec, np.full((p, y_size), 1.0 / (p * y_size)))


def random_law(spec: FieldSpec, y_size: int, seed, alpha: float = 1.0,
               max_attempts: int = 100) -> JointSourceLaw:
    """Symmetric-Dirichlet random joint law, rejecting degenerate draws.

    A draw is rejected when any x-row or y-column carries zero mass, so
    every conditional the decoders form is well defined.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(max_attempts):
        flat = rng.dirichlet(np.full(spec.p * y_size, alpha))
        pmf = flat.reshape(spec.p, y_size)
        if pmf.sum(axis=0).min() > 1e-6 and pmf.sum(axis=1).min() > 1e-6:
            pmf = pmf / pmf.sum()
            return JointSourceLaw(spec, pmf)
    raise RuntimeError("could not draw a non-degenerate law")


def parse_law(text: str) -> JointSourceLaw:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty law file")
    try:
        p, y_size = (int(tok) for tok in lines[0].split())
    except Exception as exc:
        raise ValueError(f"bad law header {lines[0]!r}") from exc
    spec = FieldSpec(p)
    if len(lines) != p + 1:
        raise ValueError(f"expected {p} pmf rows, file has {len(lines) - 1}")
    pmf = np.array([[float(tok) for tok in ln.split()] for ln in lines[1:]])
    if pmf.shape[1] != y_size:
        raise ValueError(f"rows have {pmf.shape[1]} entries, header says {y_size}")
    return JointSourceLaw(spec, pmf)


def write_law(law: JointSourceLaw, path) -> None:
    with open(path, "w") as fh:
        fh.write(law.serialize())


def read_law(path) -> JointSourceLaw:
    with open(path) as fh:
        return parse_law(fh.read())
