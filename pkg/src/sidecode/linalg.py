"""Sparse matrices and extended-codeword systems over GF(p).

An encoder is a full-rank l x n matrix A. Stacking a complement matrix B
under it gives an invertible n x n map, so the pair (Ax, Bx) is a bijective
image of the source block x; inverting that map recovers x from the pair.
This module provides rank/inversion by Gaussian elimination, the column
permutation that moves an invertible l x l block to the right end of A, the
concrete complement B = [I | 0], seeded sparse full-rank sampling, and a
plain-text matrix file format.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gf import FieldSpec


class SingularMatrixError(ValueError):
    """Matrix is singular / rank-deficient where full rank is required."""


class RetryExhaustedError(RuntimeError):
    """Seeded random search gave up after its attempt budget."""


class SparseMatrix:
    """Row-sparse l x n matrix over GF(p).

    Rows are stored as parallel (column-index, value) arrays with strictly
    increasing indices and nonzero values. Matrices are immutable after
    construction.
    """

    def __init__(self, spec: FieldSpec, shape: tuple[int, int],
                 rows: list[list[tuple[int, int]]]):
        l, n = shape
        if len(rows) != l:
            raise ValueError(f"expected {l} rows, got {len(rows)}")
        self.spec = spec
        self.shape = (l, n)
        self.row_index: list[np.ndarray] = []
        self.row_value: list[np.ndarray] = []
        for r, entries in enumerate(rows):
            idx = np.array([i for i, _ in entries], dtype=np.int64)
            val = np.array([v for _, v in entries], dtype=np.int64)
            if idx.size:
                if idx.min() < 0 or idx.max() >= n:
                    raise ValueError(f"row {r}: column index out of range")
                if np.any(np.diff(idx) <= 0):
                    raise ValueError(f"row {r}: column indices must be strictly increasing")
                if np.any(val <= 0) or np.any(val >= spec.p):
                    raise ValueError(f"row {r}: stored values must be nonzero residues")
            self.row_index.append(idx)
            self.row_value.append(val)

    @classmethod
    def from_dense(cls, spec: FieldSpec, dense) -> "SparseMatrix":
        dense = np.asarray(dense, dtype=np.int64) % spec.p
        if dense.ndim != 2:
            raise ValueError("dense matrix must be 2-dimensional")
        rows = []
        for r in range(dense.shape[0]):
            nz = np.nonzero(dense[r])[0]
            rows.append([(int(i), int(dense[r, i])) for i in nz])
        return cls(spec, dense.shape, rows)

    def to_dense(self) -> np.ndarray:
        l, n = self.shape
        out = np.zeros((l, n), dtype=np.int64)
        for r in range(l):
            out[r, self.row_index[r]] = self.row_value[r]
        return out

    @property
    def max_row_weight(self) -> int:
        return max((idx.size for idx in self.row_index), default=0)

    def apply(self, x) -> np.ndarray:
        """Matrix-vector product over GF(p)."""
        x = np.asarray(x, dtype=np.int64)
        l, n = self.shape
        if x.shape[-1] != n:
            raise ValueError(f"vector length {x.shape[-1]} != {n} columns")
        p = self.spec.p
        out_shape = x.shape[:-1] + (l,)
        out = np.zeros(out_shape, dtype=np.int64)
        for r in range(l):
            if self.row_index[r].size:
                out[..., r] = (x[..., self.row_index[r]] * self.row_value[r]).sum(axis=-1) % p
        return out

    def column_slice(self, start: int) -> "SparseMatrix":
        """Sub-matrix of columns start..n-1 (used by the syndrome recursion)."""
        l, n = self.shape
        rows = []
        for r in range(l):
            keep = self.row_index[r] >= start
            rows.append(list(zip((self.row_index[r][keep] - start).tolist(),
                                 self.row_value[r][keep].tolist())))
        return SparseMatrix(self.spec, (l, n - start), rows)

    def column(self, j: int) -> np.ndarray:
        """Dense column j."""
        l = self.shape[0]
        out = np.zeros(l, dtype=np.int64)
        for r in range(l):
            pos = np.searchsorted(self.row_index[r], j)
            if pos < self.row_index[r].size and self.row_index[r][pos] == j:
                out[r] = self.row_value[r][pos]
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.spec == other.spec and self.shape == other.shape
                and all(np.array_equal(a, b) for a, b in zip(self.row_index, other.row_index))
                and all(np.array_equal(a, b) for a, b in zip(self.row_value, other.row_value)))

    def __repr__(self) -> str:
        return f"SparseMatrix({self.spec}, shape={self.shape}, w={self.max_row_weight})"


def _row_echelon(dense: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """In-place-free row echelon form; returns (reduced matrix, pivot columns)."""
    m = dense.copy() % p
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        pr = r + nz[0]
        if pr != r:
            m[[r, pr]] = m[[pr, r]]
        inv = pow(int(m[r, c]), p - 2, p)
        m[r] = (m[r] * inv) % p
        for rr in range(rows):
            if rr != r and m[rr, c]:
                m[rr] = (m[rr] - m[rr, c] * m[r]) % p
        pivots.append(c)
        r += 1
    return m, pivots


def rank(M: SparseMatrix) -> int:
    """Row rank over GF(p)."""
    _, pivots = _row_echelon(M.to_dense(), M.spec.p)
    return len(pivots)


def invert(M: SparseMatrix) -> SparseMatrix:
    """Inverse of a square full-rank matrix; raises SingularMatrixError."""
    l, n = M.shape
    if l != n:
        raise SingularMatrixError(f"matrix is {l}x{n}, not square")
    inv_dense = invert_dense(M.to_dense(), M.spec.p)
    return SparseMatrix.from_dense(M.spec, inv_dense)


def invert_dense(dense: np.ndarray, p: int) -> np.ndarray:
    n = dense.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    aug = np.concatenate([dense % p, np.eye(n, dtype=np.int64)], axis=1)
    red, pivots = _row_echelon(aug, p)
    if pivots != list(range(n)):
        raise SingularMatrixError("matrix is singular over GF(p)")
    return red[:, n:]


def solve_dense(dense: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """One solution x of dense @ x = b (mod p); raises if inconsistent."""
    rows, cols = dense.shape
    aug = np.concatenate([dense % p, (np.asarray(b, dtype=np.int64) % p)[:, None]], axis=1)
    red, pivots = _row_echelon(aug, p)
    if cols in pivots:
        raise SingularMatrixError("system is inconsistent")
    x = np.zeros(cols, dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = red[r, cols]
    return x


def null_space(dense: np.ndarray, p: int) -> np.ndarray:
    """Basis of the right null space, one vector per row (possibly empty)."""
    rows, cols = dense.shape
    red, pivots = _row_echelon(dense, p)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, fc in enumerate(free):
        basis[k, fc] = 1
        for r, pc in enumerate(pivots):
            basis[k, pc] = (-red[r, fc]) % p
    return basis


def permute_columns_full_rank_tail(A: SparseMatrix) -> tuple[SparseMatrix, np.ndarray]:
    """Column permutation moving an invertible l x l block to the right end.

    Returns (AS, perm) with AS[:, k] = A[:, perm[k]] and the rightmost l
    columns of AS linearly independent. Pivot columns are found greedily
    left to right, so the result is deterministic. The permuted encoder
    satisfies AS.apply(x[perm]) == A.apply(x) for every x.
    """
    l, n = A.shape
    dense = A.to_dense()
    _, pivots = _row_echelon(dense, A.spec.p)
    if len(pivots) != l:
        raise SingularMatrixError(f"rank {len(pivots)} < {l}: no invertible column block")
    identity = np.arange(n, dtype=np.int64)
    if l == 0 or len(_row_echelon(dense[:, n - l:], A.spec.p)[1]) == l:
        return A, identity
    non_pivots = [c for c in range(n) if c not in pivots]
    perm = np.array(non_pivots + pivots, dtype=np.int64)
    return SparseMatrix.from_dense(A.spec, dense[:, perm]), perm


@dataclass
class ExtendedCodeSystem:
    """Encoder A, complement B, and the stacked bijection between x and (Ax, Bx).

    The extended codeword c interleaves the two outputs: c[I1] = Ax and
    c[I0] = Bx. ``stacked`` is the n x n matrix realizing x -> c and
    ``stacked_inv`` its inverse, so decoding a full extended codeword back
    to the source block is a single matrix-vector product.
    """

    A: SparseMatrix
    B: SparseMatrix
    I0: np.ndarray
    I1: np.ndarray
    stacked: np.ndarray = field(repr=False)
    stacked_inv: np.ndarray = field(repr=False)

    @property
    def spec(self) -> FieldSpec:
        return self.A.spec

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def l(self) -> int:
        return self.A.shape[0]

    @property
    def ordered(self) -> bool:
        return bool(np.array_equal(self.I1, np.arange(self.l)))

    def encode(self, x) -> np.ndarray:
        return self.A.apply(x)

    def extended_codeword(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        return (x @ self.stacked.T) % self.spec.p

    def interleave(self, c1, c0) -> np.ndarray:
        c = np.zeros(self.n, dtype=np.int64)
        c[self.I1] = np.asarray(c1, dtype=np.int64)
        c[self.I0] = np.asarray(c0, dtype=np.int64)
        return c

    def split(self, c) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(c, dtype=np.int64)
        return c[self.I1], c[self.I0]


def make_system(A: SparseMatrix, B: SparseMatrix, I1=None) -> ExtendedCodeSystem:
    """Assemble an ExtendedCodeSystem from explicit A, B and codeword indices.

    I1 defaults to {0..l-1} (ordered). Raises SingularMatrixError when the
    interleaved stacked matrix is not invertible.
    """
    l, n = A.shape
    nl, n2 = B.shape
    if n2 != n or nl != n - l:
        raise ValueError(f"B must be {n - l}x{n}, got {nl}x{n2}")
    if A.spec != B.spec:
        raise ValueError("A and B must share a field")
    if I1 is None:
        I1 = np.arange(l, dtype=np.int64)
    I1 = np.asarray(I1, dtype=np.int64)
    if I1.size != l or (l and (np.any(np.diff(np.sort(I1)) == 0))):
        raise ValueError("I1 must contain l distinct indices")
    mask = np.ones(n, dtype=bool)
    mask[I1] = False
    I0 = np.nonzero(mask)[0].astype(np.int64)
    stacked = np.zeros((n, n), dtype=np.int64)
    stacked[I1] = A.to_dense()
    stacked[I0] = B.to_dense()
    stacked_inv = invert_dense(stacked, A.spec.p)
    return ExtendedCodeSystem(A=A, B=B, I0=I0, I1=I1, stacked=stacked, stacked_inv=stacked_inv)


def build_complement(A: SparseMatrix) -> ExtendedCodeSystem:
    """Ordered extended-codeword system with complement B = [I | 0].

    Requires the rightmost l x l block of A to be invertible (run
    permute_columns_full_rank_tail first if it is not). With this B the
    complement output is simply the first n-l source symbols.
    """
    l, n = A.shape
    dense = A.to_dense()
    tail = dense[:, n - l:]
    try:
        invert_dense(tail, A.spec.p)
    except SingularMatrixError:
        raise SingularMatrixError("rightmost l x l block of A is not invertible")
    b_dense = np.zeros((n - l, n), dtype=np.int64)
    b_dense[:, :n - l] = np.eye(n - l, dtype=np.int64)
    B = SparseMatrix.from_dense(A.spec, b_dense)
    return make_system(A, B)


def q_map(sys: ExtendedCodeSystem, c1, c0) -> np.ndarray:
    """The unique x with Ax = c1 and Bx = c0."""
    c = sys.interleave(c1, c0)
    return (c @ sys.stacked_inv.T) % sys.spec.p


def sample_sparse_full_rank(n: int, l: int, w: int, seed: int,
                            spec: FieldSpec | None = None,
                            max_attempts_per_row: int = 500) -> SparseMatrix:
    """Seeded random full-rank l x n matrix with row weight <= w.

    Rows are drawn one at a time and kept only when they increase the rank,
    so the same seed always yields the same matrix. Raises
    RetryExhaustedError when a row cannot be extended within the attempt
    budget (e.g. w too small for the remaining rank deficit).
    """
    if spec is None:
        spec = FieldSpec(2)
    if not 1 <= l <= n:
        raise ValueError(f"need 1 <= l <= n, got l={l}, n={n}")
    if w < 1:
        raise ValueError(f"row weight bound must be >= 1, got {w}")
    p = spec.p
    rng = np.random.default_rng(seed)
    kept: list[np.ndarray] = []
    basis = np.zeros((0, n), dtype=np.int64)
    while len(kept) < l:
        for attempt in range(max_attempts_per_row):
            weight = int(rng.integers(1, min(w, n) + 1))
            cols = np.sort(rng.choice(n, size=weight, replace=False))
            vals = rng.integers(1, p, size=weight)
            row = np.zeros(n, dtype=np.int64)
            row[cols] = vals
            candidate = np.concatenate([basis, row[None, :]], axis=0)
            if len(_row_echelon(candidate, p)[1]) == basis.shape[0] + 1:
                kept.append(row)
                basis = candidate
                break
        else:
            raise RetryExhaustedError(
                f"could not extend to rank {l} within {max_attempts_per_row} attempts per row")
    return SparseMatrix.from_dense(spec, np.stack(kept))


def serialize_matrix(M: SparseMatrix) -> str:
    """Text form: header 'p l n', then one 'k idx:val ...' line per row."""
    l, n = M.shape
    lines = [f"{M.spec.p} {l} {n}"]
    for r in range(l):
        parts = [str(M.row_index[r].size)]
        parts += [f"{int(i)}:{int(v)}" for i, v in zip(M.row_index[r], M.row_value[r])]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> SparseMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    try:
        p, l, n = (int(tok) for tok in lines[0].split())
    except Exception as exc:
        raise ValueError(f"bad matrix header {lines[0]!r}") from exc
    spec = FieldSpec(p)
    if len(lines) != l + 1:
        raise ValueError(f"expected {l} rows, file has {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        toks = ln.split()
        k = int(toks[0])
        if len(toks) != k + 1:
            raise ValueError(f"row declares {k} entries but has {len(toks) - 1}")
        entries = []
        for tok in toks[1:]:
            i, v = tok.split(":")
            entries.append((int(i), int(v)))
        rows.append(entries)
    return SparseMatrix(spec, (l, n), rows)


def write_matrix(M: SparseMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_matrix(M))


def read_matrix(path) -> SparseMatrix:
    with open(path) as fh:
        return parse_matrix(fh.read())
