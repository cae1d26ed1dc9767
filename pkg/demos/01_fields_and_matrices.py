"""Walk through the algebra layer: prime fields, sparse encoders, and the
extended-codeword bijection.

A source block x of n symbols from GF(p) is compressed to l < n symbols by
a full-rank sparse matrix A. Stacking a complement B underneath makes the
map x -> (Ax, Bx) invertible, so the l transmitted symbols plus the n - l
"missing" ones pin x down exactly. Everything the decoders do later is a
fight over those missing symbols.
"""

import numpy as np

from sidecode import (
    FieldSpec,
    build_complement,
    permute_columns_full_rank_tail,
    q_map,
    rank,
    sample_sparse_full_rank,
)
from sidecode.linalg import serialize_matrix

# --- scalar field arithmetic ------------------------------------------------

gf5 = FieldSpec(5)
a, b = gf5.element(3), gf5.element(4)
print(f"GF(5): 3 + 4 = {(a + b).value}, 3 * 4 = {(a * b).value}, "
      f"inv(3) = {gf5.element(3).inverse().value}")

# --- a seeded sparse encoder ------------------------------------------------

spec = FieldSpec(2)
A = sample_sparse_full_rank(n=8, l=4, w=3, seed=1, spec=spec)
print("\nrandom sparse encoder A (dense view):")
print(A.to_dense())
print("rank:", rank(A), " max row weight:", A.max_row_weight)

# The decoding loop wants the rightmost l x l block invertible. A column
# permutation arranges that without changing the code.
A_perm, perm = permute_columns_full_rank_tail(A)
print("column order after permutation:", perm)

# --- the extended-codeword system --------------------------------------------

sys = build_complement(A_perm)
print("\ncomplement B is [I | 0]; the stacked map is invertible:")
print(sys.stacked)

x = np.array([1, 0, 1, 1, 0, 0, 1, 0])
c1 = sys.encode(x)
c0 = sys.B.apply(x)
print(f"\nx  = {x}")
print(f"c1 = Ax = {c1}   (the transmitted codeword, {len(c1)} of {len(x)} symbols)")
print(f"c0 = Bx = {c0}   (= the first n-l source symbols for this B)")
print("q_map recovers x exactly:", np.array_equal(q_map(sys, c1, c0), x))

# exhaustive bijectivity check: all 2^8 blocks map to distinct pairs
images = {tuple(sys.extended_codeword(np.array(v)))
          for v in np.ndindex(*(2,) * 8)}
print("distinct extended codewords over all 256 blocks:", len(images))

# --- file format --------------------------------------------------------------

print("\nmatrix file format (header 'p l n', one sparse row per line):")
print(serialize_matrix(A_perm))
