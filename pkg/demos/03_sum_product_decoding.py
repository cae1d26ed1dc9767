"""The streaming decoder for sparse encoders: syndrome updates plus
factor-graph message passing.

Enumerating all p^n blocks stops scaling quickly. For a sparse A the stage
conditional is a constrained marginal on a factor graph, so each free
symbol can be fixed from a few sum-product iterations; after each decision
the symbol's column is subtracted from the running syndrome, and the last
l symbols come from one small matrix inverse.
"""

import time

import numpy as np

from sidecode import (
    ConditionalModel,
    FieldSpec,
    build_complement,
    decode_sc,
    permute_columns_full_rank_tail,
    sample_sparse_full_rank,
    symmetric_channel_law,
)
from sidecode.sim import monte_carlo_error
from sidecode.sumproduct import run_sc_ssc_algorithm

spec = FieldSpec(2)
law = symmetric_channel_law(spec, 0.05)

# --- exact vs message passing on a small instance ------------------------------

A, _ = permute_columns_full_rank_tail(sample_sparse_full_rank(8, 4, 3, seed=1, spec=spec))
sys = build_complement(A)
model = ConditionalModel(sys, law)

sample = law.sample_block(8, seed=5)
c1 = sys.encode(sample.x)
exact = decode_sc(model, c1, sample.y)
stream_exact = run_sc_ssc_algorithm(sys, law, c1, sample.y, method="exact")
stream_sp = run_sc_ssc_algorithm(sys, law, c1, sample.y, method="sum-product",
                                 iterations=20)
print(f"x            = {sample.x}")
print(f"enumeration  = {exact.x_hat}")
print(f"syndrome/exact = {stream_exact.x_hat}   (identical decisions)")
print(f"syndrome/sp    = {stream_sp.x_hat}")

# --- larger block: enumeration is gone, message passing still runs -------------

A, _ = permute_columns_full_rank_tail(sample_sparse_full_rank(32, 20, 4, seed=2, spec=spec))
big = build_complement(A)

t0 = time.time()
est = monte_carlo_error(big, law, "sp-sc", n_trials=60, seed=9, iterations=8)
print(f"\nn=32, l=20 sparse code, 5% flip side info, sum-product SC:")
print(f"  block error ~ {est.estimate:.3f}  (95% CI [{est.ci_low:.3f}, {est.ci_high:.3f}], "
      f"{time.time() - t0:.1f}s for {est.trials} trials)")

est_ssc = monte_carlo_error(big, law, "sp-ssc", n_trials=60, seed=9, iterations=8)
print(f"  stochastic variant         ~ {est_ssc.estimate:.3f}"
      f"  (CI [{est_ssc.ci_low:.3f}, {est_ssc.ci_high:.3f}])")
print("\nrandom weight-<=4 rows leave some source symbols uncovered by any")
print("check, so these throwaway codes are weak; the point here is the")
print("machinery, and that the stochastic rule stays in the same error range")
print("while sampling the reconstruction from its posterior")
