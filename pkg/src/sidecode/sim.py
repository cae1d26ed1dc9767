"""Verification harness: exhaustive bound checks, entropy diagnostics, and
Monte Carlo error estimation.

Every optimality relation between the decoders is re-derived here as a
concrete inequality on a concrete instance and checked numerically:
exactly (full enumeration, tolerance 1e-9, identities 1e-12) on small
blocks, by Monte Carlo with Wilson intervals beyond. Statistical checks
never hard-fail on ordinary sampling noise; they only flag a violation
when the confidence interval excludes the bound.

Unit convention: entropies are kept in log base |X|. The decision-error
constants are stated against log 2, so the conversion factor
log(p)/log(2) is applied in exactly one place (`_LOG2_IN_BASE_P`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import math

import numpy as np

from .decoders import ConditionalModel, model_engine
from .gf import FieldSpec
from .linalg import ExtendedCodeSystem, build_complement, \
    permute_columns_full_rank_tail, sample_sparse_full_rank
from .polar import PolarCode, exact_stage_entropies, polar_decode_batch, \
    polar_encode, polar_transform
from .source import JointSourceLaw, binary_entropy, random_law
from .sumproduct import run_sc_ssc_algorithm

EXACT_TOL = 1e-9
IDENTITY_TOL = 1e-12
WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass
class BoundReport:
    """One checked inequality: satisfied iff lhs <= rhs + tolerance.

    Exact reports carry no trial counts; statistical ones carry the Wilson
    interval of the lhs estimate and are only marked unsatisfied when the
    interval lies entirely above the bound.
    """

    bound_id: str
    lhs: float
    rhs: float
    satisfied: bool
    method: str = "exact"
    trials: int | None = None
    ci_low: float | None = None
    ci_high: float | None = None


def _exact(bound_id: str, lhs: float, rhs: float, tol: float = EXACT_TOL) -> BoundReport:
    return BoundReport(bound_id=bound_id, lhs=float(lhs), rhs=float(rhs),
                       satisfied=bool(lhs <= rhs + tol))


def _identity(bound_id: str, a: float, b: float, tol: float = IDENTITY_TOL) -> BoundReport:
    return BoundReport(bound_id=bound_id, lhs=float(abs(a - b)), rhs=0.0,
                       satisfied=bool(abs(a - b) <= tol))


def _log2_in_base_p(p: int) -> float:
    return math.log(2) / math.log(p)


def check_bounds(target, law: JointSourceLaw, epsilon: float = 0.1,
                 prefix: str = "", bound_set: set[str] | None = None) -> list[BoundReport]:
    """Evaluate the decoder-inequality suite on one instance.

    Covers: symbol-wise MAP against n times the block-MAP and typical-set
    errors; SC against n times MAP (ordered systems); SSC against twice
    MAP (analytic path-sum, so the factor-two check is exact); the
    source/codeword-space error identity for SC and SSC; the union bound
    over first-error stages; the per-stage optimality bound; both entropy
    upper bounds on SC/SSC error; the chain-rule identity behind the
    quasi-polarization equivalence; and the Fano-side entropy bounds.

    `target` is an ExtendedCodeSystem or a small PolarCode (evaluated
    through its equivalent system, skipping the ordered-only checks).
    `bound_set` keeps only the listed bound ids. If the instance exceeds
    the enumeration budget a single skipped-marker row is returned instead
    of a partial result.
    """
    from .decoders import EnumerationBudgetError
    from .polar import as_extended_system

    if isinstance(target, PolarCode):
        sys = as_extended_system(target)
    elif isinstance(target, ExtendedCodeSystem):
        sys = target
    else:
        raise TypeError(f"unsupported target {type(target).__name__}")
    try:
        reports = _check_bounds_system(sys, law, epsilon, prefix)
    except EnumerationBudgetError:
        return [BoundReport(bound_id=prefix + "suite-skipped", lhs=math.nan,
                            rhs=math.nan, satisfied=True, method="skipped")]
    if bound_set is not None:
        reports = [r for r in reports
                   if r.bound_id.removeprefix(prefix) in bound_set]
    return reports


def _check_bounds_system(sys: ExtendedCodeSystem, law: JointSourceLaw,
                         epsilon: float, prefix: str) -> list[BoundReport]:
    model = ConditionalModel(sys, law)
    engine = model_engine(model)
    n, p, l = model.n, model.p, sys.l
    log2p = _log2_in_base_p(p)

    e_map = engine.map_error()
    e_smap = engine.smap_error()
    e_typ = engine.typical_error(epsilon)
    e_sc = engine.sc_error()
    e_f_sc = engine.f_error_sc()
    e_ssc = engine.ssc_error()
    e_f_ssc = engine.f_error_ssc()
    stage_errs = engine.stage_error_probabilities()
    entropies = engine.stage_entropies()
    i0 = [int(v) for v in sys.I0]
    i1 = [int(v) for v in sys.I1]
    h_i0 = float(entropies[i0].sum()) if i0 else 0.0
    h_i1 = float(entropies[i1].sum()) if i1 else 0.0
    h_block = n * law.conditional_entropy()

    reports = [
        _exact(prefix + "smap-vs-n-map", e_smap, n * e_map),
        _exact(prefix + "smap-vs-n-typical", e_smap, n * e_typ),
        _exact(prefix + "ssc-vs-2-map", e_ssc, 2 * e_map),
        _identity(prefix + "sc-source-vs-codeword-error", e_sc, e_f_sc),
        _identity(prefix + "ssc-source-vs-codeword-error", e_ssc, e_f_ssc),
        _exact(prefix + "sc-union-bound", e_f_sc, float(stage_errs.sum())),
        _exact(prefix + "sc-entropy-bound", e_sc, h_i0 / (2 * log2p)),
        _exact(prefix + "ssc-entropy-bound", e_ssc, h_i0 / log2p),
        _identity(prefix + "stage-entropy-chain-rule", float(entropies.sum()), h_block),
        _identity(prefix + "quasi-polarization-split", h_i0, h_block - h_i1),
        _exact(prefix + "sc-fano-bound", h_i0,
               n * (e_sc + binary_entropy(e_sc, base=p))),
        _exact(prefix + "ssc-fano-bound", h_i0,
               n * (e_ssc + binary_entropy(e_ssc, base=p))),
    ]
    if sys.ordered:
        reports.append(_exact(prefix + "sc-vs-n-map", e_sc, n * e_map))
        worst = float(stage_errs[i0].max()) if i0 else 0.0
        reports.append(_exact(prefix + "stage-error-vs-map", worst, e_map))
        if e_map == 0.0:
            rhs = 0.0
        else:
            rhs = e_map * (n + math.log(1 / e_map, p) + math.log(math.e, p))
        reports.append(_exact(prefix + "complement-entropy-vs-map-fano", h_i0, rhs))
    return reports


# ---------------------------------------------------------------------------
# Randomized instances and the default suite.
# ---------------------------------------------------------------------------

@dataclass
class Instance:
    sys: ExtendedCodeSystem
    law: JointSourceLaw
    label: str


def random_instance(seed: int) -> Instance:
    """Seeded random ordered system plus a non-degenerate Dirichlet law."""
    rng = np.random.default_rng(seed)
    p = int(rng.choice([2, 3]))
    n = int(rng.integers(3, 7))
    l = int(rng.integers(1, n))
    y_size = int(rng.choice([2, 3]))
    spec = FieldSpec(p)
    w = int(rng.integers(2, 4))
    a = sample_sparse_full_rank(n, l, w, seed=int(rng.integers(2 ** 31)), spec=spec)
    ap, _ = permute_columns_full_rank_tail(a)
    sys = build_complement(ap)
    law = random_law(spec, y_size, seed=rng)
    return Instance(sys=sys, law=law, label=f"p{p}-n{n}-l{l}-s{seed}")


def default_bound_suite(instances: int = 20, seed: int = 0, epsilon: float = 0.1,
                        threads: int = 1) -> list[BoundReport]:
    """The bound suite over seeded random instances plus the finite-joint
    argmax/marginal checks. Instances are independent; with threads > 1
    they run in a pool and the reports are merged in instance order."""
    def run(k: int) -> list[BoundReport]:
        inst = random_instance(seed + k)
        return check_bounds(inst.sys, inst.law, epsilon=epsilon,
                            prefix=inst.label + ":")

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(run, range(instances)))
    else:
        chunks = [run(k) for k in range(instances)]
    reports: list[BoundReport] = [r for chunk in chunks for r in chunk]
    reports.extend(check_appendix_identities(seed=seed, count=max(instances * 5, 100)))
    return reports


def argmax_more_info_margin(rng: np.random.Generator) -> tuple[float, float]:
    """(error with both conditioning variables, error with one) for a random
    finite joint; the first must never exceed the second."""
    nu, nv, nw = (int(rng.integers(2, 5)) for _ in range(3))
    mu = rng.dirichlet(np.ones(nu * nv * nw)).reshape(nu, nv, nw)
    err_vw = 0.0
    for v in range(nv):
        for w in range(nw):
            col = mu[:, v, w]
            err_vw += col.sum() - col[int(np.argmax(col))]
    err_v = 0.0
    for v in range(nv):
        col = mu[:, v, :].sum(axis=1)
        err_v += col.sum() - col[int(np.argmax(col))]
    return float(err_vw), float(err_v)


def equal_pair_marginal_gap(rng: np.random.Generator) -> float:
    """Largest deviation between the two pair marginals of a triple with
    identical first components; exactly zero by construction."""
    nu = int(rng.integers(2, 5))
    nw = int(rng.integers(2, 5))
    mu_uw = rng.dirichlet(np.ones(nu * nw)).reshape(nu, nw)
    mu_uvw = np.zeros((nu, nu, nw))
    for u in range(nu):
        mu_uvw[u, u, :] = mu_uw[u, :]
    return float(np.abs(mu_uvw.sum(axis=1) - mu_uvw.sum(axis=0)).max())


def check_appendix_identities(seed: int, count: int = 100) -> list[BoundReport]:
    """Aggregate checks over `count` random finite joints."""
    rng = np.random.default_rng(seed)
    worst_margin = -math.inf
    for _ in range(count):
        lhs, rhs = argmax_more_info_margin(rng)
        worst_margin = max(worst_margin, lhs - rhs)
    rng = np.random.default_rng(seed + 1)
    worst_gap = max(equal_pair_marginal_gap(rng) for _ in range(count))
    return [
        BoundReport(bound_id=f"argmax-extra-conditioning[{count}]",
                    lhs=float(worst_margin), rhs=0.0,
                    satisfied=bool(worst_margin <= IDENTITY_TOL)),
        BoundReport(bound_id=f"equal-pair-marginals[{count}]",
                    lhs=float(worst_gap), rhs=0.0,
                    satisfied=bool(worst_gap <= IDENTITY_TOL)),
    ]


# ---------------------------------------------------------------------------
# Entropy / polarization diagnostics.
# ---------------------------------------------------------------------------

@dataclass
class PolarizationProfile:
    """Per-index conditional entropies and their split across the partition."""

    entropies: np.ndarray
    i0: np.ndarray
    i1: np.ndarray
    i0_sum: float
    i1_sum: float
    block_conditional_entropy: float
    reports: list[BoundReport] = field(default_factory=list)

    @property
    def delta(self) -> float:
        return self.i0_sum


def polarization_profile(target, law: JointSourceLaw,
                         reference_errors: dict[str, float] | None = None,
                         ordered: bool | None = None) -> PolarizationProfile:
    """Per-index H(C_i | C_1^{i-1}, Y) with partial sums and Fano-side checks.

    `target` is an ExtendedCodeSystem (exact enumeration) or a PolarCode
    (leaf-law recursion). `reference_errors` may carry decoder error
    probabilities under keys 'sc', 'ssc' and 'map' to enable the
    error-to-entropy bounds; for systems they are computed exactly when
    omitted.
    """
    if isinstance(target, PolarCode):
        entropies = exact_stage_entropies(law, target.k)
        i0, i1 = target.I0, target.I1
        n = target.n
        is_ordered = False
        p = target.spec.p
        errors = dict(reference_errors or {})
    elif isinstance(target, ExtendedCodeSystem):
        model = ConditionalModel(target, law)
        engine = model_engine(model)
        entropies = engine.stage_entropies()
        i0, i1 = target.I0, target.I1
        n = target.n
        is_ordered = target.ordered
        p = target.spec.p
        if reference_errors is None:
            errors = {"sc": engine.sc_error(), "ssc": engine.ssc_error(),
                      "map": engine.map_error()}
        else:
            errors = dict(reference_errors)
    else:
        raise TypeError(f"unsupported target {type(target).__name__}")
    if ordered is not None:
        is_ordered = ordered
    i0_sum = float(entropies[i0].sum()) if len(i0) else 0.0
    i1_sum = float(entropies[i1].sum()) if len(i1) else 0.0
    h_block = n * law.conditional_entropy()
    reports = [_identity("stage-entropy-chain-rule", float(entropies.sum()), h_block)]
    for key in ("sc", "ssc"):
        if key in errors:
            eps = errors[key]
            reports.append(_exact(f"{key}-fano-bound", i0_sum,
                                  n * (eps + binary_entropy(eps, base=p))))
    if is_ordered and "map" in errors:
        eps = errors["map"]
        rhs = 0.0 if eps == 0.0 else eps * (n + math.log(1 / eps, p) + math.log(math.e, p))
        reports.append(_exact("complement-entropy-vs-map-fano", i0_sum, rhs))
    return PolarizationProfile(entropies=entropies, i0=np.asarray(i0),
                               i1=np.asarray(i1), i0_sum=i0_sum, i1_sum=i1_sum,
                               block_conditional_entropy=h_block, reports=reports)


# ---------------------------------------------------------------------------
# Monte Carlo error estimation.
# ---------------------------------------------------------------------------

@dataclass
class MonteCarloEstimate:
    errors: int
    trials: int
    estimate: float
    ci_low: float
    ci_high: float
    seed: int


def wilson_interval(errors: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Two-sided Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = errors / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


MC_CHUNK = 2048


def _mc_chunk_errors(target, law: JointSourceLaw, method: str, trials: int,
                     rng: np.random.Generator, epsilon, iterations) -> int:
    if isinstance(target, PolarCode):
        if method not in ("sc", "ssc"):
            raise ValueError(f"unsupported polar method {method!r}")
        n = target.n
        s = law.sample_block(n * trials, rng)
        x = s.x.reshape(trials, n)
        y = s.y.reshape(trials, n)
        c1 = polar_transform(x, target.spec.p)[:, target.I1]
        x_hat = polar_decode_batch(target, law, c1, y, mode=method, seed=rng)
        return int((x_hat != x).any(axis=1).sum())
    if isinstance(target, ExtendedCodeSystem):
        from .decoders import decode_map, decode_sc, decode_smap, decode_ssc, decode_typical

        model = ConditionalModel(target, law) if not method.startswith("sp-") else None
        n = target.n
        errors = 0
        for _ in range(trials):
            s = law.sample_block(n, rng)
            c1 = target.encode(s.x)
            if method == "map":
                res = decode_map(model, c1, s.y)
            elif method == "typical":
                res = decode_typical(model, c1, s.y,
                                     epsilon if epsilon is not None else 0.1)
            elif method == "smap":
                res = decode_smap(model, c1, s.y)
            elif method == "sc":
                res = decode_sc(model, c1, s.y)
            elif method == "ssc":
                res = decode_ssc(model, c1, s.y, seed=rng)
            elif method == "sp-sc":
                res = run_sc_ssc_algorithm(target, law, c1, s.y, mode="deterministic",
                                           method="sum-product", iterations=iterations)
            elif method == "sp-ssc":
                res = run_sc_ssc_algorithm(target, law, c1, s.y, mode="stochastic",
                                           method="sum-product", iterations=iterations,
                                           seed=rng)
            else:
                raise ValueError(f"unknown method {method!r}")
            if res.failed or not np.array_equal(res.x_hat, s.x):
                errors += 1
        return errors
    raise TypeError(f"unsupported target {type(target).__name__}")


def monte_carlo_error(target, law: JointSourceLaw, method: str, n_trials: int,
                      seed: int, epsilon: float | None = None,
                      iterations: int = 20, threads: int = 1) -> MonteCarloEstimate:
    """Empirical block error rate of sample -> encode -> decode -> compare.

    `target` is an ExtendedCodeSystem (methods 'map', 'typical', 'smap',
    'sc', 'ssc', 'sp-sc', 'sp-ssc') or a PolarCode ('sc', 'ssc'). Trials
    run in fixed-size chunks, each on its own seed stream spawned from the
    master seed, so the result is byte-identical for every thread count.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    counts = [MC_CHUNK] * (n_trials // MC_CHUNK)
    if n_trials % MC_CHUNK:
        counts.append(n_trials % MC_CHUNK)
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(len(counts))]

    def run(idx: int) -> int:
        return _mc_chunk_errors(target, law, method, counts[idx], streams[idx],
                                epsilon, iterations)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = sum(pool.map(run, range(len(counts))))
    else:
        errors = sum(run(i) for i in range(len(counts)))
    low, high = wilson_interval(errors, n_trials)
    return MonteCarloEstimate(errors=errors, trials=n_trials,
                              estimate=errors / n_trials, ci_low=low, ci_high=high,
                              seed=seed)


def statistical_bound_report(bound_id: str, est: MonteCarloEstimate,
                             rhs: float) -> BoundReport:
    """Monte Carlo bound check: flagged only when the CI excludes the bound."""
    return BoundReport(bound_id=bound_id, lhs=est.estimate, rhs=float(rhs),
                       satisfied=bool(est.ci_low <= rhs), method="monte-carlo",
                       trials=est.trials, ci_low=est.ci_low, ci_high=est.ci_high)


def polar_error_bound_constant(p: int) -> float:
    """(|X|-1) / (2 log 2) with entropies in base |X|: multiplies the summed
    Z over the reconstructed indices to bound the SC block error."""
    return (p - 1) / (2 * _log2_in_base_p(p))


# ---------------------------------------------------------------------------
# Report output.
# ---------------------------------------------------------------------------

CSV_COLUMNS = ["bound-id", "lhs", "rhs", "satisfied", "method", "trials",
               "ci_low", "ci_high"]


def reports_to_csv(reports: list[BoundReport]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in reports:
        row = [
            r.bound_id,
            repr(float(r.lhs)),
            repr(float(r.rhs)),
            "true" if r.satisfied else "false",
            r.method,
            "" if r.trials is None else str(r.trials),
            "" if r.ci_low is None else repr(float(r.ci_low)),
            "" if r.ci_high is None else repr(float(r.ci_high)),
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def summarize_reports(reports: list[BoundReport]) -> str:
    lines = []
    n_bad = sum(not r.satisfied for r in reports)
    for r in reports:
        flag = "ok " if r.satisfied else "VIOLATED"
        extra = ""
        if r.method == "monte-carlo":
            extra = f"  trials={r.trials} ci=[{r.ci_low:.6g}, {r.ci_high:.6g}]"
        lines.append(f"{flag} {r.bound_id}: lhs={r.lhs:.12g} rhs={r.rhs:.12g}"
                     f" [{r.method}]{extra}")
    lines.append(f"{len(reports) - n_bad}/{len(reports)} bounds satisfied")
    return "\n".join(lines) + "\n"
