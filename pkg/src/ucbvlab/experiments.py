"""Experiment recipes: one CSV per experiment, config echoed in the
header comment.

Two-arm instances are built from (sigma1, sigma2, gap) with base mean
1/2: arm 1 is the symmetric two-point law at mean 1/2 + gap and sd
sigma1 (Deterministic when sigma1 = 0), arm 2 at mean 1/2 and sd
sigma2. Requested sds are clamped to the largest value the [0, 1]
support allows for the arm mean (min(mu, 1 - mu)); CSVs record both
requested and actual values where clamping can bind.

Gap conventions for instability-index targets: lam > 0 maps to
gap = sigma2 sqrt(rho log T) / (sqrt(T) lam); lam = 0 labels the
no-gap setting (gap exactly 0, tied means), the stable regime in
which the noisy arm's pull count grows linearly and its studentized
deviation is asymptotically normal.

Mixed-row CSVs (zstat, instability, coverage, anticoncentration) carry
a row_type column: 'sample' rows hold per-repetition values, 'summary'
rows the derived frequencies/statistics.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import asymptotics as A
from . import csvio
from . import distributions as D
from . import montecarlo as M
from .policies import PolicyConfig
from .rng import derive_seed, seed_state_vector, next_uniform_vector

BASE_MEAN = 0.5
POLICY_LABELS = {"UcbV": "UcbV", "CanonicalUcb": "CanonicalUcb", "UcbVOracle": "UcbVOracle"}


def clamp_sigma(mu: float, sigma: float) -> float:
    """Largest feasible symmetric two-point sd at mean mu within [0, 1]."""
    cap = min(mu, 1.0 - mu)
    return min(sigma, cap)


def two_arm_instance(sigma1: float, sigma2: float, gap: float) -> D.BanditInstance:
    """Arm 1 optimal at mean 1/2 + gap, arm 2 at mean 1/2; sds clamped."""
    if gap < 0.0:
        raise ValueError(f"gap must be >= 0, got {gap}")
    mu1 = BASE_MEAN + gap
    if mu1 > 1.0:
        raise ValueError(f"gap {gap} pushes the optimal mean past 1")
    s1 = clamp_sigma(mu1, sigma1)
    s2 = clamp_sigma(BASE_MEAN, sigma2)
    return D.make_instance(
        [D.make_symmetric_two_point(mu1, s1), D.make_symmetric_two_point(BASE_MEAN, s2)]
    )


def gap_from_lambda(lam: float, sigma2: float, rho: float, horizon: int) -> float:
    """Invert the instability index; lam = 0 keys the tied-means setting."""
    if lam < 0.0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if lam == 0.0:
        return 0.0
    return sigma2 * math.sqrt(rho * math.log(horizon)) / (math.sqrt(horizon) * lam)


def _out_path(out_dir, name: str, tag: str | None, seed: int) -> Path:
    if tag is None:
        tag = f"seed{seed}"
    return Path(out_dir) / f"{name}_{tag}.csv"


def _batch(instance, policy, reps, seed, workers, progress):
    cfg = M.RunConfig(instance=instance, policy=policy, repetitions=reps, base_seed=seed)
    return M.run_batch(cfg, workers=workers, progress=progress)


def exp_arm_distribution(
    horizon: int,
    reps: int,
    sigma1: float,
    sigma2: float,
    gap_mode: str,
    rho: float = 2.0,
    seed: int = 0,
    out_dir=".",
    tag: str | None = None,
    workers: int | None = None,
    progress=None,
) -> Path:
    """Distribution of the optimal arm's pull count under UcbV and
    CanonicalUcb, paired seeds. gap_mode 'zero' ties the means;
    'lambda1' sets gap = sigma2 sqrt(log T / T)."""
    if gap_mode == "zero":
        gap = 0.0
    elif gap_mode == "lambda1":
        gap = sigma2 * math.sqrt(math.log(horizon) / horizon)
    else:
        raise ValueError(f"unknown gap_mode {gap_mode!r}")
    instance = two_arm_instance(sigma1, sigma2, gap)
    config = {
        "experiment": "arm_distribution",
        "horizon": horizon,
        "reps": reps,
        "sigma1": sigma1,
        "sigma2": sigma2,
        "gap_mode": gap_mode,
        "gap": gap,
        "rho": rho,
        "seed": seed,
    }
    header = ["policy", "rep_index", "seed", "n_1", "n_2", "regret"]
    rows = []
    for kind in ("UcbV", "CanonicalUcb"):
        policy = PolicyConfig(kind=kind, rho=rho, horizon=horizon)
        for rec in _batch(instance, policy, reps, seed, workers, progress):
            rows.append([kind, rec.rep_index, rec.seed, *rec.pulls, rec.pseudo_regret])
    return csvio.write_csv(
        _out_path(out_dir, "arm_distribution", tag, seed), header, rows, config=config
    )


def exp_phase_sweep(
    horizon: int,
    reps: int,
    sigma2: float,
    lambdas: list[float],
    rho: float = 2.0,
    seed: int = 0,
    slack: float | None = None,
    out_dir=".",
    tag: str | None = None,
    workers: int | None = None,
    progress=None,
) -> Path:
    """Optimal-arm pull medians across the instability index, against
    the fixed-point prediction and its confidence band (sigma1 = 0)."""
    if slack is None:
        slack = 1.0 / math.log(horizon)
    config = {
        "experiment": "phase_sweep",
        "horizon": horizon,
        "reps": reps,
        "sigma2": sigma2,
        "lambdas": list(lambdas),
        "rho": rho,
        "slack": slack,
        "seed": seed,
    }
    header = [
        "lambda",
        "gap",
        "ucb_median_n1",
        "ucb_q30_n1",
        "ucbv_median_n1",
        "ucbv_q30_n1",
        "n1_star",
        "n1_low",
        "n1_high",
    ]
    rows = []
    for lam in lambdas:
        gap = gap_from_lambda(lam, sigma2, rho, horizon)
        instance = two_arm_instance(0.0, sigma2, gap)
        problem = A.FpeProblem.from_arms(
            [0.0, instance.arms[1].variance ** 0.5], [0.0, gap], rho, horizon
        )
        sol = A.solve_fpe(problem)
        region = A.confidence_region(problem, slack)
        stats = {}
        for kind in ("CanonicalUcb", "UcbV"):
            policy = PolicyConfig(kind=kind, rho=rho, horizon=horizon)
            recs = _batch(instance, policy, reps, seed, workers, progress)
            summ = M.summarize([r.pulls[0] for r in recs], qs=(0.3, 0.5))
            stats[kind] = dict(summ.quantiles)
        rows.append(
            [
                lam,
                gap,
                stats["CanonicalUcb"][0.5],
                stats["CanonicalUcb"][0.3],
                stats["UcbV"][0.5],
                stats["UcbV"][0.3],
                sol.n_star[0],
                region.n1_low,
                region.n1_high,
            ]
        )
    return csvio.write_csv(
        _out_path(out_dir, "phase_sweep", tag, seed), header, rows, config=config
    )


def exp_regret(
    horizon: int,
    reps: int,
    sigma1_list: list[float],
    sigma2: float,
    gap: float,
    rho: float = 2.0,
    seed: int = 0,
    out_dir=".",
    tag: str | None = None,
    workers: int | None = None,
    progress=None,
) -> Path:
    """UcbV pseudo-regret versus the optimal arm's sd, with the
    variance-aware bound. Requested sds above the [0, 1] support cap
    are clamped; both values are recorded."""
    config = {
        "experiment": "regret",
        "horizon": horizon,
        "reps": reps,
        "sigma1_list": list(sigma1_list),
        "sigma2": sigma2,
        "gap": gap,
        "rho": rho,
        "seed": seed,
    }
    header = [
        "sigma1_requested",
        "sigma1",
        "sigma2",
        "mean_regret",
        "stdev_regret",
        "bound",
    ]
    rows = []
    for requested in sigma1_list:
        instance = two_arm_instance(requested, sigma2, gap)
        actual1 = instance.arms[0].variance ** 0.5
        actual2 = instance.arms[1].variance ** 0.5
        policy = PolicyConfig(kind="UcbV", rho=rho, horizon=horizon)
        recs = _batch(instance, policy, reps, seed, workers, progress)
        summ = M.summarize([r.pseudo_regret for r in recs], qs=(0.5,))
        bound = A.regret_bound(actual1, [actual2], rho, horizon)
        rows.append([requested, actual1, actual2, summ.mean, summ.stdev, bound])
    return csvio.write_csv(
        _out_path(out_dir, "regret", tag, seed), header, rows, config=config
    )


def exp_zstat(
    horizon: int,
    reps: int,
    lam: float,
    rho: float = 2.0,
    seed: int = 0,
    sigma2: float = 0.25,
    out_dir=".",
    tag: str | None = None,
    workers: int | None = None,
    progress=None,
) -> Path:
    """Studentized deviation of the noisy (suboptimal) arm under UcbV
    and CanonicalUcb, with per-policy KS distance to the standard
    normal; sigma1 = 0."""
    if reps < 10:
        raise ValueError(f"zstat needs at least 10 repetitions, got {reps}")
    gap = gap_from_lambda(lam, sigma2, rho, horizon)
    instance = two_arm_instance(0.0, sigma2, gap)
    config = {
        "experiment": "zstat",
        "horizon": horizon,
        "reps": reps,
        "lambda": lam,
        "gap": gap,
        "rho": rho,
        "sigma2": sigma2,
        "seed": seed,
    }
    header = ["row_type", "policy", "rep_index", "seed", "z_2", "ks", "n_defined"]
    rows = []
    for kind in ("UcbV", "CanonicalUcb"):
        policy = PolicyConfig(kind=kind, rho=rho, horizon=horizon)
        recs = _batch(instance, policy, reps, seed, workers, progress)
        defined = [r.z[1] for r in recs if r.z[1] is not None]
        for rec in recs:
            rows.append(["sample", kind, rec.rep_index, rec.seed, rec.z[1], None, None])
        ks = M.ks_normal(defined) if len(defined) >= 2 else None
        rows.append(["summary", kind, None, None, None, ks, len(defined)])
    return csvio.write_csv(
        _out_path(out_dir, "zstat", tag, seed), header, rows, config=config
    )


def exp_instability(
    horizon: int,
    reps: int,
    rho: float = 2.0,
    seed: int = 0,
    a: float = 10.0,
    b: float = 0.05,
    include_empirical: bool = False,
    out_dir=".",
    tag: str | None = None,
    workers: int | None = None,
    progress=None,
) -> Path:
    """Tail events of the optimal arm's pull count on the borderline
    instance (gap exactly at the instability scale), variance-oracle
    policy. Events: n_1 <= a sqrt(T) log T and n_1 >= b T / sqrt(log T).
    include_empirical adds plain UcbV rows for side-by-side reporting
    (no summary assertions attach to them)."""
    instance = D.instability_instance(rho, horizon)
    thr_small = a * math.sqrt(horizon) * math.log(horizon)
    thr_large = b * horizon / math.sqrt(math.log(horizon))
    config = {
        "experiment": "instability",
        "horizon": horizon,
        "reps": reps,
        "rho": rho,
        "a": a,
        "b": b,
        "include_empirical": include_empirical,
        "seed": seed,
    }
    header = [
        "row_type",
        "policy",
        "rep_index",
        "seed",
        "n_1",
        "event",
        "threshold",
        "frequency",
    ]
    variances = tuple(arm.variance for arm in instance.arms)
    kinds = [("UcbVOracle", variances)]
    if include_empirical:
        kinds.append(("UcbV", None))
    rows = []
    for kind, oracle in kinds:
        policy = PolicyConfig(kind=kind, rho=rho, horizon=horizon, oracle_variances=oracle)
        recs = _batch(instance, policy, reps, seed, workers, progress)
        n1 = [r.pulls[0] for r in recs]
        for rec in recs:
            rows.append(["sample", kind, rec.rep_index, rec.seed, rec.pulls[0], None, None, None])
        freq_small = sum(1 for v in n1 if v <= thr_small) / reps
        freq_large = sum(1 for v in n1 if v >= thr_large) / reps
        rows.append(["summary", kind, None, None, None, "small_count", thr_small, freq_small])
        rows.append(["summary", kind, None, None, None, "large_count", thr_large, freq_large])
    return csvio.write_csv(
        _out_path(out_dir, "instability", tag, seed), header, rows, config=config
    )


def exp_coverage(
    horizon: int,
    reps: int,
    delta: float = 0.1,
    rho: float = 2.0,
    seed: int = 0,
    out_dir=".",
    tag: str | None = None,
    progress=None,
) -> Path:
    """Uniform-in-time coverage of the mean and variance deviation
    events for a single Bernoulli(1/2) arm pulled every round:

        |mean_t - mu|     < phi_t e / 2   for all t <= T,
        |var_t - sigma^2| < phi_t e       for all t <= T,

    phi_t with the true normalized sd. Targets 1 - delta and
    1 - 2 delta."""
    consts = A.concentration_constants(delta, rho, horizon)
    sigma = 0.5
    sigma_bar = sigma / math.sqrt(rho * math.log(horizon))
    seeds = [derive_seed(seed, i) for i in range(reps)]
    state = seed_state_vector(np.array(seeds, dtype=np.uint64))
    mean = np.zeros(reps)
    m2 = np.zeros(reps)
    mean_ok = np.ones(reps, dtype=bool)
    var_ok = np.ones(reps, dtype=bool)
    for t in range(1, horizon + 1):
        u = next_uniform_vector(state)
        x = (u < 0.5).astype(np.float64)
        d = x - mean
        mean = mean + d / t
        m2 = m2 + d * (x - mean)
        rt = math.sqrt(t)
        phi_t = max(sigma_bar, 1.0 / rt) / rt
        mean_ok &= np.abs(mean - 0.5) < phi_t * consts.e / 2.0
        var_ok &= np.abs(m2 / t - 0.25) < phi_t * consts.e
        if progress is not None and t % 1000 == 0:
            progress(t, horizon)
    config = {
        "experiment": "coverage",
        "horizon": horizon,
        "reps": reps,
        "delta": delta,
        "rho": rho,
        "e": consts.e,
        "seed": seed,
    }
    header = ["row_type", "rep_index", "seed", "mean_ok", "var_ok", "mean_coverage", "var_coverage"]
    rows = []
    for i in range(reps):
        rows.append(["sample", i, seeds[i], bool(mean_ok[i]), bool(var_ok[i]), None, None])
    rows.append(
        ["summary", None, None, None, None, float(mean_ok.mean()), float(var_ok.mean())]
    )
    return csvio.write_csv(
        _out_path(out_dir, "coverage", tag, seed), header, rows, config=config
    )


def exp_anticoncentration(
    n_max: int,
    c: float,
    reps: int,
    seed: int = 0,
    out_dir=".",
    tag: str | None = None,
    progress=None,
) -> Path:
    """Frequency of a Bernoulli(1/2) walk staying above n/2 + sqrt(n)
    (and, mirrored, below n/2 - sqrt(n)) on the whole window
    floor(N/c) <= n <= N. c = 1 reduces to the single endpoint n = N."""
    if c < 1.0:
        raise ValueError(f"c must be >= 1, got {c}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    lo = max(1, math.floor(n_max / c))
    seeds = [derive_seed(seed, i) for i in range(reps)]
    state = seed_state_vector(np.array(seeds, dtype=np.uint64))
    s = np.zeros(reps)
    upper_ok = np.ones(reps, dtype=bool)
    lower_ok = np.ones(reps, dtype=bool)
    for n in range(1, n_max + 1):
        u = next_uniform_vector(state)
        s += u < 0.5
        if n >= lo:
            edge = math.sqrt(n)
            upper_ok &= s > n / 2.0 + edge
            lower_ok &= s < n / 2.0 - edge
        if progress is not None and n % 10000 == 0:
            progress(n, n_max)
    config = {
        "experiment": "anticoncentration",
        "n_max": n_max,
        "c": c,
        "window_low": lo,
        "reps": reps,
        "seed": seed,
    }
    header = ["row_type", "rep_index", "seed", "upper_ok", "lower_ok", "upper_freq", "lower_freq"]
    rows = []
    for i in range(reps):
        rows.append(["sample", i, seeds[i], bool(upper_ok[i]), bool(lower_ok[i]), None, None])
    rows.append(
        ["summary", None, None, None, None, float(upper_ok.mean()), float(lower_ok.mean())]
    )
    return csvio.write_csv(
        _out_path(out_dir, "anticoncentration", tag, seed), header, rows, config=config
    )


DEFAULT_KL_SIGMAS = (0.1, 0.2, 0.3, 0.4)
DEFAULT_KL_DELTA_FRACS = (0.0, 0.1, 0.25, 0.5, 0.75)
DEFAULT_KL_MU_FRACS = (0.0, 0.5, 0.9)


def exp_kl_check(
    sigmas=DEFAULT_KL_SIGMAS,
    delta_fracs=DEFAULT_KL_DELTA_FRACS,
    mu_fracs=DEFAULT_KL_MU_FRACS,
    out_dir=".",
    tag: str | None = None,
    seed: int = 0,
) -> Path:
    """Exact KL between the gap-shifted two-point pair against the
    4 delta^2 / sigma^2 bound on a (mu, sigma, delta) grid. delta =
    frac * sigma; mu = sigma - delta + frac_mu * delta. Grid points
    violating the shift preconditions become rows with a reason and no
    pass flag (frac 0.75 rows are there to exercise exactly that)."""
    header = ["mu", "sigma", "delta", "kl", "bound", "passed", "reason"]
    config = {
        "experiment": "kl_check",
        "sigmas": list(sigmas),
        "delta_fracs": list(delta_fracs),
        "mu_fracs": list(mu_fracs),
        "seed": seed,
    }
    rows = []
    for sigma in sigmas:
        for frac in delta_fracs:
            delta = frac * sigma
            # delta = 0 pins mu = sigma whatever the fraction; one row
            mus = [sigma] if delta == 0.0 else [sigma - delta + f * delta for f in mu_fracs]
            for mu in mus:
                try:
                    base = D.make_q(mu, sigma)
                    shifted = D.make_q_delta(mu, sigma, delta)
                except (D.PreconditionError, ValueError) as exc:
                    rows.append([mu, sigma, delta, None, None, None, str(exc)])
                    continue
                kl = D.kl_two_point(base, shifted)
                bound = 4.0 * delta * delta / (sigma * sigma)
                rows.append([mu, sigma, delta, kl, bound, kl <= bound, None])
    return csvio.write_csv(
        _out_path(out_dir, "kl_check", tag, seed), header, rows, config=config
    )
