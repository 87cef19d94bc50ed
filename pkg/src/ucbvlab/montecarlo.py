"""Seeded Monte Carlo engine for bandit episodes.

Two execution paths produce bit-identical trajectories:

* run_episode: a tight scalar loop, one repetition at a time;
* run_batch: repetitions advanced in lockstep as numpy lanes.

Both consume exactly one uniform per round from the repetition's own
xoshiro256++ stream (seeded via derive_seed), and both evaluate the
policy index with the identical floating-point operation order. All
lockstep operations are elementwise across lanes, so results do not
depend on how repetitions are grouped into worker chunks; --threads
only sizes the pool.

pseudo_regret is sum_a n_a * gap_a from the final counts, which equals
the round-by-round sum of incurred gaps exactly (same real number;
the count form avoids T-term float accumulation).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import csvio
from .distributions import BanditInstance
from .policies import PolicyConfig
from .rng import derive_seed, seed_state, seed_state_vector, next_uniform_vector

CHUNK_CAP = 8192


class TooFewSamplesError(ValueError):
    """Statistic needs more samples than provided."""


@dataclass(frozen=True)
class RunConfig:
    """A batch: instance + policy (carries the horizon) + repetitions."""

    instance: BanditInstance
    policy: PolicyConfig
    repetitions: int
    base_seed: int

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.base_seed < 0 or self.base_seed > (1 << 64) - 1:
            raise ValueError("base_seed must be a 64-bit unsigned int")
        if self.policy.kind == "UcbVOracle" and len(
            self.policy.oracle_variances
        ) != self.instance.n_arms:
            raise ValueError("oracle_variances length != arm count")


@dataclass(frozen=True)
class TrajectoryRecord:
    """Final pull counts, pseudo-regret and per-arm studentized
    deviations of one episode; z entries are None when undefined
    (no pulls or zero empirical sd)."""

    rep_index: int
    seed: int
    pulls: tuple[int, ...]
    pseudo_regret: float
    z: tuple[float | None, ...]


def run_episode(
    instance: BanditInstance,
    policy: PolicyConfig,
    seed: int,
    rep_index: int = 0,
) -> TrajectoryRecord:
    """Play one full episode of T = policy.horizon rounds.

    Equivalent round for round to the naive select_arm / sample /
    update loop over the policies module; inlined here so a T = 1e6
    episode stays comfortably inside the performance budget.
    """
    k = instance.n_arms
    horizon = policy.horizon
    low = [a.distribution.low for a in instance.arms]
    high = [a.distribution.high for a in instance.arms]
    p_high = [a.distribution.p_high for a in instance.arms]

    log_term = policy.rho * math.log(horizon)
    sqrt_log = math.sqrt(log_term)
    canonical = policy.kind == "CanonicalUcb"
    if policy.kind == "UcbVOracle":
        oracle_b = [math.sqrt(v) / sqrt_log for v in policy.oracle_variances]
    else:
        oracle_b = None

    s0, s1, s2, s3 = seed_state(seed)
    mask = (1 << 64) - 1
    sqrt = math.sqrt

    n = [0] * k
    mean = [0.0] * k
    m2 = [0.0] * k
    idx = [0.0] * k
    for t in range(horizon):
        if t < k:
            a = t
        else:
            a = 0
            best = idx[0]
            for j in range(1, k):
                if idx[j] > best:
                    best = idx[j]
                    a = j
        # xoshiro256++ step, inlined
        x = (s0 + s3) & mask
        out = (((x << 23) | (x >> 41)) + s0) & mask
        tt = (s1 << 17) & mask
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= tt
        s3 = ((s3 << 45) | (s3 >> 19)) & mask
        u = (out >> 11) * 2.0**-53
        r = high[a] if u < p_high[a] else low[a]
        nc = n[a] + 1
        n[a] = nc
        mu = mean[a]
        d = r - mu
        mu += d / nc
        mean[a] = mu
        m2c = m2[a] + d * (r - mu)
        m2[a] = m2c
        if canonical:
            idx[a] = mu + sqrt(log_term / nc)
        else:
            rt = sqrt(nc)
            b = oracle_b[a] if oracle_b is not None else sqrt(m2c / nc) / sqrt_log
            o = 1.0 / rt
            if o > b:
                b = o
            idx[a] = mu + b * log_term / rt

    regret = 0.0
    for a in range(k):
        regret += n[a] * instance.gaps[a]
    z: list[float | None] = []
    for a in range(k):
        if n[a] == 0:
            z.append(None)
            continue
        sig = sqrt(m2[a] / n[a])
        if sig == 0.0:
            z.append(None)
            continue
        z.append(sqrt(n[a]) / sig * (mean[a] - instance.arms[a].mean))
    return TrajectoryRecord(
        rep_index=rep_index,
        seed=seed,
        pulls=tuple(n),
        pseudo_regret=regret,
        z=tuple(z),
    )


def _run_chunk(
    instance: BanditInstance,
    policy: PolicyConfig,
    seeds: list[int],
    rep_indices: list[int],
) -> list[TrajectoryRecord]:
    """Lockstep vectorized episodes, one numpy lane per repetition."""
    reps = len(seeds)
    k = instance.n_arms
    horizon = policy.horizon
    low = np.array([a.distribution.low for a in instance.arms])
    high = np.array([a.distribution.high for a in instance.arms])
    p_high = np.array([a.distribution.p_high for a in instance.arms])

    log_term = policy.rho * math.log(horizon)
    sqrt_log = math.sqrt(log_term)
    canonical = policy.kind == "CanonicalUcb"
    oracle_b = None
    if policy.kind == "UcbVOracle":
        oracle_b = np.array([math.sqrt(v) / sqrt_log for v in policy.oracle_variances])

    state = seed_state_vector(np.array(seeds, dtype=np.uint64))
    n = np.zeros((reps, k), dtype=np.int64)
    mean = np.zeros((reps, k))
    m2 = np.zeros((reps, k))
    idx = np.zeros((reps, k))
    rows = np.arange(reps)

    for t in range(horizon):
        if t < k:
            chosen = np.full(reps, t)
        else:
            chosen = np.argmax(idx, axis=1)  # ties resolve to the lowest arm
        u = next_uniform_vector(state)
        r = np.where(u < p_high[chosen], high[chosen], low[chosen])
        nc = n[rows, chosen] + 1
        n[rows, chosen] = nc
        mu = mean[rows, chosen]
        d = r - mu
        mu = mu + d / nc
        mean[rows, chosen] = mu
        m2c = m2[rows, chosen] + d * (r - mu)
        m2[rows, chosen] = m2c
        if canonical:
            idx[rows, chosen] = mu + np.sqrt(log_term / nc)
        else:
            rt = np.sqrt(nc)
            if oracle_b is not None:
                b = oracle_b[chosen]
            else:
                b = np.sqrt(m2c / nc) / sqrt_log
            b = np.maximum(b, 1.0 / rt)
            idx[rows, chosen] = mu + b * log_term / rt

    gaps = np.asarray(instance.gaps)
    regret = np.zeros(reps)
    for a in range(k):
        regret += n[:, a] * gaps[a]
    means = np.array([a.mean for a in instance.arms])
    with np.errstate(invalid="ignore", divide="ignore"):
        sig = np.sqrt(m2 / n)
        z = np.sqrt(n) / sig * (mean - means)
    defined = (n > 0) & (sig > 0.0)

    records = []
    for i in range(reps):
        zs = tuple(
            float(z[i, a]) if defined[i, a] else None for a in range(k)
        )
        records.append(
            TrajectoryRecord(
                rep_index=rep_indices[i],
                seed=seeds[i],
                pulls=tuple(int(v) for v in n[i]),
                pseudo_regret=float(regret[i]),
                z=zs,
            )
        )
    return records


def run_batch(config: RunConfig, workers: int | None = None, progress=None) -> list[TrajectoryRecord]:
    """All repetitions of a RunConfig, ordered by rep_index.

    Seeds come from derive_seed(base_seed, rep). workers sizes the
    thread pool; the per-repetition results are identical for every
    worker count and chunking.
    """
    reps = config.repetitions
    seeds = [derive_seed(config.base_seed, i) for i in range(reps)]
    if workers is None:
        workers = 1
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    per = min(CHUNK_CAP, max(1, -(-reps // workers)))
    chunks = [
        (seeds[i : i + per], list(range(i, min(i + per, reps))))
        for i in range(0, reps, per)
    ]

    def job(chunk):
        return _run_chunk(config.instance, config.policy, chunk[0], chunk[1])

    results: list[TrajectoryRecord] = []
    if workers == 1 or len(chunks) == 1:
        for i, chunk in enumerate(chunks):
            results.extend(job(chunk))
            if progress is not None:
                progress(min((i + 1) * per, reps), reps)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            done = 0
            for part in pool.map(job, chunks):
                results.extend(part)
                done = min(done + per, reps)
                if progress is not None:
                    progress(done, reps)
    results.sort(key=lambda r: r.rep_index)
    return results


@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    stdev: float
    minimum: float
    maximum: float
    quantiles: tuple[tuple[float, float], ...]


def summarize(values, qs=(0.05, 0.25, 0.5, 0.75, 0.95)) -> SummaryStats:
    """Mean, sample stdev (ddof=1; 0.0 for a single value) and
    nearest-rank quantiles: the ceil(q n)-th order statistic, clamped
    to [1, n]."""
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("summarize needs at least one value")
    if any(not math.isfinite(v) for v in vals):
        raise ValueError("summarize requires finite values")
    for q in qs:
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"quantile {q} outside [0, 1]")
    svals = sorted(vals)
    count = len(svals)
    mean = sum(svals) / count
    if count == 1:
        stdev = 0.0
    else:
        stdev = math.sqrt(sum((v - mean) ** 2 for v in svals) / (count - 1))
    quants = []
    for q in qs:
        rank = math.ceil(q * count)
        rank = min(max(rank, 1), count)
        quants.append((q, svals[rank - 1]))
    return SummaryStats(
        count=count,
        mean=mean,
        stdev=stdev,
        minimum=svals[0],
        maximum=svals[-1],
        quantiles=tuple(quants),
    )


# Rational normal CDF approximation (Abramowitz & Stegun 26.2.17),
# absolute error below 7.5e-8.
_NORM_P = 0.2316419
_NORM_B = (0.319381530, -0.356563782, 1.781477937, -1.821255978, 1.330274429)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def normal_cdf(x: float) -> float:
    ax = abs(x)
    t = 1.0 / (1.0 + _NORM_P * ax)
    poly = t * (
        _NORM_B[0]
        + t * (_NORM_B[1] + t * (_NORM_B[2] + t * (_NORM_B[3] + t * _NORM_B[4])))
    )
    upper = 1.0 - _INV_SQRT_2PI * math.exp(-0.5 * ax * ax) * poly
    return upper if x >= 0.0 else 1.0 - upper


def ks_normal(samples) -> float:
    """Kolmogorov-Smirnov distance of the sample to the standard
    normal; needs >= 2 finite samples (undefined entries must be
    filtered upstream)."""
    vals = sorted(float(v) for v in samples)
    if len(vals) < 2:
        raise TooFewSamplesError(f"need >= 2 samples, got {len(vals)}")
    if any(not math.isfinite(v) for v in vals):
        raise ValueError("ks_normal requires finite samples")
    count = len(vals)
    dist = 0.0
    for i, v in enumerate(vals):
        cdf = normal_cdf(v)
        dist = max(dist, (i + 1) / count - cdf, cdf - i / count)
    return dist


def trajectory_header(n_arms: int) -> list[str]:
    return (
        ["rep_index", "seed"]
        + [f"n_{a + 1}" for a in range(n_arms)]
        + ["regret"]
        + [f"z_{a + 1}" for a in range(n_arms)]
    )


def write_trajectories(path, records: list[TrajectoryRecord], config: dict | None = None):
    """Trajectory CSV: rep_index, seed, n_1..n_K, regret, z_1..z_K
    (undefined z as empty cells)."""
    if not records:
        raise ValueError("no records to write")
    k = len(records[0].pulls)
    if any(len(r.pulls) != k for r in records):
        raise ValueError("mixed arm counts in one trajectory file")
    rows = []
    for r in records:
        rows.append([r.rep_index, r.seed] + list(r.pulls) + [r.pseudo_regret] + list(r.z))
    return csvio.write_csv(path, trajectory_header(k), rows, config=config)
