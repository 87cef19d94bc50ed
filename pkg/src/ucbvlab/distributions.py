"""Reward distributions, arm specs, and bandit instances.

Every supported law is a two-point distribution (possibly degenerate),
stored in the canonical form (low, high, p_high) with P(high) = p_high.
Sampling always consumes exactly one uniform draw, Deterministic
included, so trajectories are reproducible across serial and
vectorized execution.

Generic (mu, sigma) arms use the symmetric two-point law on
{mu - sigma, mu + sigma} with equal weights; sigma = 0 collapses to
Deterministic(mu). The mean-mu variance-sigma^2 law on atoms
{0, (mu^2+sigma^2)/mu} and its gap-shifted variant (same atoms, mean
mu + delta) support the KL computations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .rng import Xoshiro256PP


class SupportViolationError(ValueError):
    """Atoms would fall outside the allowed support."""


class PreconditionError(ValueError):
    """One or more constructor preconditions failed."""

    def __init__(self, failed: list[str]):
        self.failed = list(failed)
        super().__init__("; ".join(failed))


class SupportMismatchError(ValueError):
    """KL requested between laws on different atom pairs."""


class AbsoluteContinuityError(ValueError):
    """KL undefined: p puts mass where q has none."""


class HorizonTooSmallError(ValueError):
    """Horizon too small for the requested construction."""


_MOMENT_TOL = 1e-12


@dataclass(frozen=True)
class RewardDistribution:
    """Two-point law in canonical (low, high, p_high) form.

    variant is one of Bernoulli, SymmetricTwoPoint, TwoPointQ,
    TwoPointQDelta, Deterministic; params holds the constructor
    arguments for JSON round-trips. mean and variance are the exact
    analytic moments and are checked against the atoms on creation.
    """

    variant: str
    params: tuple[tuple[str, float], ...]
    low: float
    high: float
    p_high: float
    mean: float
    variance: float

    def __post_init__(self):
        if not 0.0 <= self.p_high <= 1.0:
            raise ValueError(f"p_high must lie in [0, 1], got {self.p_high}")
        if self.high < self.low:
            raise ValueError("atoms out of order (high < low)")
        m = self.low + self.p_high * (self.high - self.low)
        v = self.p_high * (1.0 - self.p_high) * (self.high - self.low) ** 2
        if not math.isclose(m, self.mean, rel_tol=_MOMENT_TOL, abs_tol=_MOMENT_TOL):
            raise ValueError(f"declared mean {self.mean} != atom mean {m}")
        if not math.isclose(v, self.variance, rel_tol=_MOMENT_TOL, abs_tol=_MOMENT_TOL):
            raise ValueError(f"declared variance {self.variance} != atom variance {v}")

    def support(self) -> tuple[float, float]:
        return (self.low, self.high)

    def atoms(self) -> tuple[tuple[float, float], ...]:
        """((atom, probability), ...) with zero-mass atoms kept."""
        return ((self.low, 1.0 - self.p_high), (self.high, self.p_high))


def moments(dist: RewardDistribution) -> tuple[float, float]:
    """(mean, variance) of the law."""
    return (dist.mean, dist.variance)


def sample(dist: RewardDistribution, rng: Xoshiro256PP) -> float:
    """Draw one reward, consuming exactly one uniform.

    The single-draw contract holds for every variant (Deterministic
    burns a draw too) so that lockstep batch simulation and the serial
    path consume identical stream positions.
    """
    u = rng.uniform()
    return dist.high if u < dist.p_high else dist.low


def bernoulli(p: float) -> RewardDistribution:
    if not 0.0 <= p <= 1.0:
        raise PreconditionError([f"Bernoulli p must lie in [0, 1], got {p}"])
    return RewardDistribution(
        variant="Bernoulli",
        params=(("p", p),),
        low=0.0,
        high=1.0,
        p_high=p,
        mean=p,
        variance=p * (1.0 - p),
    )


def deterministic(mu: float) -> RewardDistribution:
    return RewardDistribution(
        variant="Deterministic",
        params=(("mu", mu),),
        low=mu,
        high=mu,
        p_high=1.0,
        mean=mu,
        variance=0.0,
    )


def make_symmetric_two_point(mu: float, sigma: float) -> RewardDistribution:
    """Equal-weight law on {mu - sigma, mu + sigma}; mean mu, sd sigma.

    Atoms must stay inside [0, 1]. sigma = 0 collapses to
    Deterministic(mu).
    """
    if sigma < 0.0:
        raise PreconditionError([f"sigma must be >= 0, got {sigma}"])
    if sigma == 0.0:
        if not 0.0 <= mu <= 1.0:
            raise SupportViolationError(f"atom {mu} outside [0, 1]")
        return deterministic(mu)
    lo, hi = mu - sigma, mu + sigma
    if lo < 0.0 or hi > 1.0:
        raise SupportViolationError(f"atoms {{{lo}, {hi}}} outside [0, 1]")
    return RewardDistribution(
        variant="SymmetricTwoPoint",
        params=(("mu", mu), ("sigma", sigma)),
        low=lo,
        high=hi,
        p_high=0.5,
        mean=mu,
        variance=sigma * sigma,
    )


def make_q(mu: float, sigma: float) -> RewardDistribution:
    """Mean-mu variance-sigma^2 law on {0, (mu^2+sigma^2)/mu}.

    P(0) = sigma^2/(mu^2+sigma^2), P(M) = mu^2/(mu^2+sigma^2) with
    M = (mu^2+sigma^2)/mu; both moments are exact by construction.
    """
    if mu <= 0.0 or sigma <= 0.0:
        raise PreconditionError(
            [f"make_q needs mu > 0 and sigma > 0, got mu={mu}, sigma={sigma}"]
        )
    m2 = mu * mu + sigma * sigma
    big = m2 / mu
    return RewardDistribution(
        variant="TwoPointQ",
        params=(("mu", mu), ("sigma", sigma)),
        low=0.0,
        high=big,
        p_high=mu * mu / m2,
        mean=mu,
        variance=sigma * sigma,
    )


def make_q_delta(mu: float, sigma: float, delta: float) -> RewardDistribution:
    """Gap-shifted variant of make_q on the same atoms, mean mu + delta.

    Keeping the atoms {0, (mu^2+sigma^2)/mu} fixed and moving the mass
    so the mean rises by delta yields variance
    (1 + delta/mu)(sigma^2 - mu delta). delta = 0 returns make_q
    unchanged. For delta > 0 the shift must satisfy
        sigma > mu >= sigma - delta,
        delta < (mu^2+sigma^2)/mu - 2 mu,
        delta <= sigma / 2,
    which keeps the variance positive and the KL against make_q within
    4 delta^2 / sigma^2.
    """
    if delta < 0.0:
        raise PreconditionError([f"delta must be >= 0, got {delta}"])
    if delta == 0.0:
        return make_q(mu, sigma)
    if mu <= 0.0 or sigma <= 0.0:
        raise PreconditionError(
            [f"make_q_delta needs mu > 0 and sigma > 0, got mu={mu}, sigma={sigma}"]
        )
    failed = []
    if not sigma > mu:
        failed.append(f"need sigma > mu, got sigma={sigma}, mu={mu}")
    if not mu >= sigma - delta:
        failed.append(f"need mu >= sigma - delta, got mu={mu}, sigma-delta={sigma - delta}")
    if not delta < (mu * mu + sigma * sigma) / mu - 2.0 * mu:
        failed.append(
            f"need delta < (mu^2+sigma^2)/mu - 2mu = {(mu * mu + sigma * sigma) / mu - 2.0 * mu}, got {delta}"
        )
    if not delta <= sigma / 2.0:
        failed.append(f"need delta <= sigma/2 = {sigma / 2.0}, got {delta}")
    if failed:
        raise PreconditionError(failed)
    big = (mu * mu + sigma * sigma) / mu
    shifted = mu + delta
    var = shifted * big - shifted * shifted
    return RewardDistribution(
        variant="TwoPointQDelta",
        params=(("mu", mu), ("sigma", sigma), ("delta", delta)),
        low=0.0,
        high=big,
        p_high=shifted * shifted / (shifted * big),
        mean=shifted,
        variance=var,
    )


def kl_two_point(p: RewardDistribution, q: RewardDistribution) -> float:
    """KL(p || q) in nats for two laws on the same two atoms."""
    if p.low != q.low or p.high != q.high:
        raise SupportMismatchError(
            f"atom mismatch: {{{p.low}, {p.high}}} vs {{{q.low}, {q.high}}}"
        )
    total = 0.0
    for (_, pp), (_, qq) in zip(p.atoms(), q.atoms()):
        if pp == 0.0:
            continue
        if qq == 0.0:
            raise AbsoluteContinuityError("p has mass on an atom where q has none")
        total += pp * math.log(pp / qq)
    return total


@dataclass(frozen=True)
class ArmSpec:
    """A reward law together with its (redundant) moments."""

    distribution: RewardDistribution
    mean: float
    variance: float

    @classmethod
    def of(cls, dist: RewardDistribution) -> "ArmSpec":
        return cls(distribution=dist, mean=dist.mean, variance=dist.variance)

    def __post_init__(self):
        if not math.isclose(self.mean, self.distribution.mean, rel_tol=_MOMENT_TOL, abs_tol=_MOMENT_TOL):
            raise ValueError("ArmSpec mean disagrees with its distribution")
        if not math.isclose(self.variance, self.distribution.variance, rel_tol=_MOMENT_TOL, abs_tol=_MOMENT_TOL):
            raise ValueError("ArmSpec variance disagrees with its distribution")


@dataclass(frozen=True)
class BanditInstance:
    """Fixed arm set; optimal_index points at the highest mean.

    gaps[a] = max mean - mean_a, so gaps[optimal_index] = 0. Mean ties
    resolve the optimal index to the lowest arm index.
    """

    arms: tuple[ArmSpec, ...]
    optimal_index: int
    gaps: tuple[float, ...]

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    def __post_init__(self):
        if not self.arms:
            raise ValueError("instance needs at least one arm")
        best = max(a.mean for a in self.arms)
        want = min(i for i, a in enumerate(self.arms) if a.mean == best)
        if self.optimal_index != want:
            raise ValueError(f"optimal_index {self.optimal_index} should be {want}")
        for a, g in zip(self.arms, self.gaps):
            if not math.isclose(g, best - a.mean, rel_tol=_MOMENT_TOL, abs_tol=_MOMENT_TOL):
                raise ValueError("gaps inconsistent with arm means")
            if g < 0.0:
                raise ValueError("negative gap")


def make_instance(dists: list[RewardDistribution]) -> BanditInstance:
    arms = tuple(ArmSpec.of(d) for d in dists)
    best = max(a.mean for a in arms)
    opt = min(i for i, a in enumerate(arms) if a.mean == best)
    gaps = tuple(best - a.mean for a in arms)
    return BanditInstance(arms=arms, optimal_index=opt, gaps=gaps)


def instability_instance(rho: float, horizon: int) -> BanditInstance:
    """Two-arm instance sitting exactly on the instability point.

    Arm 1 is Deterministic(mu + gap) with mu = 1/2 and
    gap = sqrt(mu(1-mu) rho log T / T); arm 2 is Bernoulli(1/2). The
    gap equals sigma_2 sqrt(rho log T / T), the scale at which the
    optimal arm's pull count has non-vanishing mass on both sqrt(T)
    and near-linear orders.
    """
    if horizon < 2:
        raise HorizonTooSmallError(f"horizon must be >= 2, got {horizon}")
    if rho <= 0.0:
        raise PreconditionError([f"rho must be > 0, got {rho}"])
    mu = 0.5
    gap = math.sqrt(mu * (1.0 - mu) * rho * math.log(horizon) / horizon)
    if mu + gap > 1.0:
        raise HorizonTooSmallError(
            f"mu + gap = {mu + gap} > 1; rho log T / T too large at T={horizon}"
        )
    return make_instance([deterministic(mu + gap), bernoulli(mu)])


def to_json(instance: BanditInstance) -> str:
    """Serialize as {"arms": [{"variant", "params"}...], "optimal_index"}."""
    payload = {
        "arms": [
            {"variant": a.distribution.variant, "params": dict(a.distribution.params)}
            for a in instance.arms
        ],
        "optimal_index": instance.optimal_index,
    }
    return json.dumps(payload, sort_keys=True)


_CONSTRUCTORS = {
    "Bernoulli": lambda p: bernoulli(**p),
    "Deterministic": lambda p: deterministic(**p),
    "SymmetricTwoPoint": lambda p: make_symmetric_two_point(**p),
    "TwoPointQ": lambda p: make_q(**p),
    "TwoPointQDelta": lambda p: make_q_delta(**p),
}


def from_json(text: str) -> BanditInstance:
    """Inverse of to_json; re-runs all constructor validation."""
    payload = json.loads(text)
    dists = []
    for arm in payload["arms"]:
        variant = arm["variant"]
        if variant not in _CONSTRUCTORS:
            raise ValueError(f"unknown distribution variant {variant!r}")
        dists.append(_CONSTRUCTORS[variant](arm["params"]))
    instance = make_instance(dists)
    stored = payload.get("optimal_index")
    if stored is not None and stored != instance.optimal_index:
        raise ValueError(
            f"stored optimal_index {stored} disagrees with recomputed {instance.optimal_index}"
        )
    return instance
