"""Index policies: variance-aware UCB and the canonical baseline.

All indices share the horizon-wide log term L = rho * log(T). With
n pulls, empirical mean m and empirical sd s (1/n normalization):

    UcbV          m + max(s / sqrt(L), 1/sqrt(n)) * L / sqrt(n)
    UcbVOracle    same, with s replaced by the true sd of the arm
    CanonicalUcb  m + sqrt(L / n)

The max clamp keeps the variance-aware bonus from collapsing before
the empirical sd is informative; once n >= L and s = 1 the UcbV bonus
equals the canonical one exactly (unit-variance oracle mode).

Arms are indexed from 0. The first K rounds pull arms 0..K-1 in
order; afterwards ties in the index resolve to the lowest arm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .distributions import BanditInstance

POLICY_KINDS = ("UcbV", "CanonicalUcb", "UcbVOracle")


class ZeroCountError(ValueError):
    """Index or variance requested for an arm never pulled."""


class HorizonExhaustedError(ValueError):
    """select_arm called after T rounds."""


class InvalidArmError(ValueError):
    """Arm index outside the instance."""


@dataclass(frozen=True)
class PolicyConfig:
    """kind, exploration scale rho > 0, horizon T >= 2.

    oracle_variances (true per-arm variances) is required for
    UcbVOracle and rejected otherwise.
    """

    kind: str
    rho: float
    horizon: int
    oracle_variances: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if not self.rho > 0.0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        if self.horizon < 2:
            raise ValueError(f"horizon must be >= 2, got {self.horizon}")
        if self.kind == "UcbVOracle":
            if self.oracle_variances is None:
                raise ValueError("UcbVOracle requires oracle_variances")
            if any(v < 0.0 for v in self.oracle_variances):
                raise ValueError("oracle variances must be >= 0")
        elif self.oracle_variances is not None:
            raise ValueError(f"{self.kind} takes no oracle_variances")

    @property
    def log_term(self) -> float:
        return self.rho * math.log(self.horizon)


@dataclass
class ArmStats:
    """Streaming count / mean / sum of squared deviations (Welford)."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add(self, x: float) -> None:
        self.n += 1
        d = x - self.mean
        self.mean += d / self.n
        self.m2 += d * (x - self.mean)

    def variance(self) -> float:
        """Empirical variance with 1/n normalization."""
        if self.n == 0:
            raise ZeroCountError("variance undefined before the first pull")
        return self.m2 / self.n


@dataclass
class PolicyState:
    stats: list[ArmStats]
    t: int = 0

    @property
    def n_arms(self) -> int:
        return len(self.stats)


def init_state(cfg: PolicyConfig, n_arms: int) -> PolicyState:
    if n_arms < 1:
        raise ValueError("need at least one arm")
    if cfg.kind == "UcbVOracle" and len(cfg.oracle_variances) != n_arms:
        raise ValueError(
            f"oracle_variances has {len(cfg.oracle_variances)} entries for {n_arms} arms"
        )
    return PolicyState(stats=[ArmStats() for _ in range(n_arms)], t=0)


def ucb_index(stats: ArmStats, cfg: PolicyConfig, arm: int) -> float:
    """Upper confidence index of one arm; requires n >= 1."""
    if stats.n == 0:
        raise ZeroCountError(f"arm {arm} has no pulls")
    log_term = cfg.rho * math.log(cfg.horizon)
    rt = math.sqrt(stats.n)
    if cfg.kind == "CanonicalUcb":
        return stats.mean + math.sqrt(log_term / stats.n)
    if cfg.kind == "UcbVOracle":
        sig = math.sqrt(cfg.oracle_variances[arm])
    else:
        sig = math.sqrt(stats.m2 / stats.n)
    b = sig / math.sqrt(log_term)
    o = 1.0 / rt
    if o > b:
        b = o
    return stats.mean + b * log_term / rt


def select_arm(state: PolicyState, cfg: PolicyConfig) -> int:
    """Next arm: forced exploration for the first K rounds, then the
    highest index with ties to the lowest arm. Pure in (state, cfg)."""
    if state.t >= cfg.horizon:
        raise HorizonExhaustedError(f"round {state.t} >= horizon {cfg.horizon}")
    k = state.n_arms
    if state.t < k:
        return state.t
    best = 0
    best_val = ucb_index(state.stats[0], cfg, 0)
    for a in range(1, k):
        v = ucb_index(state.stats[a], cfg, a)
        if v > best_val:
            best_val = v
            best = a
    return best


def update(state: PolicyState, arm: int, reward: float) -> PolicyState:
    """Fold one observed reward into the state (mutates and returns it)."""
    if not 0 <= arm < state.n_arms:
        raise InvalidArmError(f"arm {arm} outside [0, {state.n_arms})")
    state.stats[arm].add(reward)
    state.t += 1
    return state


def z_statistics(state: PolicyState, instance: BanditInstance) -> list[float | None]:
    """Per-arm studentized deviations sqrt(n)/s * (mean - mu).

    None marks an undefined entry (no pulls, or zero empirical sd).
    """
    if state.n_arms != instance.n_arms:
        raise InvalidArmError(
            f"state has {state.n_arms} arms, instance has {instance.n_arms}"
        )
    out: list[float | None] = []
    for st, arm in zip(state.stats, instance.arms):
        if st.n == 0:
            out.append(None)
            continue
        sig = math.sqrt(st.m2 / st.n)
        if sig == 0.0:
            out.append(None)
            continue
        out.append(math.sqrt(st.n) / sig * (st.mean - arm.mean))
    return out
