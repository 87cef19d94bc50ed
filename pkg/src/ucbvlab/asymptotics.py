"""Deterministic asymptotics: the pull-count fixed point and friends.

Normalized parameters throughout: sigma_bar_a = sigma_a / sqrt(rho log T)
and delta_bar_a = Delta_a / (rho log T), with arm 0 optimal
(delta_bar[0] = 0).

The characteristic count function

    phi(n; sigma_bar) = (sigma_bar v n^{-1/2}) / sqrt(n)

is strictly decreasing in n with inverse
count_from_phi(phi; sigma_bar) = (sigma_bar^2 v phi) / phi^2. The
limiting pull counts solve the fixed-point equation

    f(phi) = sum_a (sigma_bar_a^2 v (phi + delta_bar_a))
             / (T (phi + delta_bar_a)^2) = 1,

where f is strictly decreasing with f(1/T) > 1 and f(1) <= K/T, so the
root phi_star is unique in (1/T, 1) and n_star_a =
(sigma_bar_a^2 v (phi_star + delta_bar_a)) / (phi_star + delta_bar_a)^2
sums to T by construction.

Solvers are plain bisection: bracket checked up front, 200-iteration
cap, relative tolerance 1e-13 on the root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

BISECT_MAX_ITER = 200
BISECT_REL_TOL = 1e-13


class BracketError(ValueError):
    """Root bracket invalid: the target value is not enclosed."""


class OutOfRangeError(ValueError):
    """Requested level unattainable on the search interval."""


@dataclass(frozen=True)
class FpeProblem:
    """Normalized instance for the fixed-point equation.

    horizon >= 4 and rho > 1 keep the bracket guarantees of the
    equation valid; sigma_bar and delta_bar are per-arm with arm 0
    optimal.
    """

    horizon: int
    rho: float
    sigma_bar: tuple[float, ...]
    delta_bar: tuple[float, ...]

    def __post_init__(self):
        if self.horizon < 4:
            raise ValueError(f"horizon must be >= 4, got {self.horizon}")
        if not self.rho > 1.0:
            raise ValueError(f"rho must be > 1, got {self.rho}")
        if len(self.sigma_bar) != len(self.delta_bar):
            raise ValueError("sigma_bar and delta_bar length mismatch")
        if len(self.sigma_bar) < 2:
            raise ValueError("need at least two arms")
        if self.delta_bar[0] != 0.0:
            raise ValueError("arm 0 must be optimal (delta_bar[0] = 0)")
        if any(s < 0.0 for s in self.sigma_bar):
            raise ValueError("sigma_bar entries must be >= 0")
        if any(d < 0.0 for d in self.delta_bar):
            raise ValueError("delta_bar entries must be >= 0")

    @property
    def n_arms(self) -> int:
        return len(self.sigma_bar)

    @classmethod
    def from_arms(
        cls, sigmas: list[float], gaps: list[float], rho: float, horizon: int
    ) -> "FpeProblem":
        """Build from unnormalized per-arm sds and mean gaps."""
        scale = rho * math.log(horizon)
        root = math.sqrt(scale)
        return cls(
            horizon=horizon,
            rho=rho,
            sigma_bar=tuple(s / root for s in sigmas),
            delta_bar=tuple(g / scale for g in gaps),
        )


@dataclass(frozen=True)
class FpeSolution:
    phi_star: float
    n_star: tuple[float, ...]
    residual: float


@dataclass(frozen=True)
class ConfidenceRegion:
    """Pull-count band for the optimal arm from slack around f = 1."""

    slack: float
    n1_low: float
    n1_high: float


def phi_of_count(n: float, sigma_bar: float) -> float:
    """phi(n) = (sigma_bar v n^{-1/2}) / sqrt(n); needs n >= 1."""
    if n < 1:
        raise ValueError(f"count must be >= 1, got {n}")
    rt = math.sqrt(n)
    return max(sigma_bar, 1.0 / rt) / rt


def count_from_phi(phi: float, sigma_bar: float) -> float:
    """Inverse of phi_of_count: (sigma_bar^2 v phi) / phi^2."""
    if not phi > 0.0:
        raise ValueError(f"phi must be > 0, got {phi}")
    return max(sigma_bar * sigma_bar, phi) / (phi * phi)


def fpe_lhs(phi: float, problem: FpeProblem) -> float:
    """f(phi): total limiting pull count at level phi, divided by T."""
    if not phi > 0.0:
        raise ValueError(f"phi must be > 0, got {phi}")
    total = 0.0
    horizon = problem.horizon
    for s, d in zip(problem.sigma_bar, problem.delta_bar):
        level = phi + d
        total += max(s * s, level) / (horizon * level * level)
    return total


def _bisect_decreasing(
    func, lo: float, hi: float, target: float, tol: float = BISECT_REL_TOL
) -> float:
    """Root of decreasing func(x) = target on [lo, hi]; bracket checked."""
    if not (func(lo) > target and func(hi) < target):
        raise BracketError(
            f"target {target} not strictly bracketed on [{lo}, {hi}]"
        )
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * mid:
            break
        if func(mid) >= target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_fpe(problem: FpeProblem, tol: float = BISECT_REL_TOL) -> FpeSolution:
    """Solve f(phi) = 1 on (1/T, 1) and read off the limiting counts."""
    horizon = problem.horizon
    phi_star = _bisect_decreasing(
        lambda p: fpe_lhs(p, problem), 1.0 / horizon, 1.0, 1.0, tol
    )
    n_star = []
    for s, d in zip(problem.sigma_bar, problem.delta_bar):
        level = phi_star + d
        n_star.append(max(s * s, level) / (level * level))
    return FpeSolution(
        phi_star=phi_star,
        n_star=tuple(n_star),
        residual=abs(fpe_lhs(phi_star, problem) - 1.0),
    )


def solve_perturbed(
    problem: FpeProblem, delta: float, tol: float = BISECT_REL_TOL
) -> float:
    """Root of f(phi) = 1 + delta for |delta| < 1/2."""
    if not abs(delta) < 0.5:
        raise OutOfRangeError(f"|delta| must be < 1/2, got {delta}")
    horizon = problem.horizon
    try:
        return _bisect_decreasing(
            lambda p: fpe_lhs(p, problem), 1.0 / horizon, 1.0, 1.0 + delta, tol
        )
    except BracketError as exc:
        raise OutOfRangeError(
            f"level 1 + {delta} not attained on (1/{horizon}, 1)"
        ) from exc


def _pos_part_inv(x: float) -> float:
    """(x)_+^{-1} with the convention 1/0 = +inf."""
    if x <= 0.0:
        return math.inf
    return 1.0 / x


def _variance_gap_ratio(problem: FpeProblem, arm: int) -> float:
    """sigma_bar_a^2 / (T delta_bar_a^2); +inf when the gap is zero."""
    d = problem.delta_bar[arm]
    if d == 0.0:
        return math.inf
    s = problem.sigma_bar[arm]
    return s * s / (problem.horizon * d * d)


def perturbation_bound(problem: FpeProblem, delta: float) -> float:
    """Upper bound on the relative root shift |phi_delta/phi_star - 1|.

    Two arms: 27|delta| (1 + |r - 1|^{-1} ^ sigma_bar_2/(sigma_bar_1 v
    T^{-1/2})) with r = sigma_bar_2^2/(T delta_bar_2^2). More arms: the
    constant grows to 3K + 27 and the parenthesis is maximized over
    arms, with positive-part reciprocals around the per-arm ratio r_a.
    A zero gap sends r_a to +inf, killing its reciprocal terms.
    """
    if not abs(delta) < 0.5:
        raise OutOfRangeError(f"|delta| must be < 1/2, got {delta}")
    k = problem.n_arms
    floor = max(problem.sigma_bar[0], problem.horizon ** -0.5)
    if k == 2:
        r = _variance_gap_ratio(problem, 1)
        inv = 0.0 if math.isinf(r) else _pos_part_inv(abs(r - 1.0))
        term = 1.0 + min(inv, problem.sigma_bar[1] / floor)
        return 27.0 * abs(delta) * term
    worst = 0.0
    for a in range(k):
        r = _variance_gap_ratio(problem, a)
        if math.isinf(r):
            low_inv, high_inv = math.inf, 0.0
        else:
            low_inv = _pos_part_inv(1.0 / (k - 1) - r)
            high_inv = _pos_part_inv(r - 1.0)
        term = 1.0 + min(low_inv, high_inv, problem.sigma_bar[a] / floor)
        worst = max(worst, term)
    return (3.0 * k + 27.0) * abs(delta) * worst


def confidence_region(problem: FpeProblem, slack: float) -> ConfidenceRegion:
    """Optimal-arm count band from solving f = 1 -+ slack.

    f is decreasing and count_from_phi too, so the +slack root gives
    the upper count and the -slack root the lower one.
    """
    if not 0.0 < slack < 0.5:
        raise ValueError(f"slack must lie in (0, 1/2), got {slack}")
    phi_plus = solve_perturbed(problem, slack)
    phi_minus = solve_perturbed(problem, -slack)
    return ConfidenceRegion(
        slack=slack,
        n1_low=count_from_phi(phi_minus, problem.sigma_bar[0]),
        n1_high=count_from_phi(phi_plus, problem.sigma_bar[0]),
    )


def lambda_t(sigma2: float, rho: float, horizon: int, gap: float) -> float:
    """Instability index sigma_2 sqrt(rho log T) / (sqrt(T) gap).

    +inf at gap 0; the value 1 separates the sqrt(T)-fluctuation
    regime (> 1) from concentration around the fixed point (< 1).
    """
    if sigma2 < 0.0 or gap < 0.0:
        raise ValueError("sigma2 and gap must be >= 0")
    if horizon < 2 or rho <= 0.0:
        raise ValueError("need horizon >= 2 and rho > 0")
    if gap == 0.0:
        return math.inf
    return sigma2 * math.sqrt(rho * math.log(horizon)) / (math.sqrt(horizon) * gap)


LAMBDA_REGIMES = ("homogeneous", "inhomogeneous")


def lambda_star(
    theta: float,
    regime: str,
    sigma1: float,
    sigma2: float,
    rho: float,
    horizon: int,
) -> float:
    """Limiting optimal-arm fraction lambda*(theta) in (0, 1].

    Solves lambda + g(lambda)^{-2} = 1 where g(lambda) =
    (sigma1/sigma2) lambda^{-1/2} + sqrt(theta/rho) in the homogeneous
    regime (gap ~ sigma2 sqrt(theta log T / T) with comparable sds) and
    g(lambda) = sqrt(rho log T)/(sigma2 sqrt(T)) lambda^{-1} +
    sqrt(theta/rho) in the inhomogeneous one (sigma1 = 0). The left
    side increases in lambda, so the root is unique.
    """
    if regime not in LAMBDA_REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if sigma2 <= 0.0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    if sigma1 < 0.0:
        raise ValueError(f"sigma1 must be >= 0, got {sigma1}")
    if theta < 0.0:
        raise ValueError(f"theta must be >= 0, got {theta}")
    if horizon < 2 or rho <= 0.0:
        raise ValueError("need horizon >= 2 and rho > 0")
    s = math.sqrt(theta / rho)
    if regime == "homogeneous":
        c = sigma1 / sigma2
        growth = lambda lam: lam + (c / math.sqrt(lam) + s) ** -2.0
    else:
        c = math.sqrt(rho * math.log(horizon)) / (sigma2 * math.sqrt(horizon))
        growth = lambda lam: lam + (c / lam + s) ** -2.0
    if c == 0.0:
        # degenerate homogeneous case sigma1 = 0: lam + rho/theta = 1
        if theta <= rho:
            raise OutOfRangeError(
                f"no root in (0, 1) for sigma1 = 0 with theta = {theta} <= rho = {rho}"
            )
        return 1.0 - rho / theta
    lo, hi = 1e-300, 1.0
    if not growth(hi) > 1.0:
        raise BracketError("increasing side not above 1 at lambda = 1")
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if hi - lo <= BISECT_REL_TOL * mid:
            break
        if growth(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ConcentrationConstants:
    """Deviation scale e, its log-normalized form err = e/(rho log T),
    the count-window half-width eps, and the window edges
    I_plus/I_minus = 1 +- (sqrt(err) + err)."""

    e: float
    err: float
    eps: float
    i_plus: float
    i_minus: float


def concentration_constants(delta: float, rho: float, horizon: int) -> ConcentrationConstants:
    """Constants for uniform mean/variance deviation events at level delta.

    e = sqrt(48 rho log T log(log(T/delta)/delta)) + 128 log(1/delta);
    requires log(T/delta) > 1 so the inner logarithm is positive.
    """
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    if horizon < 2 or rho <= 0.0:
        raise ValueError("need horizon >= 2 and rho > 0")
    log_ratio = math.log(horizon / delta)
    if not log_ratio > 1.0:
        raise ValueError(f"log(T/delta) must exceed 1, got {log_ratio}")
    log_term = rho * math.log(horizon)
    e = math.sqrt(48.0 * log_term * math.log(log_ratio / delta)) + 128.0 * math.log(
        1.0 / delta
    )
    err = e / log_term
    root = math.sqrt(err)
    eps = 5.0 * root + 200.0 / math.sqrt(horizon)
    return ConcentrationConstants(
        e=e, err=err, eps=eps, i_plus=1.0 + root + err, i_minus=1.0 - root - err
    )


def n2_bound(phi1: float, problem: FpeProblem, arm: int) -> float:
    """High-probability cap on a suboptimal arm's pulls given the
    optimal arm's current level phi1:

        16/(delta_bar_a + phi1)  v  (16 sigma_a / (delta_bar_a + phi1))^2,

    with sigma_a the arm's UNnormalized sd.
    """
    if not phi1 > 0.0:
        raise ValueError(f"phi1 must be > 0, got {phi1}")
    if not 1 <= arm < problem.n_arms:
        raise ValueError(f"arm must be a suboptimal index, got {arm}")
    level = problem.delta_bar[arm] + phi1
    sigma = problem.sigma_bar[arm] * math.sqrt(problem.rho * math.log(problem.horizon))
    return max(16.0 / level, (16.0 * sigma / level) ** 2)


def regret_bound(
    sigma1: float, sigma_subopt: list[float], rho: float, horizon: int
) -> float:
    """Variance-aware regret bound

        16 (sqrt(sum sigma_a^2) ^ sum 16 sigma_a^2 / sigma1)
          sqrt(rho T log T) + (K-1) sqrt(rho log T),

    sums over suboptimal arms; sigma1 = 0 disables the second branch.
    """
    if sigma1 < 0.0 or any(s < 0.0 for s in sigma_subopt):
        raise ValueError("sds must be >= 0")
    if horizon < 3 or rho <= 0.0:
        raise ValueError("need horizon >= 3 and rho > 0")
    sum_sq = sum(s * s for s in sigma_subopt)
    root_branch = math.sqrt(sum_sq)
    if sigma1 == 0.0:
        ratio_branch = math.inf if sum_sq > 0.0 else 0.0
    else:
        ratio_branch = 16.0 * sum_sq / sigma1
    log_term = rho * math.log(horizon)
    return 16.0 * min(root_branch, ratio_branch) * math.sqrt(
        horizon * log_term
    ) + len(sigma_subopt) * math.sqrt(log_term)


def region_sweep(
    horizon: int,
    rho: float,
    sigma1: float,
    sigma2: float,
    lambdas: list[float],
    slack: float,
) -> list[dict]:
    """Fixed point plus confidence band across an instability-index grid.

    Each lambda is converted to the two-arm gap
    sigma2 sqrt(rho log T) / (sqrt(T) lambda); rows carry the gap, the
    root, n1_star and the band.
    """
    rows = []
    scale = math.sqrt(rho * math.log(horizon))
    for lam in lambdas:
        if not lam > 0.0:
            raise ValueError(f"lambda values must be > 0, got {lam}")
        gap = sigma2 * scale / (math.sqrt(horizon) * lam)
        problem = FpeProblem.from_arms([sigma1, sigma2], [0.0, gap], rho, horizon)
        sol = solve_fpe(problem)
        region = confidence_region(problem, slack)
        rows.append(
            {
                "lambda": lam,
                "gap": gap,
                "phi_star": sol.phi_star,
                "n1_star": sol.n_star[0],
                "n1_low": region.n1_low,
                "n1_high": region.n1_high,
                "residual": sol.residual,
            }
        )
    return rows


def solution_rows(problems: list[FpeProblem], solutions: list[FpeSolution]) -> tuple[list[str], list[list]]:
    """Flatten (problem, solution) pairs into CSV columns and rows.

    All problems must share the arm count so the per-arm columns line
    up.
    """
    if len(problems) != len(solutions):
        raise ValueError("problems and solutions length mismatch")
    if not problems:
        raise ValueError("empty input")
    k = problems[0].n_arms
    if any(p.n_arms != k for p in problems):
        raise ValueError("mixed arm counts in one export")
    header = ["T", "rho"]
    header += [f"sigma_bar_{a + 1}" for a in range(k)]
    header += [f"delta_bar_{a + 1}" for a in range(k)]
    header += ["phi_star"] + [f"n_star_{a + 1}" for a in range(k)] + ["residual"]
    rows = []
    for p, s in zip(problems, solutions):
        rows.append(
            [p.horizon, p.rho]
            + list(p.sigma_bar)
            + list(p.delta_bar)
            + [s.phi_star]
            + list(s.n_star)
            + [s.residual]
        )
    return header, rows
