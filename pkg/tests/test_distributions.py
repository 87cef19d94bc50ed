"""Reward laws: exact moments, constructions, KL, instance plumbing."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ucbvlab.distributions as D
from ucbvlab.rng import Xoshiro256PP, seed_state_vector, next_uniform_vector

ATOL = 1e-12


# ---------------------------------------------------------------- sampling


def test_deterministic_sample_is_exact():
    dist = D.deterministic(0.75)
    gen = Xoshiro256PP(3)
    assert all(D.sample(dist, gen) == 0.75 for _ in range(100))


def test_bernoulli_degenerate_probability():
    dist = D.bernoulli(1.0)
    gen = Xoshiro256PP(4)
    assert all(D.sample(dist, gen) == 1.0 for _ in range(100))


def test_bernoulli_half_mean_over_a_million_draws():
    dist = D.bernoulli(0.5)
    state = seed_state_vector(np.arange(1000, dtype=np.uint64))
    total = 0.0
    for _ in range(1000):  # 1000 lanes x 1000 rounds = 1e6 draws
        total += float(np.sum(next_uniform_vector(state) < dist.p_high))
    assert abs(total / 1e6 - 0.5) <= 0.005


def test_sample_consumes_exactly_one_uniform_per_draw():
    # Deterministic burns a draw too: both streams stay aligned
    gen_a, gen_b = Xoshiro256PP(9), Xoshiro256PP(9)
    det, ber = D.deterministic(0.3), D.bernoulli(0.4)
    D.sample(det, gen_a)
    D.sample(ber, gen_b)
    assert gen_a.next_uint64() == gen_b.next_uint64()


# ---------------------------------------------------------------- moments


def test_bernoulli_moments():
    assert D.moments(D.bernoulli(0.5)) == (0.5, 0.25)


def test_q_moments():
    mean, var = D.moments(D.make_q(0.2, 0.3))
    assert math.isclose(mean, 0.2, abs_tol=ATOL)
    assert math.isclose(var, 0.09, abs_tol=ATOL)


def _atom_moments(dist):
    mean = sum(a * p for a, p in dist.atoms())
    var = sum(p * (a - mean) ** 2 for a, p in dist.atoms())
    return mean, var


@given(
    mu=st.floats(0.05, 0.3),
    sigma=st.floats(0.31, 0.45),
    frac=st.floats(0.0, 1.0),
)
@settings(max_examples=200)
def test_q_delta_moments_match_atom_summation(mu, sigma, frac):
    # keep (mu, sigma, delta) inside the shift preconditions
    delta = min(sigma / 2.0, (sigma * sigma - mu * mu) / mu * 0.99)
    delta = max(delta * frac, sigma - mu)
    if not (sigma > mu >= sigma - delta and 0.0 < delta <= sigma / 2.0):
        return
    if not delta < (mu * mu + sigma * sigma) / mu - 2.0 * mu:
        return
    dist = D.make_q_delta(mu, sigma, delta)
    mean, var = _atom_moments(dist)
    assert math.isclose(dist.mean, mu + delta, rel_tol=ATOL, abs_tol=ATOL)
    assert math.isclose(mean, dist.mean, rel_tol=ATOL, abs_tol=ATOL)
    assert math.isclose(var, dist.variance, rel_tol=ATOL, abs_tol=ATOL)
    assert math.isclose(
        dist.variance, (1.0 + delta / mu) * (sigma * sigma - mu * delta),
        rel_tol=1e-9,
    )
    assert dist.variance > sigma * sigma  # the shift inflates the sd


def test_declared_moments_must_match_atoms():
    with pytest.raises(ValueError):
        D.RewardDistribution(
            variant="Bernoulli", params=(("p", 0.5),),
            low=0.0, high=1.0, p_high=0.5, mean=0.6, variance=0.25,
        )


# ------------------------------------------------------------ constructors


def test_symmetric_two_point_atoms():
    dist = D.make_symmetric_two_point(0.5, 0.25)
    assert dist.atoms() == ((0.25, 0.5), (0.75, 0.5))


def test_symmetric_two_point_zero_sigma_collapses():
    assert D.make_symmetric_two_point(0.5, 0.0) == D.deterministic(0.5)


def test_symmetric_two_point_support_violation():
    with pytest.raises(D.SupportViolationError):
        D.make_symmetric_two_point(0.1, 0.2)


def test_q_atoms_and_weights():
    dist = D.make_q(0.2, 0.3)
    assert math.isclose(dist.high, 0.65, abs_tol=ATOL)
    assert dist.low == 0.0
    assert math.isclose(1.0 - dist.p_high, 0.09 / 0.13, abs_tol=ATOL)


def test_q_delta_zero_shift_equals_q():
    assert D.make_q_delta(0.2, 0.3, 0.0) == D.make_q(0.2, 0.3)


def test_q_delta_boundary_point_valid():
    # mu = sigma - delta sits exactly on the edge of the condition
    dist = D.make_q_delta(0.1, 0.2, 0.1)
    want = (1.0 + 0.1 / 0.1) * (0.04 - 0.1 * 0.1)
    assert math.isclose(dist.variance, want, rel_tol=1e-12)


def test_q_delta_reports_every_failed_condition():
    # mu > sigma violates 'sigma > mu' and delta > sigma/2 violates the cap
    with pytest.raises(D.PreconditionError) as err:
        D.make_q_delta(0.5, 0.3, 0.2)
    assert len(err.value.failed) >= 2
    assert any("sigma > mu" in msg for msg in err.value.failed)
    assert any("sigma/2" in msg for msg in err.value.failed)


# ---------------------------------------------------------------------- KL


def test_kl_identical_laws_is_zero():
    q = D.make_q(0.2, 0.3)
    assert D.kl_two_point(q, q) == 0.0


def test_kl_hand_sum():
    p = D.make_symmetric_two_point(0.5, 0.5)  # atoms {0, 1}, weights 1/2
    q = D.bernoulli(0.75)
    want = 0.5 * math.log(2.0) + 0.5 * math.log(2.0 / 3.0)
    assert math.isclose(D.kl_two_point(p, q), want, rel_tol=1e-12)
    assert math.isclose(want, 0.14384, abs_tol=5e-6)


def test_kl_support_mismatch():
    with pytest.raises(D.SupportMismatchError):
        D.kl_two_point(D.make_q(0.2, 0.3), D.make_q(0.25, 0.3))


def test_kl_absolute_continuity():
    p = D.bernoulli(0.5)
    q = D.bernoulli(1.0)  # no mass at 0
    with pytest.raises(D.AbsoluteContinuityError):
        D.kl_two_point(p, q)


def _valid_shift_grid():
    for sigma in (0.1, 0.2, 0.3, 0.4):
        for dfrac in (0.1, 0.25, 0.5):
            delta = dfrac * sigma
            for mfrac in (0.0, 0.5, 0.9):
                mu = sigma - delta + mfrac * delta
                if mu <= 0.0 or sigma <= mu:
                    continue
                if delta >= (mu * mu + sigma * sigma) / mu - 2.0 * mu:
                    continue
                yield mu, sigma, delta


def test_kl_bound_on_the_valid_grid():
    checked = 0
    for mu, sigma, delta in _valid_shift_grid():
        kl = D.kl_two_point(D.make_q(mu, sigma), D.make_q_delta(mu, sigma, delta))
        assert kl >= 0.0
        assert kl <= 4.0 * delta * delta / (sigma * sigma), (mu, sigma, delta)
        checked += 1
    assert checked >= 20


# ------------------------------------------------------------ monte carlo


@pytest.mark.parametrize(
    "dist",
    [
        D.make_symmetric_two_point(0.5, 0.25),
        D.make_q(0.2, 0.3),
        D.make_q_delta(0.15, 0.2, 0.08),
        D.bernoulli(0.3),
    ],
    ids=["symmetric", "q", "q_delta", "bernoulli"],
)
def test_analytic_moments_match_monte_carlo(dist):
    n = 1_000_000
    lanes = 1000
    state = seed_state_vector(np.arange(500, 500 + lanes, dtype=np.uint64))
    vals = np.empty((n // lanes, lanes))
    for i in range(n // lanes):
        u = next_uniform_vector(state)
        vals[i] = np.where(u < dist.p_high, dist.high, dist.low)
    mean = float(vals.mean())
    var = float(vals.var())
    se_mean = math.sqrt(dist.variance / n)
    # se of the sample variance of a two-point law: sqrt((m4 - var^2)/n)
    m4 = sum(p * (a - dist.mean) ** 4 for a, p in dist.atoms())
    # the centering term (mean - mu)^2 ~ var/n dominates when m4 = var^2
    se_var = math.sqrt(max(m4 - dist.variance**2, 1e-30) / n) + 25 * dist.variance / n
    assert abs(mean - dist.mean) <= 5 * se_mean
    assert abs(var - dist.variance) <= 5 * se_var


# ----------------------------------------------------------- instances


def test_instability_instance_shape():
    inst = D.instability_instance(2.0, 50_000)
    gap = math.sqrt(0.25 * 2.0 * math.log(50_000) / 50_000)
    assert inst.arms[0].distribution.variant == "Deterministic"
    assert math.isclose(inst.arms[0].mean, 0.5 + gap, abs_tol=ATOL)
    assert inst.arms[1].distribution == D.bernoulli(0.5)
    assert inst.optimal_index == 0
    assert inst.gaps[0] == 0.0
    assert math.isclose(inst.gaps[1], gap, abs_tol=ATOL)
    assert D.moments(inst.arms[1].distribution) == (0.5, 0.25)


def test_instability_instance_horizon_too_small():
    # rho log T / T > 1 pushes mu + gap past 1
    with pytest.raises(D.HorizonTooSmallError):
        D.instability_instance(3.0, 2)


def test_make_instance_tie_breaks_to_lowest_index():
    inst = D.make_instance([D.bernoulli(0.5), D.make_symmetric_two_point(0.5, 0.1)])
    assert inst.optimal_index == 0
    assert inst.gaps == (0.0, 0.0)


def test_instance_rejects_wrong_optimal_index():
    arms = tuple(D.ArmSpec.of(d) for d in [D.bernoulli(0.2), D.bernoulli(0.6)])
    with pytest.raises(ValueError):
        D.BanditInstance(arms=arms, optimal_index=0, gaps=(0.4, 0.0))


def test_armspec_rejects_inconsistent_moments():
    with pytest.raises(ValueError):
        D.ArmSpec(distribution=D.bernoulli(0.5), mean=0.5, variance=0.3)


# ---------------------------------------------------------------- JSON


def test_json_round_trip_and_field_names():
    inst = D.make_instance(
        [
            D.make_symmetric_two_point(0.6, 0.2),
            D.bernoulli(0.5),
            D.make_q(0.2, 0.3),
            D.make_q_delta(0.15, 0.2, 0.08),
            D.deterministic(0.25),
        ]
    )
    text = D.to_json(inst)
    payload = json.loads(text)
    assert set(payload) == {"arms", "optimal_index"}
    assert all(set(arm) == {"variant", "params"} for arm in payload["arms"])
    assert payload["arms"][1]["params"] == {"p": 0.5}
    assert D.from_json(text) == inst


def test_from_json_rejects_stale_optimal_index():
    inst = D.make_instance([D.bernoulli(0.8), D.bernoulli(0.2)])
    payload = json.loads(D.to_json(inst))
    payload["optimal_index"] = 1
    with pytest.raises(ValueError):
        D.from_json(json.dumps(payload))


def test_from_json_rejects_unknown_variant():
    with pytest.raises(ValueError):
        D.from_json('{"arms": [{"variant": "Gaussian", "params": {}}], "optimal_index": 0}')
