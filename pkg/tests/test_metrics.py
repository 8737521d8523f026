import math

import numpy as np
import pytest
from scipy import integrate

from teleportability.channels import NoiseModel
from teleportability.metrics import (
    CLOSED_FORM,
    D_CLASSICAL,
    QUADRATURE,
    SQRT5,
    AverageMethod,
    ScoreRecord,
    UnboundedSensitivityError,
    avg_fidelity,
    bit_flip_deviation,
    chain_deviation,
    chain_fidelity,
    classical_score,
    fidelity_deviation,
    haar_mean,
    haar_second_moment,
    is_quantum_useful,
    k_star,
    moments,
    monte_carlo_stats,
    noiseless_deviation,
    noiseless_fidelity,
    score,
    simulated_integrand,
    tele_score,
)
from teleportability.states import SchmidtParam
from teleportability.teleport import ChainSpec, FidelityForm

MC = AverageMethod.monte_carlo(200_000, seed=11)
ALL_METHODS = (CLOSED_FORM, QUADRATURE, MC)


def sphere_average(fn):
    """Independent oracle: adaptive 2-D quadrature over the sphere."""
    val, _ = integrate.dblquad(
        lambda phi, theta: fn(theta, phi) * math.sin(theta) / (4 * math.pi),
        0,
        math.pi,
        0,
        2 * math.pi,
        epsabs=1e-13,
        epsrel=1e-13,
    )
    return val


SIN2 = FidelityForm(0.0, 1.0)


def test_oracle_moments():
    assert sphere_average(lambda t, p: math.sin(t) ** 2) == pytest.approx(2 / 3, abs=1e-12)
    assert sphere_average(lambda t, p: math.sin(t) ** 4) == pytest.approx(8 / 15, abs=1e-12)
    assert sphere_average(lambda t, p: math.sin(t) ** 4 * math.cos(2 * p) ** 2) == pytest.approx(4 / 15, abs=1e-12)


@pytest.mark.parametrize("method", ALL_METHODS, ids=lambda m: m.kind)
def test_constant_integrand(method):
    c = FidelityForm(0.37)
    assert haar_mean(c, method) == pytest.approx(0.37, abs=1e-12)
    assert haar_second_moment(c, method) == pytest.approx(0.37**2, abs=1e-12)


def test_sin2_moments():
    assert haar_mean(SIN2) == pytest.approx(2 / 3, abs=1e-15)
    assert haar_second_moment(SIN2) == pytest.approx(8 / 15, abs=1e-15)
    assert haar_mean(SIN2, QUADRATURE) == pytest.approx(2 / 3, abs=1e-13)
    assert haar_second_moment(SIN2, QUADRATURE) == pytest.approx(8 / 15, abs=1e-13)


@pytest.mark.parametrize("form", [FidelityForm(0.3, -0.2, 0.15), FidelityForm(0.9, 0.05, -0.4), FidelityForm(1, -0.5, 0)])
def test_closed_moments_against_oracle(form):
    assert haar_mean(form) == pytest.approx(sphere_average(form), abs=1e-12)
    assert haar_second_moment(form) == pytest.approx(sphere_average(lambda t, p: form(t, p) ** 2), abs=1e-12)


def test_closed_form_rejects_arbitrary_callable():
    with pytest.raises(ValueError, match="affine"):
        haar_mean(lambda t, p: np.cos(t), CLOSED_FORM)


def test_method_validation():
    with pytest.raises(ValueError):
        AverageMethod.quadrature(4, 64)
    with pytest.raises(ValueError):
        AverageMethod("monte_carlo", samples=10)
    with pytest.raises(ValueError):
        AverageMethod.monte_carlo(0, seed=1)


def test_noiseless_at_product_state_is_classical():
    f = moments(NoiseModel(), 0.0)
    assert f.F == pytest.approx(2 / 3, abs=1e-15)
    assert f.D == pytest.approx(1 / (3 * SQRT5), abs=1e-15)
    assert f.D == pytest.approx(D_CLASSICAL, abs=1e-15)


def test_noiseless_perfect_resource():
    m = moments(NoiseModel(), 0.5)
    assert m.F == 1.0
    assert m.D == 0.0


def test_bit_flip_half():
    m = NoiseModel.parse("bit_flip:p=0.7,q=1")
    assert avg_fidelity(m, 0.5) == pytest.approx(0.8, abs=1e-15)
    assert fidelity_deviation(m, 0.5) == pytest.approx(0.6 / (3 * SQRT5), abs=1e-15)
    # oracle: 10^6 Monte Carlo samples of the simulated protocol
    stats = monte_carlo_stats(simulated_integrand(m, 0.5), 1_000_000, seed=5)
    assert abs(stats.mean - 0.8) <= 3 * stats.se_mean
    assert abs(stats.std - 0.6 / (3 * SQRT5)) <= 3 * stats.se_std


def test_global_dep_product_state():
    m = NoiseModel.parse("global_dep:p=0.7")
    assert avg_fidelity(m, 0.0) == pytest.approx(0.7 * 2 / 3 + 0.15, abs=1e-15)
    assert avg_fidelity(m, 0.0) == pytest.approx(0.6166666666666667, abs=1e-15)


def test_published_forms_agree_with_quadrature(rng):
    for text in ("bit_flip:p={p}", "bit_flip:p=1,q={p}", "phase_flip:p={p}", "bitphase_flip:p={p}", "global_dep:p={p}"):
        for _ in range(20):
            alpha, p = rng.uniform(0, 1, 2)
            m = NoiseModel.parse(text.format(p=p))
            cf, q = moments(m, alpha), moments(m, alpha, QUADRATURE)
            assert cf.route == "closed_form"
            assert abs(cf.F - q.F) <= 1e-9 and abs(cf.D - q.D) <= 1e-9


def test_two_sided_flips_use_formula_quadrature(rng):
    m = NoiseModel.parse("bit_flip:p=0.3,q=0.6")
    cf = moments(m, 0.2)
    assert cf.route == "formula_quadrature"
    assert cf.F == pytest.approx(moments(m, 0.2, QUADRATURE).F, abs=1e-12)


def test_damping_models_are_numeric():
    m = NoiseModel.parse("amp_damp:g1=0.3,g2=0.1")
    mo = moments(m, 0.3)
    assert mo.route == "simulation_quadrature"
    assert 0 <= mo.F <= 1 and mo.D >= 0


def test_chain_moments(rng):
    for n in (1, 2, 3, 5):
        for alpha in rng.uniform(0, 0.5, 5):
            spec = ChainSpec(n, SchmidtParam(alpha))
            cf = moments(NoiseModel(), spec)
            q = moments(NoiseModel(), spec, QUADRATURE)
            assert cf.F == pytest.approx(chain_fidelity(n, alpha))
            assert abs(cf.F - q.F) <= 1e-9 and abs(cf.D - q.D) <= 1e-9
    assert chain_fidelity(1, 0.3) == pytest.approx(noiseless_fidelity(0.3), abs=1e-15)
    assert chain_deviation(1, 0.3) == pytest.approx(noiseless_deviation(0.3), abs=1e-15)


def test_monte_carlo_independent_of_workers():
    f = simulated_integrand(NoiseModel.parse("bit_flip:p=0.6,q=0.9"), 0.2)
    serial = monte_carlo_stats(f, 300_001, seed=3, workers=1)
    parallel = monte_carlo_stats(f, 300_001, seed=3, workers=4)
    assert serial == parallel


def test_monte_carlo_seed_matters():
    f = simulated_integrand(NoiseModel(), 0.2)
    assert monte_carlo_stats(f, 1000, seed=1).mean != monte_carlo_stats(f, 1000, seed=2).mean


# -- scores ------------------------------------------------------------------------


def test_tele_score_values():
    assert tele_score(1, 0, 7) == 1
    assert tele_score(0.8, 0.1, 0) == 0.8
    assert tele_score(2 / 3, 1 / (3 * SQRT5), 2.5) == pytest.approx((2 - 2.5 / SQRT5) / 3, abs=1e-15)
    assert tele_score(2 / 3, 1 / (3 * SQRT5), 2.5) == pytest.approx(0.29398, abs=1e-5)
    with pytest.raises(ValueError):
        tele_score(1, 0, -1)


def test_classical_score_values():
    assert classical_score(0) == pytest.approx(2 / 3, abs=1e-15)
    assert classical_score(SQRT5) == pytest.approx(1 / 3, abs=1e-15)
    assert classical_score(2 * SQRT5) == pytest.approx(0, abs=1e-15)


def test_quantum_useful():
    assert is_quantum_useful(1, 0, 3)
    assert not is_quantum_useful(2 / 3, 0.0, 0.5)
    assert not is_quantum_useful(2 / 3, 0.5, 10)
    # tau = 0.31 against a classical (2 - 3/sqrt(5))/3
    assert classical_score(3) == pytest.approx(0.2194531, abs=1e-7)
    assert is_quantum_useful(0.7, 0.13, 3)


def test_score_record_invariants(rng):
    for _ in range(50):
        alpha, p, k = rng.uniform(0, 0.5), rng.uniform(0, 1), rng.uniform(0, 8)
        rec = score(NoiseModel("global_depolarizing", {"p": p}), alpha, k)
        assert rec.tau == rec.F - k * rec.D
        assert rec.quantum_useful == (rec.F > 2 / 3 and rec.tau > rec.tau_classical)
        assert rec == ScoreRecord.from_moments(rec.F, rec.D, k)


def test_identity_d_equals_one_minus_f_over_root5(rng):
    for _ in range(100):
        alpha, p = rng.uniform(0, 1), rng.uniform(0, 1)
        nl = moments(NoiseModel(), alpha)
        assert abs(nl.D - (1 - nl.F) / SQRT5) <= 1e-12
        pf = moments(NoiseModel("phase_flip", {"p": p}), alpha)
        assert abs(pf.D - (1 - pf.F) / SQRT5) <= 1e-12
        gd = moments(NoiseModel("global_depolarizing", {"p": p}), alpha)
        assert abs(gd.D - p * (1 - nl.F) / SQRT5) <= 1e-12


def test_noiseless_score_monotone_in_alpha():
    grid = np.linspace(0, 0.5, 200)
    for k in (0, 0.5, 2, 4.4, 10, 50):
        taus = [score(NoiseModel(), a, k).tau for a in grid]
        assert all(b > a for a, b in zip(taus, taus[1:]))


def test_bit_flip_score_not_monotone():
    m = NoiseModel.parse("bit_flip:p=0.7,q=1")
    grid = np.linspace(0.05, 0.5, 451)
    taus = [score(m, a, 2.5).tau for a in grid]
    assert any(b < a for a, b in zip(taus, taus[1:]))


def test_factored_deviations_match_radicands(rng):
    for _ in range(200):
        alpha, p = rng.uniform(0, 1, 2)
        x, r = alpha * (1 - alpha), math.sqrt(alpha * (1 - alpha))
        assert noiseless_deviation(alpha) == pytest.approx(math.sqrt(max(1 + 4 * x - 4 * r, 0)) / (3 * SQRT5), abs=1e-7)
        rad = 1 + 4 * (2 * p - 1) ** 2 * alpha - 4 * (2 * p - 1) ** 2 * alpha**2 - 4 * r + 8 * (1 - p) * r
        assert moments(NoiseModel("phase_flip", {"p": p}), alpha).D == pytest.approx(
            math.sqrt(max(rad, 0)) / (3 * SQRT5), abs=1e-7
        )


def test_bit_flip_deviation_formula_matches_moments(rng):
    for _ in range(50):
        alpha, p = rng.uniform(0, 1, 2)
        form_d = moments(NoiseModel("bit_flip", {"p": p, "q": 0.9999999}), alpha).D
        assert bit_flip_deviation(alpha, p) == pytest.approx(form_d, abs=1e-6)


# -- k* -------------------------------------------------------------------------------


def test_k_star_noiseless():
    ks = k_star(NoiseModel())
    assert ks.k_star == pytest.approx(2 * SQRT5, abs=1e-12)
    assert ks.alpha == 0.0


def test_k_star_bit_flip():
    ks = k_star(NoiseModel.parse("bit_flip:p=0.7,q=1"))
    assert ks.k_star == pytest.approx(8.94, abs=0.1)
    assert ks.alpha == pytest.approx(0.5, abs=1e-9)


def test_k_star_global_dep_nonclassical():
    from teleportability.sweep import nonclassical_range

    m = NoiseModel.parse("global_dep:p=0.7")
    lo, hi = nonclassical_range(m)
    ks = k_star(m, (lo, hi))
    # F/D at the classical threshold, computed directly
    expected = (2 / 3) / (0.7 * (1 - (2 / 3 - 0.15) / 0.7) / SQRT5)
    assert ks.k_star == pytest.approx(expected, abs=1e-9)
    assert ks.alpha == pytest.approx(lo, abs=1e-12)


def test_k_star_unbounded():
    with pytest.raises(UnboundedSensitivityError):
        k_star(NoiseModel(), (0.5, 0.5))


def test_k_star_range_validation():
    with pytest.raises(ValueError):
        k_star(NoiseModel(), (0.2, 0.7))
