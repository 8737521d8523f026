import math

import numpy as np
import pytest

from teleportability.channels import (
    KrausChannel,
    ModelSpecError,
    NoiseModel,
    amplitude_damping_local,
    bit_flip_pair,
    bitphase_flip_pair,
    check_completeness,
    combined_depolarizing,
    global_depolarizing,
    phase_damping_local,
    phase_flip_pair,
)
from teleportability.metrics import moments
from teleportability.qmath import I2, SX, SY, QState, apply_kraus, kron
from teleportability.states import bell_state, schmidt_state

from .conftest import random_state

PAIRS = (bit_flip_pair, phase_flip_pair, bitphase_flip_pair, amplitude_damping_local, phase_damping_local)


@pytest.mark.parametrize("make", PAIRS)
def test_completeness_on_grid(make):
    for a in np.linspace(0, 1, 7):
        for b in np.linspace(0, 1, 7):
            assert check_completeness(make(a, b)) <= 1e-12


def test_check_completeness_values():
    assert check_completeness(KrausChannel((np.eye(4),))) == 0
    assert check_completeness(bit_flip_pair(0.3, 0.9)) <= 1e-15
    assert check_completeness(KrausChannel((math.sqrt(0.5) * np.eye(4),))) == pytest.approx(0.5)


@pytest.mark.parametrize("make", PAIRS)
def test_range_checks(make):
    with pytest.raises(ValueError):
        make(-0.1, 0.5)
    with pytest.raises(ValueError):
        make(0.5, 1.2)


def test_flip_identity_and_full_flip():
    rho = schmidt_state(0.3)
    for make in (bit_flip_pair, phase_flip_pair, bitphase_flip_pair):
        np.testing.assert_allclose(apply_kraus(rho, make(1, 1)).matrix, rho.matrix, atol=1e-15)
    xx = kron(SX, SX)
    np.testing.assert_allclose(apply_kraus(rho, bit_flip_pair(0, 0)).matrix, xx @ rho.matrix @ xx, atol=1e-15)
    y1 = kron(SY, I2)
    np.testing.assert_allclose(
        apply_kraus(rho, bitphase_flip_pair(0, 1)).matrix, y1 @ rho.matrix @ y1.conj().T, atol=1e-15
    )


def test_bit_flip_mixture_example():
    rho = schmidt_state(0.3).matrix
    x1 = kron(SX, I2)
    out = apply_kraus(QState(rho), bit_flip_pair(0.7, 1)).matrix
    np.testing.assert_allclose(out, 0.7 * rho + 0.3 * x1 @ rho @ x1, atol=1e-15)


def test_phase_flip_scales_coherence_and_keeps_diagonal(rng):
    rho = schmidt_state(0.3)
    out = apply_kraus(rho, phase_flip_pair(0.7, 1)).matrix
    assert out[0, 3] == pytest.approx(0.4 * rho.matrix[0, 3], abs=1e-15)
    s = random_state(rng, 4)
    np.testing.assert_allclose(np.diag(apply_kraus(s, phase_flip_pair(0.2, 0.6)).matrix), np.diag(s.matrix), atol=1e-15)


def test_amplitude_damping_examples(rng):
    s = random_state(rng, 4)
    np.testing.assert_allclose(apply_kraus(s, amplitude_damping_local(0, 0)).matrix, s.matrix, atol=1e-15)
    ground = np.zeros((4, 4))
    ground[0, 0] = 1
    np.testing.assert_allclose(apply_kraus(s, amplitude_damping_local(1, 1)).matrix, ground, atol=1e-15)
    ket11 = QState.from_ket(np.array([0, 0, 0, 1]))
    expected = np.zeros((4, 4))
    expected[3, 3] = expected[1, 1] = 0.5  # |11> and |01>
    np.testing.assert_allclose(apply_kraus(ket11, amplitude_damping_local(0.5, 0)).matrix, expected, atol=1e-15)


def test_phase_damping_examples(rng):
    s = random_state(rng, 4)
    np.testing.assert_allclose(apply_kraus(s, phase_damping_local(0, 0)).matrix, s.matrix, atol=1e-15)
    out = apply_kraus(schmidt_state(0.3), phase_damping_local(1, 1)).matrix
    np.testing.assert_allclose(out, np.diag([0.3, 0, 0, 0.7]), atol=1e-15)
    np.testing.assert_allclose(np.diag(apply_kraus(s, phase_damping_local(0.3, 0.8)).matrix), np.diag(s.matrix), atol=1e-15)


def test_global_depolarizing_examples():
    rho = schmidt_state(0.3)
    np.testing.assert_allclose(global_depolarizing(rho, 1).matrix, rho.matrix, atol=0)
    np.testing.assert_allclose(global_depolarizing(rho, 0).matrix, np.eye(4) / 4, atol=0)
    werner = global_depolarizing(QState.from_ket(bell_state(0)), 0.7)
    np.testing.assert_allclose(np.linalg.eigvalsh(werner.matrix), [0.075, 0.075, 0.075, 0.775], atol=1e-15)
    with pytest.raises(ValueError):
        global_depolarizing(rho, 1.5)


def test_combined_depolarizing_examples():
    np.testing.assert_allclose(combined_depolarizing(0.3, 0, 0, 0).matrix, schmidt_state(0.3).matrix, atol=1e-15)
    np.testing.assert_allclose(combined_depolarizing(0.3, 1, 0, 0).matrix, np.eye(4) / 4, atol=1e-15)
    np.testing.assert_allclose(combined_depolarizing(0.5, 0, 1, 0).matrix, np.eye(4) / 4, atol=1e-15)
    with pytest.raises(ValueError):
        combined_depolarizing(0.3, 0.5, 0.4, 0.2)
    with pytest.raises(ValueError):
        combined_depolarizing(0.3, -0.1, 0, 0)


@pytest.mark.parametrize("alpha", [0.0, 0.1, 0.37, 0.5])
@pytest.mark.parametrize("p", [0.0, 0.3, 0.9])
def test_combined_without_local_matches_global(alpha, p):
    # global map keeps weight 1 - p on the resource when written in the combined form
    a = combined_depolarizing(alpha, p, 0, 0).matrix
    b = global_depolarizing(schmidt_state(alpha), 1 - p).matrix
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_bit_flip_p_q_symmetry(rng):
    for _ in range(20):
        alpha, p, q = rng.uniform(0, 1, 3)
        m1 = moments(NoiseModel("bit_flip", {"p": p, "q": q}), alpha)
        m2 = moments(NoiseModel("bit_flip", {"p": q, "q": p}), alpha)
        assert abs(m1.F - m2.F) <= 1e-10 and abs(m1.D - m2.D) <= 1e-10


# -- text form -----------------------------------------------------------------


@pytest.mark.parametrize(
    "text, kind, params",
    [
        ("noiseless", "noiseless", {}),
        ("bit_flip:p=0.7,q=1.0", "bit_flip", {"p": 0.7, "q": 1.0}),
        ("bit_flip:p=0.7", "bit_flip", {"p": 0.7, "q": 1.0}),
        ("global_dep:p=0.7", "global_depolarizing", {"p": 0.7}),
        ("combined_dep:p=0.1,p1=0.05,p2=0.05", "combined_depolarizing", {"p": 0.1, "p1": 0.05, "p2": 0.05}),
        ("amp_damp:g1=0.2,g2=0.1", "amplitude_damping", {"g1": 0.2, "g2": 0.1}),
        ("phase_damp:l1=0.3", "phase_damping", {"l1": 0.3, "l2": 0.0}),
    ],
)
def test_parse(text, kind, params):
    m = NoiseModel.parse(text)
    assert m.kind == kind
    assert dict(m.params) == params
    assert NoiseModel.parse(m.to_text()) == m


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("warp:p=1", "unknown noise kind"),
        ("bit_flip:x=0.1", "'x'"),
        ("bit_flip:p", "malformed"),
        ("bit_flip:p=abc", "'p'"),
        ("bit_flip:p=1.5", "p must lie in [0, 1]"),
        ("combined_dep:p=0.5,p1=0.4,p2=0.3", "p + p1 + p2 <= 1"),
        ("bit_flip:p=0.1,p=0.2", "twice"),
        ("", "empty"),
    ],
)
def test_parse_errors_name_the_problem(text, fragment):
    with pytest.raises(ModelSpecError) as exc:
        NoiseModel.parse(text)
    assert fragment in str(exc.value)


def test_model_resource_is_valid_state():
    for text in ("noiseless", "bit_flip:p=0.3,q=0.2", "amp_damp:g1=0.5,g2=0.5", "global_dep:p=0.2", "combined_dep:p=0.2,p1=0.3,p2=0.1"):
        r = NoiseModel.parse(text).resource(0.2)
        assert r.dim == 4
