"""Standard one-qubit teleportation over a two-qubit resource.

The protocol is simulated on three qubits ordered (input, Alice's half,
Bob's half): project the first two onto each Bell state, apply the matching
Pauli correction on Bob's qubit and mix the outcomes by probability.  The
same machinery gives the protocol as a linear map on one-qubit density
matrices, which is what the averaging code uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import NoiseModel
from .qmath import TOL, I2, QState, dagger, kron, ket_to_dm, partial_trace_matrix, pure_fidelity
from .states import BELL_CORRECTIONS, BlochParam, SchmidtParam, bell_state, bloch_ket, bloch_kets, schmidt_state

_PROJECTORS = tuple(kron(ket_to_dm(bell_state(i)), I2) for i in range(4))


@dataclass(frozen=True)
class ProtocolOutcome:
    probabilities: tuple
    output: QState


@dataclass(frozen=True)
class ChainSpec:
    n: int
    alpha: SchmidtParam

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"chain length must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not isinstance(self.alpha, SchmidtParam):
            object.__setattr__(self, "alpha", SchmidtParam(self.alpha))


def _simulate(resource: np.ndarray, rho_in: np.ndarray):
    total = kron(rho_in, resource)
    probs = []
    out = np.zeros((2, 2), dtype=complex)
    for proj, u in zip(_PROJECTORS, BELL_CORRECTIONS):
        branch = partial_trace_matrix(proj @ total @ proj, keep=[2], dims=[2, 2, 2])
        probs.append(np.trace(branch))
        out = out + u @ branch @ dagger(u)
    return probs, out


def _as_resource(resource) -> QState:
    if not isinstance(resource, QState):
        resource = QState(resource)
    if resource.dim != 4:
        raise ValueError(f"resource must be a two-qubit state, got dimension {resource.dim}")
    return resource


def run_protocol(resource: QState, rho_in: QState) -> ProtocolOutcome:
    resource = _as_resource(resource)
    if rho_in.dim != 2:
        raise ValueError("the teleported state must be a single qubit")
    probs, out = _simulate(resource.matrix, rho_in.matrix)
    probs = tuple(min(max(float(np.real(p)), 0.0), 1.0) for p in probs)
    if abs(sum(probs) - 1.0) > TOL.validity:
        raise RuntimeError(f"Bell outcome probabilities sum to {sum(probs)}")
    return ProtocolOutcome(probs, QState(0.5 * (out + dagger(out))))


def teleport_output(resource: QState, inp: BlochParam) -> QState:
    """Bob's corrected, outcome-averaged state for a pure input."""
    return run_protocol(resource, QState.from_ket(bloch_ket(inp))).output


def teleport_fidelity(resource: QState, inp: BlochParam) -> float:
    return pure_fidelity(bloch_ket(inp), teleport_output(resource, inp))


def protocol_superoperator(resource: QState) -> np.ndarray:
    """4x4 matrix S with vec(out) = S @ vec(rho_in), row-major vec.

    Built by running the simulation on the matrix units |i><j|, which is
    valid because the protocol is linear in the input.
    """
    resource = _as_resource(resource)
    s = np.zeros((4, 4), dtype=complex)
    for col in range(4):
        unit = np.zeros((2, 2), dtype=complex)
        unit[col // 2, col % 2] = 1.0
        _, out = _simulate(resource.matrix, unit)
        s[:, col] = out.reshape(-1)
    return s


def fidelities_from_superoperator(s: np.ndarray, theta, phi) -> np.ndarray:
    """Per-input fidelities <eta|Lambda(|eta><eta|)|eta> for arrays of angles."""
    kets = bloch_kets(theta, phi)
    # vec(|eta><eta|) in row-major order is kron(eta, conj(eta))
    vec = (kets[..., :, None] * kets.conj()[..., None, :]).reshape(kets.shape[:-1] + (4,))
    out = vec @ s.T
    return np.real(np.einsum("...i,...i->...", vec.conj(), out))


def resource_fidelity_fn(resource: QState):
    """Vectorized (theta, phi) -> fidelity for a fixed resource, via simulation."""
    s = protocol_superoperator(resource)
    return lambda theta, phi: fidelities_from_superoperator(s, theta, phi)


# -- closed forms ---------------------------------------------------------------


@dataclass(frozen=True)
class FidelityForm:
    """Per-input fidelity of the shape const + s2 * sin^2(theta) + c2 * cos(2 phi) sin^2(theta).

    Every cataloged closed form has this shape, which is what allows exact
    Haar moments.
    """

    const: float
    s2: float = 0.0
    c2: float = 0.0

    def __call__(self, theta, phi=0.0):
        sin2 = np.sin(theta) ** 2
        val = self.const + self.s2 * sin2 + self.c2 * np.cos(2 * phi) * sin2
        return float(val) if np.ndim(val) == 0 else val

    def scaled(self, w: float, shift: float = 0.0) -> "FidelityForm":
        return FidelityForm(w * self.const + shift, w * self.s2, w * self.c2)

    def __add__(self, other: "FidelityForm") -> "FidelityForm":
        return FidelityForm(self.const + other.const, self.s2 + other.s2, self.c2 + other.c2)


class NoClosedFormError(ValueError):
    """Raised when a model has no per-input closed form; simulate instead."""


def _root(alpha: float) -> float:
    return math.sqrt(alpha * (1.0 - alpha))


def _noiseless_form(alpha: float) -> FidelityForm:
    # 1 - (1/2)(1 - 2 sqrt(a(1-a))) sin^2
    return FidelityForm(1.0, -0.5 * (1.0 - 2.0 * _root(alpha)))


def input_fidelity_form(model: NoiseModel, a) -> FidelityForm:
    alpha = a.alpha if isinstance(a, SchmidtParam) else SchmidtParam(a).alpha
    kind = model.kind
    r = _root(alpha)
    base = _noiseless_form(alpha)
    if kind == "noiseless":
        return base
    if kind in ("bit_flip", "bitphase_flip", "phase_flip"):
        p, q = model["p"], model["q"]
        same = p * q + (1 - p) * (1 - q)
        flipped = p + q - 2 * p * q
        if kind == "phase_flip":
            # 1 - (1/2)(1 + 2 sqrt(a(1-a))) sin^2, weight p + q - 2pq
            other = FidelityForm(1.0, -0.5 * (1.0 + 2.0 * r)).scaled(flipped)
        else:
            sign = 1.0 if kind == "bit_flip" else -1.0
            other = FidelityForm(0.0, 0.5 * flipped, sign * flipped * r)
        return base.scaled(same) + other
    if kind == "global_depolarizing":
        p = model["p"]
        return base.scaled(p, (1 - p) / 2)
    raise NoClosedFormError(
        f"no per-input closed form for {kind}; use teleport_fidelity on the simulated resource"
    )


def analytic_input_fidelity(model: NoiseModel, a, inp: BlochParam) -> float:
    return input_fidelity_form(model, a)(inp.theta, inp.phi)


def horodecki_fidelity(f: float) -> float:
    """Optimal average fidelity (2f + 1)/3 from the singlet fraction f."""
    if not (0.25 - TOL.algebra <= f <= 1.0 + TOL.algebra):
        raise ValueError(f"singlet fraction must lie in [1/4, 1], got {f}")
    return (2.0 * f + 1.0) / 3.0


# -- repeater chain -------------------------------------------------------------


def chain_map(resource: QState, n: int, rho_in: QState) -> QState:
    state = rho_in
    for _ in range(n):
        state = run_protocol(resource, state).output
    return state


def chain_output(spec: ChainSpec, inp: BlochParam, resource: QState | None = None) -> QState:
    """Teleport |eta> through n identical links in succession.

    ``resource`` defaults to the noiseless Schmidt state of ``spec.alpha``.
    """
    if resource is None:
        resource = schmidt_state(spec.alpha)
    return chain_map(resource, spec.n, QState.from_ket(bloch_ket(inp)))


def chain_superoperator(spec: ChainSpec, resource: QState | None = None) -> np.ndarray:
    if resource is None:
        resource = schmidt_state(spec.alpha)
    return np.linalg.matrix_power(protocol_superoperator(resource), spec.n)


def chain_form(spec: ChainSpec) -> FidelityForm:
    x = spec.alpha.alpha * (1.0 - spec.alpha.alpha)
    return FidelityForm(1.0, -0.5 + 2.0 ** (spec.n - 1) * x ** (spec.n / 2))


def chain_input_fidelity(spec: ChainSpec, inp: BlochParam) -> float:
    return chain_form(spec)(inp.theta, inp.phi)
