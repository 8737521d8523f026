"""Noise acting on the shared two-qubit resource.

Local noise is represented by Kraus lists over both qubits; global
depolarizing noise and its combination with local depolarizing noise are
direct affine maps on the density matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .qmath import I2, SX, SY, SZ, QState, apply_kraus, completeness_deviation, kron, partial_trace
from .states import schmidt_state


@dataclass(frozen=True)
class KrausChannel:
    """Completeness-checked list of Kraus operators acting on ``dim``."""

    operators: tuple
    dim: int = field(init=False)

    def __post_init__(self):
        ops = []
        for k in self.operators:
            a = np.array(k, dtype=complex)
            a.setflags(write=False)
            ops.append(a)
        if not ops:
            raise ValueError("a Kraus channel needs at least one operator")
        d = ops[0].shape[0]
        if any(k.shape != (d, d) for k in ops):
            raise ValueError("Kraus operators must all be square with the same dimension")
        object.__setattr__(self, "operators", tuple(ops))
        object.__setattr__(self, "dim", d)

    def __call__(self, s: QState) -> QState:
        return apply_kraus(s, self)


def check_completeness(ch: KrausChannel) -> float:
    """Max-norm deviation of sum_i K_i^dagger K_i from the identity."""
    return completeness_deviation(ch.operators)


def _prob(name: str, x: float) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {x}")
    return x


def _pauli_pair(pauli: np.ndarray, p: float, q: float) -> KrausChannel:
    # p: no-flip probability on qubit 1, q: no-flip probability on qubit 2
    p, q = _prob("p", p), _prob("q", q)
    return KrausChannel(
        (
            math.sqrt(p * q) * kron(I2, I2),
            math.sqrt(p * (1 - q)) * kron(I2, pauli),
            math.sqrt((1 - p) * q) * kron(pauli, I2),
            math.sqrt((1 - p) * (1 - q)) * kron(pauli, pauli),
        )
    )


def bit_flip_pair(p: float, q: float) -> KrausChannel:
    return _pauli_pair(SX, p, q)


def phase_flip_pair(p: float, q: float) -> KrausChannel:
    return _pauli_pair(SZ, p, q)


def bitphase_flip_pair(p: float, q: float) -> KrausChannel:
    return _pauli_pair(SY, p, q)


def _local_pair(single1, single2) -> KrausChannel:
    return KrausChannel(tuple(kron(a, b) for a in single1 for b in single2))


def _amp_damp_single(g: float):
    return (
        np.array([[1, 0], [0, math.sqrt(1 - g)]], dtype=complex),
        np.array([[0, math.sqrt(g)], [0, 0]], dtype=complex),
    )


def _phase_damp_single(lam: float):
    return (
        np.array([[1, 0], [0, math.sqrt(1 - lam)]], dtype=complex),
        np.array([[0, 0], [0, math.sqrt(lam)]], dtype=complex),
    )


def amplitude_damping_local(g1: float, g2: float) -> KrausChannel:
    """Independent amplitude damping with rates g1 (qubit 1) and g2 (qubit 2)."""
    g1, g2 = _prob("g1", g1), _prob("g2", g2)
    return _local_pair(_amp_damp_single(g1), _amp_damp_single(g2))


def phase_damping_local(l1: float, l2: float) -> KrausChannel:
    l1, l2 = _prob("l1", l1), _prob("l2", l2)
    return _local_pair(_phase_damp_single(l1), _phase_damp_single(l2))


def global_depolarizing(s: QState, p: float) -> QState:
    """p * rho + (1 - p) * I/4; p is the weight kept on the input state."""
    p = _prob("p", p)
    if s.dim != 4:
        raise ValueError("global depolarizing acts on two-qubit states")
    return QState(p * s.matrix + (1 - p) * np.eye(4) / 4)


def combined_depolarizing(a, p: float, p1: float, p2: float) -> QState:
    """Schmidt resource under global weight p plus local depolarizing weights p1, p2.

    The state is p I/4 + (p1/2) I (x) rho_2 + (p2/2) rho_1 (x) I
    + (1 - p - p1 - p2) rho, where rho_j are the one-qubit marginals.
    """
    p, p1, p2 = float(p), float(p1), float(p2)
    if min(p, p1, p2) < 0 or p + p1 + p2 > 1 + 1e-15:
        raise ValueError(f"need p, p1, p2 >= 0 and p + p1 + p2 <= 1, got {p}, {p1}, {p2}")
    rho = schmidt_state(a)
    rho_2 = partial_trace(rho, keep=[1], dims=[2, 2]).matrix
    rho_1 = partial_trace(rho, keep=[0], dims=[2, 2]).matrix
    m = (
        p * np.eye(4) / 4
        + (p1 / 2) * kron(I2, rho_2)
        + (p2 / 2) * kron(rho_1, I2)
        + (1 - p1 - p2 - p) * rho.matrix
    )
    return QState(m)


# -- noise model descriptions -------------------------------------------------

KINDS = (
    "noiseless",
    "bit_flip",
    "phase_flip",
    "bitphase_flip",
    "amplitude_damping",
    "phase_damping",
    "global_depolarizing",
    "combined_depolarizing",
)

ALIASES = {
    "amp_damp": "amplitude_damping",
    "phase_damp": "phase_damping",
    "global_dep": "global_depolarizing",
    "combined_dep": "combined_depolarizing",
}

# accepted keys and their defaults
PARAMS: dict[str, dict[str, float]] = {
    "noiseless": {},
    "bit_flip": {"p": 1.0, "q": 1.0},
    "phase_flip": {"p": 1.0, "q": 1.0},
    "bitphase_flip": {"p": 1.0, "q": 1.0},
    "amplitude_damping": {"g1": 0.0, "g2": 0.0},
    "phase_damping": {"l1": 0.0, "l2": 0.0},
    "global_depolarizing": {"p": 1.0},
    "combined_depolarizing": {"p": 0.0, "p1": 0.0, "p2": 0.0},
}

_FLIP_CHANNELS = {
    "bit_flip": bit_flip_pair,
    "phase_flip": phase_flip_pair,
    "bitphase_flip": bitphase_flip_pair,
}

_SHORT = {v: k for k, v in ALIASES.items()}


class ModelSpecError(ValueError):
    """Malformed or out-of-range noise model description."""


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "noiseless"
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        kind = ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ModelSpecError(f"unknown noise kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        allowed = PARAMS[kind]
        given = dict(self.params)
        for key in given:
            if key not in allowed:
                raise ModelSpecError(f"unknown parameter {key!r} for {kind}; allowed: {', '.join(allowed) or 'none'}")
        full = {k: float(given.get(k, v)) for k, v in allowed.items()}
        for key, val in full.items():
            if math.isnan(val):
                raise ModelSpecError(f"parameter {key} is NaN")
            if kind == "combined_depolarizing":
                if val < 0:
                    raise ModelSpecError(f"{key} must be >= 0, got {val}")
            elif not (0.0 <= val <= 1.0):
                raise ModelSpecError(f"{key} must lie in [0, 1], got {val}")
        if kind == "combined_depolarizing" and sum(full.values()) > 1 + 1e-15:
            raise ModelSpecError("combined depolarizing needs p + p1 + p2 <= 1")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", full)

    def __getitem__(self, key: str) -> float:
        return self.params[key]

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items()))))

    def channel(self) -> KrausChannel | None:
        """Kraus form for the local models, None for the affine ones."""
        k, ps = self.kind, self.params
        if k == "noiseless":
            return KrausChannel((np.eye(4),))
        if k in _FLIP_CHANNELS:
            return _FLIP_CHANNELS[k](ps["p"], ps["q"])
        if k == "amplitude_damping":
            return amplitude_damping_local(ps["g1"], ps["g2"])
        if k == "phase_damping":
            return phase_damping_local(ps["l1"], ps["l2"])
        return None

    def resource(self, a) -> QState:
        """The noisy two-qubit resource built from the Schmidt state."""
        if self.kind == "global_depolarizing":
            return global_depolarizing(schmidt_state(a), self.params["p"])
        if self.kind == "combined_depolarizing":
            ps = self.params
            return combined_depolarizing(a, ps["p"], ps["p1"], ps["p2"])
        return apply_kraus(schmidt_state(a), self.channel())

    def params_text(self) -> str:
        return ",".join(f"{k}={v!r}" for k, v in self.params.items())

    def to_text(self) -> str:
        text = self.params_text()
        return f"{self.kind}:{text}" if text else self.kind

    def __str__(self):
        return self.to_text()

    @classmethod
    def parse(cls, text: str) -> "NoiseModel":
        """Parse ``kind[:key=value[,key=value...]]``."""
        text = text.strip()
        if not text:
            raise ModelSpecError("empty model spec")
        kind, _, rest = text.partition(":")
        params: dict[str, float] = {}
        if rest.strip():
            for item in rest.split(","):
                key, eq, val = item.partition("=")
                key = key.strip()
                if not eq or not key:
                    raise ModelSpecError(f"malformed parameter {item!r}; expected key=value")
                if key in params:
                    raise ModelSpecError(f"parameter {key!r} given twice")
                try:
                    params[key] = float(val)
                except ValueError:
                    raise ModelSpecError(f"parameter {key!r} has non-numeric value {val!r}") from None
        return cls(kind.strip(), params)
