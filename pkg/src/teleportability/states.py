"""Resource, input and Bell states used by the teleportation protocol."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qmath import I2, SX, SZ, QState


@dataclass(frozen=True)
class SchmidtParam:
    """Weight alpha of sqrt(alpha)|00> + sqrt(1-alpha)|11>."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 <= a <= 1.0) or math.isnan(a):
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        object.__setattr__(self, "alpha", a)


@dataclass(frozen=True)
class BlochParam:
    """Polar angle theta in [0, pi] and azimuth phi in [0, 2 pi)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        t, p = float(self.theta), float(self.phi)
        if not (0.0 <= t <= math.pi):
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not (0.0 <= p < 2.0 * math.pi):
            raise ValueError(f"phi must lie in [0, 2pi), got {self.phi}")
        object.__setattr__(self, "theta", t)
        object.__setattr__(self, "phi", p)


def _alpha(a) -> float:
    return a.alpha if isinstance(a, SchmidtParam) else SchmidtParam(a).alpha


def schmidt_ket(a) -> np.ndarray:
    alpha = _alpha(a)
    ket = np.zeros(4, dtype=complex)
    ket[0] = math.sqrt(alpha)
    ket[3] = math.sqrt(1.0 - alpha)
    return ket


def schmidt_state(a) -> QState:
    """Density matrix of the Schmidt-form resource; accepts a float or SchmidtParam."""
    return QState.from_ket(schmidt_ket(a))


def bloch_ket(b: BlochParam) -> np.ndarray:
    return np.array(
        [math.cos(b.theta / 2), np.exp(1j * b.phi) * math.sin(b.theta / 2)],
        dtype=complex,
    )


def bloch_kets(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Vectorized kets, shape (..., 2), for arrays of angles (no range checks)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(theta / 2) + 0j, np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)


BELL_NAMES = ("Phi+", "Psi+", "Phi-", "Psi-")

_BELL = np.array(
    [
        [1, 0, 0, 1],
        [0, 1, 1, 0],
        [1, 0, 0, -1],
        [0, 1, -1, 0],
    ],
    dtype=complex,
) / math.sqrt(2)

# Bob's correction for each Bell outcome, in BELL_NAMES order.
BELL_CORRECTIONS = (I2, SX, SZ, SZ @ SX)


def bell_state(index: int) -> np.ndarray:
    if index not in (0, 1, 2, 3):
        raise ValueError(f"Bell index must be 0..3, got {index}")
    return _BELL[index].copy()


def singlet_fraction_schmidt(a) -> float:
    alpha = _alpha(a)
    return 0.5 + math.sqrt(alpha * (1.0 - alpha))


def concurrence_schmidt(a) -> float:
    alpha = _alpha(a)
    return 2.0 * math.sqrt(alpha * (1.0 - alpha))
