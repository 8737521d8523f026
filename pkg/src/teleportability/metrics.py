"""Haar averages of teleportation fidelity and the derived scores.

Input states are drawn from the uniform measure on the Bloch sphere:
cos(theta) uniform on [-1, 1] and phi uniform on [0, 2 pi).  Averages can be
taken three ways:

* ``closed_form`` -- exact moments of a :class:`FidelityForm`, or the
  published average/deviation formulas for cataloged models;
* ``quadrature`` -- Gauss-Legendre in cos(theta) times an equally spaced
  rule in phi, applied to the simulated protocol;
* ``monte_carlo`` -- seeded sampling of the simulated protocol.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channels import NoiseModel
from .states import SchmidtParam
from .teleport import (
    ChainSpec,
    FidelityForm,
    NoClosedFormError,
    chain_form,
    chain_superoperator,
    fidelities_from_superoperator,
    input_fidelity_form,
    protocol_superoperator,
)

SQRT5 = math.sqrt(5.0)
F_CLASSICAL = 2.0 / 3.0
D_CLASSICAL = 1.0 / (3.0 * SQRT5)

# exact Haar moments
E_SIN2 = 2.0 / 3.0
E_SIN4 = 8.0 / 15.0
E_COS2PHI_SQ = 0.5

MC_CHUNK = 1 << 16


@dataclass(frozen=True)
class AverageMethod:
    kind: str = "closed_form"
    n_theta: int = 64
    n_phi: int = 64
    samples: int = 0
    seed: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.kind not in ("closed_form", "quadrature", "monte_carlo"):
            raise ValueError(f"unknown averaging method {self.kind!r}")
        if self.kind == "quadrature" and min(self.n_theta, self.n_phi) < 8:
            raise ValueError("quadrature needs at least 8 nodes per angle")
        if self.kind == "monte_carlo":
            if self.samples < 1:
                raise ValueError("monte_carlo needs samples >= 1")
            if self.seed is None or self.seed < 0:
                raise ValueError("monte_carlo needs an explicit non-negative seed")

    @classmethod
    def closed_form(cls) -> "AverageMethod":
        return cls("closed_form")

    @classmethod
    def quadrature(cls, n_theta: int = 64, n_phi: int = 64) -> "AverageMethod":
        return cls("quadrature", n_theta=n_theta, n_phi=n_phi)

    @classmethod
    def monte_carlo(cls, samples: int, seed: int, workers: int = 1) -> "AverageMethod":
        return cls("monte_carlo", samples=samples, seed=seed, workers=workers)

    def describe(self) -> str:
        if self.kind == "quadrature":
            return f"quadrature({self.n_theta}x{self.n_phi})"
        if self.kind == "monte_carlo":
            return f"monte_carlo(samples={self.samples},seed={self.seed})"
        return "closed_form"


CLOSED_FORM = AverageMethod.closed_form()
QUADRATURE = AverageMethod.quadrature()

Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


# -- Haar averaging ----------------------------------------------------------------


def quadrature_grid(n_theta: int = 64, n_phi: int = 64):
    """Nodes (theta, phi) and weights summing to one."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    t, p = np.meshgrid(theta, phi, indexing="ij")
    weights = np.outer(w / 2.0, np.full(n_phi, 1.0 / n_phi))
    return t, p, weights


def _form_moments(f: FidelityForm) -> tuple[float, float]:
    a, b, c = f.const, f.s2, f.c2
    mean = a + b * E_SIN2
    second = a * a + 2 * a * b * E_SIN2 + (b * b + c * c * E_COS2PHI_SQ) * E_SIN4
    return mean, second


def _eval(f, theta, phi) -> np.ndarray:
    return np.broadcast_to(np.asarray(f(theta, phi), dtype=float), np.shape(theta))


@dataclass(frozen=True)
class MonteCarloStats:
    mean: float
    second: float
    std: float
    se_mean: float
    se_std: float
    samples: int


def _mc_chunk(f, seed: int, index: int, size: int, shift: float) -> tuple[float, float, float, float]:
    rng = np.random.default_rng([seed, index])
    theta = np.arccos(rng.uniform(-1.0, 1.0, size))
    phi = rng.uniform(0.0, 2.0 * np.pi, size)
    v = _eval(f, theta, phi) - shift
    v2 = v * v
    return (float(v.sum()), float(v2.sum()), float((v2 * v).sum()), float((v2 * v2).sum()))


def monte_carlo_stats(f: Integrand, samples: int, seed: int, workers: int = 1) -> MonteCarloStats:
    """Seeded Monte Carlo moments of ``f`` over the Bloch sphere.

    Sample ``i`` always comes from chunk ``i // MC_CHUNK`` whose generator
    is keyed by ``(seed, chunk)``, so results do not depend on ``workers``.
    Moments are accumulated about the first sample value to keep the
    variance accurate when the fidelity barely fluctuates.
    """
    n_chunks = -(-samples // MC_CHUNK)
    sizes = [min(MC_CHUNK, samples - j * MC_CHUNK) for j in range(n_chunks)]
    rng0 = np.random.default_rng([seed, 0])
    shift = float(_eval(f, np.arccos(rng0.uniform(-1.0, 1.0, 1)), rng0.uniform(0.0, 2.0 * np.pi, 1))[0])
    job = lambda j: _mc_chunk(f, seed, j, sizes[j], shift)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(n_chunks)))
    else:
        parts = [job(j) for j in range(n_chunks)]
    s1, s2, s3, s4 = (math.fsum(p[i] for p in parts) / samples for i in range(4))
    var = max(s2 - s1 * s1, 0.0)
    std = math.sqrt(var)
    mean = shift + s1
    mu4 = s4 - 4 * s1 * s3 + 6 * s1 * s1 * s2 - 3 * s1**4
    var_of_var = max(mu4 - var * var, 0.0) / samples
    se_std = math.sqrt(var_of_var) / (2 * std) if std > 0 else 0.0
    return MonteCarloStats(mean, var + mean * mean, std, std / math.sqrt(samples), se_std, samples)


def haar_mean_variance(f, m: AverageMethod = CLOSED_FORM) -> tuple[float, float]:
    """(E[f], Var[f]) with the variance accumulated about the mean."""
    if m.kind == "closed_form":
        if not isinstance(f, FidelityForm):
            raise ValueError(
                "closed_form averaging only handles integrands affine in sin^2(theta) and cos(2phi) sin^2(theta)"
            )
        mean, _ = _form_moments(f)
        var = f.s2**2 * (E_SIN4 - E_SIN2**2) + f.c2**2 * E_COS2PHI_SQ * E_SIN4
        return mean, var
    if m.kind == "quadrature":
        t, p, w = quadrature_grid(m.n_theta, m.n_phi)
        v = _eval(f, t, p)
        mean = float(np.sum(w * v))
        return mean, float(np.sum(w * (v - mean) ** 2))
    stats = monte_carlo_stats(f, m.samples, m.seed, m.workers)
    return stats.mean, stats.std**2


def haar_mean(f, m: AverageMethod = CLOSED_FORM) -> float:
    return haar_mean_variance(f, m)[0]


def haar_second_moment(f, m: AverageMethod = CLOSED_FORM) -> float:
    """E[f^2] under the uniform Bloch-sphere measure."""
    mean, var = haar_mean_variance(f, m)
    return var + mean * mean


# -- published closed forms ----------------------------------------------------


def _alpha(a) -> float:
    return a.alpha if isinstance(a, SchmidtParam) else SchmidtParam(a).alpha


def noiseless_fidelity(alpha: float) -> float:
    return 2.0 / 3.0 + (2.0 / 3.0) * math.sqrt(alpha * (1 - alpha))


def noiseless_deviation(alpha: float) -> float:
    # the radicand 1 + 4x - 4 sqrt(x) is (1 - 2 sqrt(x))^2; the factored form
    # avoids losing digits to the square root near alpha = 1/2
    return abs(1 - 2 * math.sqrt(alpha * (1 - alpha))) / (3 * SQRT5)


def chain_fidelity(n: int, alpha: float) -> float:
    return 2.0 / 3.0 + (2.0**n / 3.0) * (alpha * (1 - alpha)) ** (n / 2)


def chain_deviation(n: int, alpha: float) -> float:
    # radicand 1 + 4^n x^n - 2^(n+1) x^(n/2) = (1 - 2^n x^(n/2))^2, i.e. (1 - F_n)/sqrt(5)
    x = alpha * (1 - alpha)
    return abs(1 - 2**n * x ** (n / 2)) / (3 * SQRT5)


def bit_flip_fidelity(alpha: float, p: float) -> float:
    """Average fidelity under bit-flip noise with q = 1."""
    return (1 - p + 2 * p * (1 + math.sqrt((1 - alpha) * alpha))) / 3


def bit_flip_deviation(alpha: float, p: float) -> float:
    x = (1 - alpha) * alpha
    r = math.sqrt(x)
    rad = (
        1
        + 4 * x
        - 4 * r
        + 4 * (1 - p) ** 2 * (1 + 4 * x - 2 * r)
        - 4 * (1 - p) * (1 + 2 * x - 3 * r)
    )
    return math.sqrt(max(rad, 0.0)) / (3 * SQRT5)


def phase_flip_fidelity(alpha: float, p: float) -> float:
    return (2.0 / 3.0) * (1 + (2 * p - 1) * math.sqrt((1 - alpha) * alpha))


def phase_flip_deviation(alpha: float, p: float) -> float:
    r = math.sqrt((1 - alpha) * alpha)
    return abs(1 - 2 * (2 * p - 1) * r) / (3 * SQRT5)


def global_dep_fidelity(alpha: float, p: float) -> float:
    return p * noiseless_fidelity(alpha) + (1 - p) / 2


def global_dep_deviation(alpha: float, p: float) -> float:
    return p * (1 - noiseless_fidelity(alpha)) / SQRT5


def combined_fidelity(alpha: float, p: float, p1: float, p2: float) -> float:
    """Average fidelity of the combined local+global depolarized resource.

    Each white-noise and locally depolarized term teleports with fidelity
    exactly 1/2, so only the surviving Schmidt weight carries correlations.
    """
    w = 1 - p - p1 - p2
    return w * noiseless_fidelity(alpha) + (1 - w) / 2


def combined_deviation(alpha: float, p: float, p1: float, p2: float) -> float:
    return (1 - p - p1 - p2) * noiseless_deviation(alpha)


def combined_fidelity_published(alpha: float, p: float, p1: float, p2: float) -> float:
    r = math.sqrt(alpha * (1 - alpha))
    return (2.0 / 3.0) * (1 + (1 - p) * r) - (p1 + p2) * (1 + 4 * r) / 8 - p / 6


def combined_deviation_published(alpha: float, p: float, p1: float, p2: float) -> float:
    """Deviation exactly as printed; NaN when its radicand is negative."""
    x = alpha * (1 - alpha)
    r = math.sqrt(x)
    sa, sb = math.sqrt(alpha), math.sqrt(1 - alpha)
    inner = -7 * sa + 7 * alpha + 12 * sb
    rad = (
        (64 - 96 * p2 + 51 * p2**2)
        + 4 * (64 + 3 * p2 * (7 * p2 - 32)) * x
        - (256 - 384 * p2 + 144 * p2**2) * r
        + (64 * p**2 + 32 * p * (3 * p1 + 3 * p2 - 4) - 96 * p1) * (1 - 4 * r + 4 * x)
        + p1**2 * (51 - 12 * sa * inner)
        + p2 * (-17 + 4 * sa * inner)
    )
    if rad < 0:
        return float("nan")
    return math.sqrt(rad) / (24 * SQRT5)


def _published(model: NoiseModel, alpha: float) -> tuple[float, float] | None:
    kind, ps = model.kind, model.params
    if kind == "noiseless":
        return noiseless_fidelity(alpha), noiseless_deviation(alpha)
    if kind in ("bit_flip", "bitphase_flip", "phase_flip"):
        # closed forms exist for one-sided noise; p and q play symmetric roles
        if ps["q"] == 1.0 or ps["p"] == 1.0:
            p = ps["p"] if ps["q"] == 1.0 else ps["q"]
            if kind == "phase_flip":
                return phase_flip_fidelity(alpha, p), phase_flip_deviation(alpha, p)
            return bit_flip_fidelity(alpha, p), bit_flip_deviation(alpha, p)
        return None
    if kind == "global_depolarizing":
        return global_dep_fidelity(alpha, ps["p"]), global_dep_deviation(alpha, ps["p"])
    if kind == "combined_depolarizing":
        args = (alpha, ps["p"], ps["p1"], ps["p2"])
        return combined_fidelity(*args), combined_deviation(*args)
    return None


# -- model-level averages --------------------------------------------------------


@dataclass(frozen=True)
class Moments:
    F: float
    D: float
    route: str


def _target(target) -> tuple[float, int]:
    if isinstance(target, ChainSpec):
        return target.alpha.alpha, target.n
    return _alpha(target), 1


def simulated_integrand(model: NoiseModel, target) -> Integrand:
    """(theta, phi) -> fidelity from the simulated protocol (or chain)."""
    alpha, n = _target(target)
    resource = model.resource(alpha)
    if n == 1:
        s = protocol_superoperator(resource)
    else:
        s = chain_superoperator(ChainSpec(n, SchmidtParam(alpha)), resource)
    return lambda theta, phi: fidelities_from_superoperator(s, theta, phi)


def formula_integrand(model: NoiseModel, target) -> FidelityForm:
    """Per-input closed form, raising NoClosedFormError when none exists."""
    alpha, n = _target(target)
    if n > 1:
        if model.kind != "noiseless":
            raise NoClosedFormError("chain closed forms exist only for noiseless links")
        return chain_form(ChainSpec(n, SchmidtParam(alpha)))
    return input_fidelity_form(model, alpha)


def moments(model: NoiseModel, target, method: AverageMethod = CLOSED_FORM) -> Moments:
    """Average fidelity and deviation for a model and a resource (alpha or chain).

    With ``closed_form`` the published catalog is used where it exists; for
    two-sided flip noise the per-input formula is integrated by quadrature,
    and models without any closed form are integrated from the simulation.
    The other methods always integrate the simulated protocol.
    """
    alpha, n = _target(target)
    if method.kind == "closed_form":
        if n > 1 and model.kind == "noiseless":
            return Moments(chain_fidelity(n, alpha), chain_deviation(n, alpha), "closed_form")
        if n == 1:
            pub = _published(model, alpha)
            if pub is not None:
                return Moments(pub[0], pub[1], "closed_form")
        try:
            f = formula_integrand(model, target)
            route = "formula_quadrature"
        except NoClosedFormError:
            f = simulated_integrand(model, target)
            route = "simulation_quadrature"
        mean, var = haar_mean_variance(f, QUADRATURE)
        return Moments(mean, math.sqrt(var), route)
    mean, var = haar_mean_variance(simulated_integrand(model, target), method)
    return Moments(mean, math.sqrt(var), f"simulation_{method.kind}")


def avg_fidelity(model: NoiseModel, target, method: AverageMethod = CLOSED_FORM) -> float:
    return moments(model, target, method).F


def fidelity_deviation(model: NoiseModel, target, method: AverageMethod = CLOSED_FORM) -> float:
    return moments(model, target, method).D


# -- scores --------------------------------------------------------------------


def _check_k(k: float) -> float:
    k = float(k)
    if not k >= 0:
        raise ValueError(f"sensitivity k must be non-negative, got {k}")
    return k


def tele_score(F: float, D: float, k: float) -> float:
    return F - _check_k(k) * D


def classical_score(k: float) -> float:
    return (2.0 - _check_k(k) / SQRT5) / 3.0


def is_quantum_useful(F: float, D: float, k: float) -> bool:
    return F > F_CLASSICAL and tele_score(F, D, k) > classical_score(k)


@dataclass(frozen=True)
class ScoreRecord:
    F: float
    D: float
    k: float
    tau: float
    tau_classical: float
    quantum_useful: bool

    @classmethod
    def from_moments(cls, F: float, D: float, k: float) -> "ScoreRecord":
        return cls(F, D, k, tele_score(F, D, k), classical_score(k), is_quantum_useful(F, D, k))


def score(model: NoiseModel, target, k: float, method: AverageMethod = CLOSED_FORM) -> ScoreRecord:
    mo = moments(model, target, method)
    return ScoreRecord.from_moments(mo.F, mo.D, k)


# -- sensitivity cutoff ----------------------------------------------------------


class UnboundedSensitivityError(ArithmeticError):
    """F/D has no finite minimum because D vanishes on the whole range."""


@dataclass(frozen=True)
class KStar:
    k_star: float
    alpha: float


def _golden_min(fn, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200):
    inv_phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    return (c, fc) if fc <= fd else (d, fd)


def k_star(
    model: NoiseModel,
    alpha_range: tuple[float, float] = (0.0, 0.5),
    n_grid: int = 2001,
    method: AverageMethod = CLOSED_FORM,
) -> KStar:
    """Minimum of F/D over ``alpha_range``, skipping points with D < 1e-12."""
    lo, hi = float(alpha_range[0]), float(alpha_range[1])
    if not (0.0 <= lo <= hi <= 0.5):
        raise ValueError(f"alpha range must be a sub-interval of [0, 1/2], got [{lo}, {hi}]")
    n_grid = max(int(n_grid), 1000)

    def ratio(a: float) -> float:
        mo = moments(model, a, method)
        return mo.F / mo.D if mo.D >= 1e-12 else math.inf

    grid = np.linspace(lo, hi, n_grid)
    vals = np.array([ratio(a) for a in grid])
    if not np.isfinite(vals).any():
        raise UnboundedSensitivityError(f"D vanishes on [{lo}, {hi}] for {model}; k* is unbounded")
    i = int(np.argmin(vals))
    best_a, best_v = float(grid[i]), float(vals[i])
    left, right = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, n_grid - 1)])
    if right > left:
        a, v = _golden_min(ratio, left, right)
        if v < best_v:
            best_a, best_v = a, v
    return KStar(best_v, best_a)
