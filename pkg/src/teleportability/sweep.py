"""Scans over the Schmidt weight, threshold searches and tabular export."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .channels import NoiseModel
from .metrics import (
    CLOSED_FORM,
    F_CLASSICAL,
    SQRT5,
    AverageMethod,
    classical_score,
    global_dep_deviation,
    global_dep_fidelity,
    moments,
    noiseless_deviation,
    noiseless_fidelity,
    tele_score,
)

NOISELESS = NoiseModel("noiseless")
BISECTION_ITERS = 60

# published alpha_n^k values at p = 0.7, used only for discrepancy flags
TABLE1_PUBLISHED = {2.1: 0.013, 2.5: 0.022, 3.5: 0.033, 4.0: 0.056}
TABLE1_ALPHA_CL = 0.012
TABLE1_TOL = 1e-3


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    model: NoiseModel
    k: float
    F: float
    D: float
    tau: float
    tau_noiseless: float
    tau_classical: float
    nonclassical: bool
    beats_noiseless: bool

    def as_record(self) -> dict:
        return {
            "alpha": self.alpha,
            "kind": self.model.kind,
            "params": self.model.params_text(),
            "k": self.k,
            "F": self.F,
            "D": self.D,
            "tau": self.tau,
            "tau_noiseless": self.tau_noiseless,
            "tau_classical": self.tau_classical,
            "nonclassical": self.nonclassical,
            "beats_noiseless": self.beats_noiseless,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SweepRow":
        text = rec["kind"] + (":" + rec["params"] if rec["params"] else "")
        return cls(
            alpha=float(rec["alpha"]),
            model=NoiseModel.parse(text),
            k=float(rec["k"]),
            F=float(rec["F"]),
            D=float(rec["D"]),
            tau=float(rec["tau"]),
            tau_noiseless=float(rec["tau_noiseless"]),
            tau_classical=float(rec["tau_classical"]),
            nonclassical=_as_bool(rec["nonclassical"]),
            beats_noiseless=_as_bool(rec["beats_noiseless"]),
        )


SWEEP_COLUMNS = (
    "alpha",
    "kind",
    "params",
    "k",
    "F",
    "D",
    "tau",
    "tau_noiseless",
    "tau_classical",
    "nonclassical",
    "beats_noiseless",
)


def _as_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    if str(v).lower() in ("true", "1"):
        return True
    if str(v).lower() in ("false", "0"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def alpha_grid(lo: float, hi: float, n: int) -> list[float]:
    if n < 1:
        raise ValueError("grid needs at least one point")
    if n == 1:
        return [float(lo)]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n - 1)] + [float(hi)]


def sweep_alpha(
    model: NoiseModel,
    ks: Sequence[float],
    grid: Sequence[float],
    method: AverageMethod = CLOSED_FORM,
) -> list[SweepRow]:
    """One row per (alpha, k), alpha-major, in grid order."""
    grid = [float(a) for a in grid]
    if not grid:
        raise ValueError("alpha grid is empty")
    if any(a < 0 or a > 0.5 for a in grid):
        raise ValueError("alpha grid must lie within [0, 1/2]")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("alpha grid must be sorted")
    rows = []
    for a in grid:
        mo = moments(model, a, method)
        F0, D0 = noiseless_fidelity(a), noiseless_deviation(a)
        for k in ks:
            tau = tele_score(mo.F, mo.D, k)
            tau0 = tele_score(F0, D0, k)
            rows.append(
                SweepRow(
                    alpha=a,
                    model=model,
                    k=float(k),
                    F=mo.F,
                    D=mo.D,
                    tau=tau,
                    tau_noiseless=tau0,
                    tau_classical=classical_score(k),
                    nonclassical=mo.F > F_CLASSICAL,
                    beats_noiseless=tau > tau0,
                )
            )
    return rows


# -- root finding ------------------------------------------------------------------


@dataclass(frozen=True)
class Bisection:
    root: float
    residual: float
    iterations: int


def bisect(fn: Callable[[float], float], lo: float, hi: float, iters: int = BISECTION_ITERS) -> Bisection:
    """Plain bisection; ``fn(lo)`` and ``fn(hi)`` must differ in sign."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return Bisection(lo, 0.0, 0)
    if fhi == 0:
        return Bisection(hi, 0.0, 0)
    if (flo > 0) == (fhi > 0):
        raise ValueError("bisection bracket has no sign change")
    it = 0
    for it in range(1, iters + 1):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0:
            lo = hi = mid
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    return Bisection(root, abs(fn(root)), it)


@dataclass(frozen=True)
class Threshold:
    """Where F crosses the classical value 2/3 on [0, 1/2].

    ``status`` is ``"root"``, ``"at_boundary"`` (F(0) = 2/3 exactly),
    ``"always_classical"`` or ``"always_nonclassical"``.
    """

    alpha: float | None
    status: str


def find_alpha_cl(model: NoiseModel, method: AverageMethod = CLOSED_FORM) -> Threshold:
    g = lambda a: moments(model, a, method).F - F_CLASSICAL  # noqa: E731
    g0, g1 = g(0.0), g(0.5)
    if abs(g0) <= 1e-14 and g1 > 0:
        return Threshold(0.0, "at_boundary")
    if g0 > 0:
        return Threshold(None, "always_nonclassical")
    if g1 <= 0:
        return Threshold(None, "always_classical")
    return Threshold(bisect(g, 0.0, 0.5).root, "root")


def nonclassical_range(model: NoiseModel, method: AverageMethod = CLOSED_FORM) -> tuple[float, float]:
    th = find_alpha_cl(model, method)
    if th.status == "always_classical":
        raise ValueError(f"{model} never exceeds the classical fidelity on [0, 1/2]")
    return (th.alpha or 0.0, 0.5)


def alpha_from_noiseless_fidelity(F: float) -> float:
    """Invert F = 2/3 + (2/3) sqrt(a(1 - a)) on [0, 1/2]."""
    r = 1.5 * F - 1.0
    if not (-1e-15 <= r <= 0.5 + 1e-15):
        raise ValueError(f"fidelity {F} is outside the noiseless range [2/3, 1]")
    r = min(max(r, 0.0), 0.5)
    return 0.5 * (1.0 - math.sqrt(max(1.0 - 4.0 * r * r, 0.0)))


def crossover_fidelity(k: float) -> float:
    """Noiseless F at which global depolarizing and noiseless scores tie; independent of p."""
    x = k / SQRT5
    return (0.5 + x) / (1.0 + x)


@dataclass(frozen=True)
class CrossoverResult:
    """Upper end alpha_n^k of the range where the depolarized resource scores higher.

    ``alpha_nk`` is None when the crossover lies at or below ``alpha_cl``.
    """

    k: float
    alpha_cl: float
    alpha_nk: float | None
    method: str
    crossover: float | None = None
    residual: float = 0.0


def _global_score_gap(p: float, k: float) -> Callable[[float], float]:
    def gap(a: float) -> float:
        noisy = tele_score(global_dep_fidelity(a, p), global_dep_deviation(a, p), k)
        clean = tele_score(noiseless_fidelity(a), noiseless_deviation(a), k)
        return noisy - clean

    return gap


def find_alpha_nk(p: float, k: float, method: str = "closed_form") -> CrossoverResult:
    """Crossover alpha between global-depolarized and noiseless scores.

    ``closed_form`` inverts the p-independent crossover fidelity; ``bisection``
    searches the score difference directly.
    """
    if not 0 <= p < 1:
        raise ValueError(f"need 0 <= p < 1 for a noisy resource, got {p}")
    if k < 0:
        raise ValueError(f"sensitivity k must be non-negative, got {k}")
    model = NoiseModel("global_depolarizing", {"p": p})
    th = find_alpha_cl(model)
    alpha_cl = th.alpha if th.alpha is not None else 0.0
    if method == "closed_form":
        f_cross = crossover_fidelity(k)
        if f_cross <= F_CLASSICAL:
            cross, residual = 0.0, 0.0
        elif f_cross >= 1.0:
            cross, residual = 0.5, 0.0
        else:
            cross = alpha_from_noiseless_fidelity(f_cross)
            residual = abs(_global_score_gap(p, k)(cross))
    elif method == "bisection":
        gap = _global_score_gap(p, k)
        g0, g1 = gap(0.0), gap(0.5)
        if g0 <= 0:
            cross, residual = 0.0, abs(g0)
        elif g1 > 0:
            cross, residual = 0.5, 0.0
        else:
            b = bisect(gap, 0.0, 0.5)
            cross, residual = b.root, b.residual
    else:
        raise ValueError(f"unknown crossover method {method!r}")
    alpha_nk = cross if cross > alpha_cl else None
    return CrossoverResult(k, alpha_cl, alpha_nk, method, cross, residual)


@dataclass(frozen=True)
class Table1Row:
    k: float
    alpha_cl: float
    closed_form: CrossoverResult
    bisection: CrossoverResult
    agreement: float
    published: float | None
    matches_published: bool | None

    @property
    def alpha_nk(self) -> float | None:
        return self.closed_form.alpha_nk

    def as_record(self) -> dict:
        return {
            "k": self.k,
            "alpha_cl": self.alpha_cl,
            "alpha_nk_closed_form": self.closed_form.alpha_nk,
            "alpha_nk_bisection": self.bisection.alpha_nk,
            "crossover": self.closed_form.crossover,
            "agreement": self.agreement,
            "published": self.published,
            "matches_published": self.matches_published,
        }


TABLE1_COLUMNS = (
    "k",
    "alpha_cl",
    "alpha_nk_closed_form",
    "alpha_nk_bisection",
    "crossover",
    "agreement",
    "published",
    "matches_published",
)


def reproduce_table1(p: float = 0.7, ks: Iterable[float] = (2.1, 2.5, 3.5, 4.0)) -> list[Table1Row]:
    rows = []
    for k in ks:
        k = float(k)
        cf = find_alpha_nk(p, k, "closed_form")
        bi = find_alpha_nk(p, k, "bisection")
        published = TABLE1_PUBLISHED.get(k) if math.isclose(p, 0.7) else None
        if published is None:
            match = None
        else:
            match = cf.alpha_nk is not None and abs(cf.alpha_nk - published) <= TABLE1_TOL
        rows.append(
            Table1Row(
                k=k,
                alpha_cl=cf.alpha_cl,
                closed_form=cf,
                bisection=bi,
                agreement=abs(cf.crossover - bi.crossover),
                published=published,
                matches_published=match,
            )
        )
    return rows


# -- export ----------------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _records(rows) -> tuple[list[dict], Sequence[str]]:
    rows = list(rows)
    if rows and isinstance(rows[0], Table1Row):
        return [r.as_record() for r in rows], TABLE1_COLUMNS
    if rows and isinstance(rows[0], dict):
        return rows, tuple(rows[0].keys())
    return [r.as_record() for r in rows], SWEEP_COLUMNS


def to_csv(rows, columns: Sequence[str] | None = None) -> str:
    recs, cols = _records(rows)
    cols = columns or cols
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in recs:
        w.writerow([_cell(r[c]) for c in cols])
    return buf.getvalue()


def to_json(rows) -> str:
    recs, _ = _records(rows)
    # repr-precision floats round-trip exactly
    return json.dumps(recs, indent=2, ensure_ascii=False) + "\n"


def read_csv(text: str) -> list[SweepRow]:
    return [SweepRow.from_record(r) for r in csv.DictReader(io.StringIO(text))]


def read_json(text: str) -> list[SweepRow]:
    return [SweepRow.from_record(r) for r in json.loads(text)]


def export(rows, fmt: str, destination) -> None:
    """Write rows as csv or json to a path or a text stream."""
    if fmt == "csv":
        text = to_csv(rows)
    elif fmt == "json":
        text = to_json(rows)
    else:
        raise ValueError(f"unsupported export format {fmt!r}")
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {fmt} output to {path}: {exc.strerror or exc}") from exc
