"""Command-line interface: ``teleportability <command> [options]``.

Data goes to stdout (or ``--output``), logs to stderr.  Exit status is 0 on
success, 1 on numerical failure and 2 on bad arguments.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .channels import ModelSpecError, NoiseModel
from .metrics import (
    CLOSED_FORM,
    QUADRATURE,
    AverageMethod,
    ScoreRecord,
    combined_deviation_published,
    combined_fidelity_published,
    k_star,
    moments,
    monte_carlo_stats,
    simulated_integrand,
)
from .states import SchmidtParam
from .sweep import alpha_grid, export, nonclassical_range, reproduce_table1, sweep_alpha, to_csv, to_json
from .teleport import ChainSpec

log = logging.getLogger("teleportability")

VERIFY_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- argument helpers ----------------------------------------------------------------


def _model(text: str) -> NoiseModel:
    try:
        return NoiseModel.parse(text)
    except ModelSpecError as exc:
        raise argparse.ArgumentTypeError(f"bad model spec {text!r}: {exc}") from None


def _grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError):
        raise argparse.ArgumentTypeError(f"grid must look like lo:hi:n, got {text!r}") from None
    if len(parts) != 3 or n < 1 or not (0 <= lo <= hi <= 0.5):
        raise argparse.ArgumentTypeError(f"grid needs 0 <= lo <= hi <= 0.5 and n >= 1, got {text!r}")
    return lo, hi, n


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like lo:hi, got {text!r}") from None
    return lo, hi


def _floats(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _nonneg(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"k must be non-negative, got {text}")
    return v


def _alpha(text: str) -> float:
    v = float(text)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in [0, 1], got {text}")
    return v


def _add_method(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=("closed_form", "quadrature", "monte_carlo"), default="closed_form")
    p.add_argument("--n-theta", type=int, default=64)
    p.add_argument("--n-phi", type=int, default=64)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)


def _add_output(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument("--format", choices=("human", "csv", "json"), default=default)
    p.add_argument("--output", "-o", type=Path, default=None)


def _method(args) -> AverageMethod:
    try:
        if args.method == "quadrature":
            return AverageMethod.quadrature(args.n_theta, args.n_phi)
        if args.method == "monte_carlo":
            return AverageMethod.monte_carlo(args.samples, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return CLOSED_FORM


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="teleportability", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="F, D and tau_k for one resource")
    p.add_argument("--model", type=_model, default=NoiseModel())
    p.add_argument("--alpha", type=_alpha, required=True)
    p.add_argument("--k", type=_nonneg, required=True)
    _add_method(p)
    _add_output(p, "human")

    p = sub.add_parser("sweep", help="scores over an alpha grid")
    p.add_argument("--model", type=_model, default=NoiseModel())
    p.add_argument("--alpha-grid", type=_grid, default=(0.0, 0.5, 51))
    p.add_argument("--k-list", type=_floats, default=[0.0, 1.0, 2.0, 3.0])
    p.add_argument("--figure", type=Path, default=None, help="also render tau_k(alpha) to this image file")
    _add_method(p)
    _add_output(p, "csv")

    p = sub.add_parser("verify", help="closed forms against quadrature and Monte Carlo")
    p.add_argument("--model", type=_model, default=NoiseModel())
    p.add_argument("--alpha-grid", type=_grid, default=(0.0, 0.5, 11))
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p, "human")

    p = sub.add_parser("table1", help="crossover alpha_n^k for global depolarizing noise")
    p.add_argument("--p", type=float, default=0.7)
    p.add_argument("--k-list", type=_floats, default=[2.0, 2.1, 2.5, 3.5, 4.0])
    p.add_argument("--figure", type=Path, default=None)
    _add_output(p, "human")

    p = sub.add_parser("chain", help="n-link repeater chain")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=_alpha, required=True)
    p.add_argument("--k-list", type=_floats, default=[0.0, 1.0, 2.0, 3.0])
    _add_output(p, "human")

    p = sub.add_parser("kstar", help="sensitivity cutoff min F/D")
    p.add_argument("--model", type=_model, default=NoiseModel())
    g = p.add_mutually_exclusive_group()
    g.add_argument("--nonclassical", action="store_true", help="minimize over [alpha_cl, 1/2]")
    g.add_argument("--alpha-range", type=_range, default=(0.0, 0.5))
    p.add_argument("--grid-points", type=int, default=2001)
    _add_output(p, "human")
    return parser


# -- formatting ---------------------------------------------------------------------


def _h(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def _human_table(records: list[dict]) -> str:
    if not records:
        return ""
    cols = list(records[0].keys())
    cells = [[_h(r[c]) for c in cols] for r in records]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _render(records: list[dict], fmt: str, rows=None) -> str:
    if fmt == "csv":
        return to_csv(rows if rows is not None else records)
    if fmt == "json":
        return to_json(rows if rows is not None else records)
    return _human_table(records)


def _emit(text: str, args) -> None:
    if args.output is None:
        sys.stdout.write(text)
        return
    try:
        args.output.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {args.output}: {exc.strerror or exc}") from exc
    log.info("wrote %s", args.output)


# -- commands -----------------------------------------------------------------------


def cmd_score(args) -> int:
    method = _method(args)
    mo = moments(args.model, SchmidtParam(args.alpha), method)
    rec = ScoreRecord.from_moments(mo.F, mo.D, args.k)
    record = {"model": args.model.to_text(), "alpha": args.alpha, "route": mo.route, **rec.__dict__}
    if args.format == "human":
        text = "\n".join(f"{k}={_h(v)}" for k, v in record.items()) + "\n"
    else:
        text = _render([record], args.format)
    _emit(text, args)
    return 0


def cmd_sweep(args) -> int:
    method = _method(args)
    rows = sweep_alpha(args.model, args.k_list, alpha_grid(*args.alpha_grid), method)
    if args.format == "human":
        _emit(_human_table([r.as_record() for r in rows]), args)
    elif args.output is None:
        export(rows, args.format, sys.stdout)
    else:
        export(rows, args.format, args.output)
        log.info("wrote %s", args.output)
    if args.figure is not None:
        from .plotting import plot_sweep

        log.info("figure %s", plot_sweep(rows, args.figure))
    return 0


def cmd_verify(args) -> int:
    model = args.model
    combined = model.kind == "combined_depolarizing"
    records = []
    worst_q = 0.0
    worst_mc_sigma = 0.0
    has_closed = True
    for a in alpha_grid(*args.alpha_grid):
        cf = moments(model, a, CLOSED_FORM)
        has_closed = has_closed and not cf.route.startswith("simulation")
        q = moments(model, a, QUADRATURE)
        mc = monte_carlo_stats(simulated_integrand(model, a), args.samples, args.seed)
        rec = {
            "alpha": a,
            "route": cf.route,
            "F_closed": cf.F,
            "F_quadrature": q.F,
            "F_monte_carlo": mc.mean,
            "F_se": mc.se_mean,
            "D_closed": cf.D,
            "D_quadrature": q.D,
            "D_monte_carlo": mc.std,
            "D_se": mc.se_std,
        }
        if combined:
            ps = model.params
            rec["F_published"] = combined_fidelity_published(a, ps["p"], ps["p1"], ps["p2"])
            rec["D_published"] = combined_deviation_published(a, ps["p"], ps["p1"], ps["p2"])
        records.append(rec)
        worst_q = max(worst_q, abs(cf.F - q.F), abs(cf.D - q.D))
        for key, se in (("F", mc.se_mean), ("D", mc.se_std)):
            diff = abs(rec[f"{key}_closed"] - rec[f"{key}_monte_carlo"])
            if diff > 1e-12:
                worst_mc_sigma = max(worst_mc_sigma, diff / se if se > 0 else math.inf)
    passed = worst_q < VERIFY_TOL
    summary = {
        "model": model.to_text(),
        "closed_form_available": has_closed,
        "max_closed_vs_quadrature": worst_q,
        "max_closed_vs_monte_carlo_se": worst_mc_sigma,
        "pass": passed,
    }
    if combined:
        resid_f = max(abs(r["F_published"] - r["F_quadrature"]) for r in records)
        resid_d = [abs(r["D_published"] - r["D_quadrature"]) for r in records]
        summary["max_published_F_residual"] = resid_f
        summary["max_published_D_residual"] = max(resid_d) if all(map(math.isfinite, resid_d)) else math.nan
    if args.format == "human":
        text = _human_table(records) + "".join(f"{k}: {_h(v)}\n" for k, v in summary.items())
    elif args.format == "json":
        text = json.dumps({"rows": records, "summary": summary}, indent=2) + "\n"
    else:
        text = to_csv(records)
    _emit(text, args)
    log.info("verify %s: max closed-vs-quadrature %.3g", "passed" if passed else "FAILED", worst_q)
    return 0 if passed else 1


def cmd_table1(args) -> int:
    try:
        rows = reproduce_table1(args.p, args.k_list)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "human":
        recs = [r.as_record() for r in rows]
        text = _human_table(recs)
        for r in rows:
            if r.alpha_nk is None:
                text += f"k={r.k:g}: crossover at or below alpha_cl (marginal)\n"
            elif r.matches_published is False:
                text += f"k={r.k:g}: derived {r.alpha_nk:.4f} disagrees with published {r.published:.3f}\n"
        _emit(text, args)
    else:
        _emit(_render([], args.format, rows), args)
    if args.figure is not None:
        from .plotting import plot_table1

        log.info("figure %s", plot_table1(rows, args.figure))
    return 0


def cmd_chain(args) -> int:
    try:
        spec = ChainSpec(args.n, SchmidtParam(args.alpha))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    model = NoiseModel()
    cf = moments(model, spec, CLOSED_FORM)
    sim = moments(model, spec, QUADRATURE)
    records = []
    for k in args.k_list:
        rec = ScoreRecord.from_moments(cf.F, cf.D, k)
        records.append(
            {
                "n": spec.n,
                "alpha": spec.alpha.alpha,
                "F_n": cf.F,
                "D_n": cf.D,
                "F_simulated": sim.F,
                "D_simulated": sim.D,
                "k": k,
                "tau": rec.tau,
                "tau_classical": rec.tau_classical,
                "quantum_useful": rec.quantum_useful,
            }
        )
    _emit(_render(records, args.format), args)
    return 0


def cmd_kstar(args) -> int:
    if args.nonclassical:
        try:
            rng = nonclassical_range(args.model)
        except ValueError as exc:
            raise ArithmeticError(str(exc)) from None
    else:
        rng = args.alpha_range
    if not (0 <= rng[0] <= rng[1] <= 0.5):
        raise UsageError(f"alpha range must lie within [0, 0.5], got {rng[0]}:{rng[1]}")
    res = k_star(args.model, rng, n_grid=args.grid_points)
    rec = {"model": args.model.to_text(), "alpha_lo": rng[0], "alpha_hi": rng[1], "k_star": res.k_star, "alpha": res.alpha}
    if args.format == "human":
        text = f"k*={_h(res.k_star)} at alpha={_h(res.alpha)} (range {_h(rng[0])}..{_h(rng[1])})\n"
    else:
        text = _render([rec], args.format)
    _emit(text, args)
    return 0


COMMANDS = {
    "score": cmd_score,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "table1": cmd_table1,
    "chain": cmd_chain,
    "kstar": cmd_kstar,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    for h in list(log.handlers):
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    log.propagate = False
    if getattr(args, "method", None) == "monte_carlo" or args.command == "verify":
        # logged at warning level so it shows without --verbose
        log.warning("monte_carlo seed=%d samples=%d", args.seed, args.samples)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"teleportability {args.command}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"teleportability {args.command}: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, OSError) as exc:
        print(f"teleportability {args.command}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
