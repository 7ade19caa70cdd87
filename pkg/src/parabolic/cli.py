"""Command-line front end: ``parabolic <command> GERM [options]``.

``GERM`` is either the germ text (``"f1 = ...; f2 = ..."``) or a path to a
UTF-8 file holding it.  The JSON report goes to stdout, or to
``<out>/report.json`` next to the CSV side files when ``--out`` (or the
``PARABOLIC_OUT`` environment variable) names a directory.

Exit codes: 0 success, 1 bad usage or unparsable input, 2 hypothesis not
met, 3 truncation exhausted, 4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

import gmpy2
import numpy as np
import scipy
import sympy

from . import __version__
from .blowup import Chart, LiftedGerm, blow_up, linear_chain
from .classify import Case, certify_chain, classify_direction
from .germ import (
    DicriticalError,
    Direction,
    Germ2,
    HypothesisError,
    characteristic_directions,
    direction,
    is_dicritical,
    order,
    pure_order,
)
from .germ_io import ParseError, dump_report, parse_germ, parse_poly, quantity
from .index import AdaptedForm, adapted_form, numeric_residue, residual_index
from .normalizer import OrderGainError
from .pipeline import classify_lifted, prepare_hard_case
from .petal import (
    NonConvergence,
    OrbitEscape,
    PetalDomain,
    choose_delta,
    count_components,
    export_curve,
    iterate_orbit,
    petal_center,
    push_forward_curve,
    solve_parabolic_curve,
    sum_tail_bound_check,
    validate_estimates,
)
from .series import Mode, QQI, TruncationError

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_TRUNCATION, EXIT_NONCONVERGENCE = 0, 1, 2, 3, 4

# cases in which the existence results give no conclusion
NO_CONCLUSION = {Case.NOT_TANGENTIAL, Case.NOT_SINGULAR, Case.NOT_REGULAR, Case.INDEX_ZERO}


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class CommandFailed(Exception):
    def __init__(self, code: int, result: Dict):
        super().__init__(result.get("error", {}).get("message", ""))
        self.code = code
        self.result = result


def build_parser() -> argparse.ArgumentParser:
    p = _ArgParser(prog="parabolic", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgParser)
    helps = {
        "analyze": "order, pure order, dicriticality and every characteristic direction",
        "index": "adapted-chart invariants and the residual index at a direction",
        "classify": "case analysis at a direction, with prior-theorem verdicts",
        "chain": "run the linear chain and report (or certify) its end point",
        "normalize": "hard-case normal form and the shift ladder",
        "curve": "solve for the parabolic curves of a hard-case germ",
        "validate": "orbit asymptotics, summability and the derivative/difference estimates",
    }
    for name, text in helps.items():
        s = sub.add_parser(name, help=text, description=text)
        s.add_argument("germ", help="germ text or path to a file holding it")
        s.add_argument("--trunc", type=int, default=None, help="truncation degree (default: from the input)")
        s.add_argument("--mode", choices=["exact", "float"], default="exact")
        s.add_argument("--direction", default=None, help="characteristic direction, e.g. [1:0]")
        s.add_argument("--adapted", action="store_true",
                       help="the germ is already in an adapted chart fixing {z = 0} pointwise")
        s.add_argument("--steps", type=int, default=None, help="chain steps (chain)")
        s.add_argument("--root", default=None, help="explicit value of the shear coefficient a")
        s.add_argument("--depth", type=int, default=24, help="principal-part depth of the formal series")
        s.add_argument("--delta", type=float, default=None, help="petal size (default: adaptive halving)")
        s.add_argument("--grid", type=int, default=64, help="nodes per side of each petal grid")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--kmax", type=int, default=10000, help="orbit length (validate)")
        s.add_argument("--out", default=os.environ.get("PARABOLIC_OUT"), help="output directory")
    return p


# -- helpers ----------------------------------------------------------------------------

def _read_source(src: str) -> str:
    path = Path(src)
    if "=" not in src and path.is_file():
        return path.read_text(encoding="utf-8")
    return src


def parse_direction(text: str, mode: Mode) -> Direction:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")) or ":" not in body:
        raise ParseError("direction must look like [a:b]", 0)
    a_txt, b_txt = body[1:-1].split(":", 1)
    a = parse_poly(a_txt, 0, mode).coeffs.get((0, 0))
    b = parse_poly(b_txt, 0, mode).coeffs.get((0, 0))
    if a is None and b is None:
        raise ParseError("[0:0] is not a direction", 0)
    if a is None:
        return direction(None, mode)
    zero = QQI(0) if mode is Mode.EXACT else 0j
    return direction((b if b is not None else zero) / a, mode)


def _dir_entry(d: Direction) -> Dict:
    return {
        "direction": str(d),
        "lambda": quantity(d.lam, "parabolic.germ.characteristic_directions", None if d.exact else 1e-12),
        "multiplicity": d.multiplicity,
        "degenerate": d.degenerate,
    }


def _index_entry(af: AdaptedForm, idx) -> Dict:
    P = "parabolic.index.residual_index"
    out = {
        "r": af.r,
        "mu": _maybe_inf(af.mu),
        "nu": _maybe_inf(af.nu),
        "m": _maybe_inf(idx.m),
        "n": idx.n,
        "ind": quantity(idx.index, P, None if af.mode is Mode.EXACT else 1e-12),
    }
    out["ind_contour"] = quantity(numeric_residue(af), "parabolic.index.numeric_residue", 1e-8)
    return out


def _plain(x, tol):
    if x is None:
        return None
    return quantity(x, "parabolic.normalizer.check_pattern", tol)


def _maybe_inf(x):
    return "inf" if x == float("inf") else int(x)


def _cls_entry(cls) -> Dict:
    P = "parabolic.classify.classify"
    out = {"case": cls.case.value, "curve_count": cls.curve_count, "notes": list(cls.notes)}
    if cls.lam is not None:
        out["lambda"] = quantity(cls.lam, P)
    if cls.target is not None:
        out["target"] = str(cls.target)
    if cls.z0 is not None:
        out["z0"] = quantity(cls.z0, P)
    return out


def _adapted_germ(args, f: Germ2):
    """The germ in an adapted chart, its chart record and the direction report if any."""
    if args.adapted:
        return LiftedGerm(f, Chart([])), None
    if args.direction is None:
        raise HypothesisError("this command needs --direction (or --adapted)")
    v = parse_direction(args.direction, f.mode)
    return blow_up(f, v), v


def _classify_adapted(F: LiftedGerm):
    return classify_lifted(F)


# -- commands ----------------------------------------------------------------------------

def cmd_analyze(args, f: Germ2) -> Dict:
    res: Dict = {"order": quantity(order(f), "parabolic.germ.order")}
    if f.mode is Mode.EXACT:
        pc = pure_order(f)
        res["pure_order"] = quantity(pc.pure_order, "parabolic.germ.pure_order")
        res["singular"] = pc.singular
        res["corner"] = pc.corner
    res["dicritical"] = is_dicritical(f)
    if res["dicritical"]:
        raise CommandFailed(EXIT_HYPOTHESIS, {**res, "error": {"type": "DicriticalError",
                                                               "message": "dicritical origin"}})
    dirs = []
    for d in characteristic_directions(f):
        entry = _dir_entry(d)
        try:
            rep = classify_direction(f, d)
            entry["classification"] = _cls_entry(rep.classification)
            if rep.index is not None:
                entry["index"] = _index_entry(rep.form, rep.index)
            entry["verdict"] = rep.verdict
        except (HypothesisError, TruncationError) as exc:
            entry["classification"] = {"error": str(exc)}
        dirs.append(entry)
    res["directions"] = dirs
    return res


def cmd_index(args, f: Germ2) -> Dict:
    F, v = _adapted_germ(args, f)
    af = adapted_form(F)
    idx = residual_index(af)
    out = _index_entry(af, idx)
    if v is not None:
        out["direction"] = str(v)
    return out


def cmd_classify(args, f: Germ2) -> Dict:
    if args.adapted:
        af, idx, cls = _classify_adapted(LiftedGerm(f, Chart([])))
        res = {"classification": _cls_entry(cls), "index": _index_entry(af, idx)}
    else:
        _, v = _adapted_germ(args, f)
        rep = classify_direction(f, v)
        cls = rep.classification
        res = {"direction": str(v), "classification": _cls_entry(cls), "verdict": rep.verdict,
               "regular": rep.regular}
        if rep.index is not None:
            res["index"] = _index_entry(rep.form, rep.index)
    if cls.case in NO_CONCLUSION:
        res["error"] = {"type": "HypothesisError", "message": f"case {cls.case.value}: no existence result applies"}
        raise CommandFailed(EXIT_HYPOTHESIS, res)
    return res


def cmd_chain(args, f: Germ2) -> Dict:
    F, v = _adapted_germ(args, f)
    res: Dict = {}
    if args.steps is None:
        _, _, cls = _classify_adapted(F)
        cert = certify_chain(F, cls)
        P = "parabolic.classify.certify_chain"
        res.update(steps=cert.steps, direction=str(cert.direction), nondegenerate=cert.nondegenerate,
                   order_after=cert.order_after, predicted_count=cert.predicted_count, message=cert.message,
                   **{"lambda": quantity(cert.lam, P), "lambda_predicted": quantity(cert.lam_predicted, P)})
        return res
    G = linear_chain(F, args.steps)
    g = G.germ
    res["steps"] = args.steps
    res["chart"] = [k for k, _ in G.chart.history]
    try:
        res["order_after"] = quantity(order(g), "parabolic.germ.order")
        res["directions_after"] = [_dir_entry(d) for d in characteristic_directions(g)]
    except DicriticalError:
        res["directions_after"] = "dicritical"
    return res


def _hard_setup(args, f: Germ2, text: str, extended: bool = False):
    """Classify, normalise and run the ladder; see :func:`prepare_hard_case`."""
    v = None
    if not args.adapted:
        if args.direction is None:
            raise HypothesisError("this command needs --direction (or --adapted)")
        v = parse_direction(args.direction, f.mode)
    root = None
    if args.root is not None:
        root = parse_poly(args.root, 0, Mode(args.mode)).coeffs.get((0, 0))
    hc = prepare_hard_case(text, v, root=root, mode=args.mode, depth=args.depth, extended=extended, f=f)
    return hc.germ, hc.lifted, hc.normal, hc.ladder, hc.classification


def _normal_form_entry(ng, ladder) -> Dict:
    P = "parabolic.normalizer.normalize"
    tol = None if ng.mode is Mode.EXACT else 1e-10
    return {
        "n": ng.n, "r": ng.r,
        "alpha": quantity(ng.alpha, P, tol),
        "a": quantity(ng.a, P, tol),
        "root_rule": ng.roots.rule,
        "root_candidates": [[quantity(al, P, 1e-10), quantity(a, P, 1e-10)] for al, a in ng.roots.candidates],
        "pattern": {"|".join(map(str, k)): {"got": _plain(got, tol), "matches": bool(ok)}
                    for k, (got, _, ok) in sorted(ng.pattern.items(), key=lambda kv: str(kv[0]))},
        "ladder": {
            "valuations": ladder.valuations,
            "expected": ladder.expected,
            "exact_gain": ladder.exact_gain,
            "ode_form": ladder.form,
        },
        "i": quantity(ng.i_exponent, "parabolic.normalizer.shift_ladder"),
        "J": quantity(ng.J, "parabolic.normalizer.shift_ladder"),
    }


def cmd_normalize(args, f: Germ2, text: str) -> Dict:
    _, _, ng, ladder, cls = _hard_setup(args, f, text)
    return {"classification": _cls_entry(cls), "normal_form": _normal_form_entry(ng, ladder)}


def _curve_common(args, f, text):
    f, F, ng, ladder, cls = _hard_setup(args, f, text, extended=True)
    if args.delta is None:
        delta, log = choose_delta(ng, ladder)
    else:
        delta, log = args.delta, []
    return f, F, ng, ladder, cls, delta, log


def cmd_curve(args, f: Germ2, text: str, out: Optional[Path]) -> Dict:
    f, F, ng, ladder, cls, delta, log = _curve_common(args, f, text)
    d = PetalDomain(ng.r, ng.n, delta)
    P = "parabolic.petal.solve_parabolic_curve"
    cc = count_components(d, (512, 512))
    curves = []
    original = f
    chart = F.chart
    for m in range(ng.r + 1):
        c = solve_parabolic_curve(ng, ladder, d, m, shape=(args.grid, args.grid))
        pf = push_forward_curve(c, original, chart, seed=args.seed)
        entry = {
            "component": m,
            "sweeps": len(c.history),
            "contraction": quantity(c.contraction, P, 1e-3),
            "residual": quantity(c.residual, P, 1e-14),
            "bound_profile": quantity(c.bound_profile, P, 1e-10),
            "pushforward_residual": quantity(pf.residual, "parabolic.petal.push_forward_curve", 1e-14),
            "orbits_converge": pf.orbits_converge,
            "radius_range": [float(np.exp(c.grid.lr_core)), float(np.exp(c.grid.lr[-1]))],
        }
        if out is not None:
            name = f"curve_{m}.csv"
            export_curve(out / name, c)
            entry["csv"] = name
        curves.append(entry)
    return {
        "classification": _cls_entry(cls),
        "normal_form": _normal_form_entry(ng, ladder),
        "delta": quantity(delta, "parabolic.petal.choose_delta"),
        "delta_search": log,
        "components": {"count": cc.count, "refined": cc.refined, "stable": cc.stable},
        "curves": curves,
    }


def cmd_validate(args, f: Germ2, text: str, out: Optional[Path]) -> Dict:
    f, F, ng, ladder, cls, delta, log = _curve_common(args, f, text)
    d = PetalDomain(ng.r, ng.n, delta)
    c = solve_parabolic_curve(ng, ladder, d, 0, shape=(args.grid, args.grid))
    fmap = c.fmap
    e0 = petal_center(d, 0)
    rec = iterate_orbit(fmap.step, e0, args.kmax, d)
    lo = args.kmax // 2
    P = "parabolic.petal.iterate_orbit"
    diag = rec.diagnostic[lo:]
    sums = {}
    for label, s, q in (("above", ng.r + 1 + d.beta, 0.0), ("at_threshold", d.rho, 0.0),
                        ("above_log3", ng.r + 1 + d.beta, 3.0)):
        tr = sum_tail_bound_check(rec, s, q)
        sums[label] = {"s": s, "q": q, "converges": tr.converges,
                       "decay_exponent": quantity(tr.slope, "parabolic.petal.sum_tail_bound_check", 1e-2),
                       "constant": quantity(tr.constant, "parabolic.petal.sum_tail_bound_check", 1e-2)}
    est = validate_estimates(c)
    V = "parabolic.petal.validate_estimates"
    if out is not None:
        rec.to_csv(out / "orbit.csv")
    return {
        "delta": quantity(delta, "parabolic.petal.choose_delta"),
        "orbit": {
            "kmax": args.kmax,
            "stays_in_component": rec.escape_index is None,
            "sandwich_holds": bool(rec.sandwich_ok.all()),
            "diagnostic_range": [quantity(float(diag.real.min()), P), quantity(float(diag.real.max()), P)],
            "diagnostic_max_deviation": quantity(float(np.abs(diag - 1).max()), P),
            "corrected_max_deviation": quantity(float(np.abs(rec.corrected[lo:] - 1).max()), P),
        },
        "sums": sums,
        "estimates": {
            "orbit_derivative": {str(k): quantity(v, V) for k, v in est.orbit_derivative.items()},
            "T_derivative": quantity(est.T_derivative, V),
            "orbit_difference": quantity(est.orbit_difference, V),
            "orbit_difference_half": quantity(est.orbit_difference_half, V),
            "holds": est.holds,
        },
    }


# -- entry point -------------------------------------------------------------------------

def _provenance(args) -> Dict:
    return {
        "package": __version__,
        "versions": {"numpy": np.__version__, "scipy": scipy.__version__, "sympy": sympy.__version__,
                     "gmpy2": gmpy2.version()},
        "seed": args.seed,
        "tolerances": {"exact": "exact rational arithmetic", "float": "IEEE double precision"},
    }


def run(args) -> tuple:
    text = _read_source(args.germ)
    out = Path(args.out) if args.out else None
    report: Dict = {
        "command": args.command,
        "input": {"germ": text.strip(), "trunc": args.trunc, "mode": args.mode},
        "provenance": _provenance(args),
    }
    code = EXIT_OK
    try:
        f = parse_germ(text, args.trunc, args.mode)
        report["input"]["trunc"] = f.trunc
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
        cmd = args.command
        if cmd == "analyze":
            res = cmd_analyze(args, f)
        elif cmd == "index":
            res = cmd_index(args, f)
        elif cmd == "classify":
            res = cmd_classify(args, f)
        elif cmd == "chain":
            res = cmd_chain(args, f)
        elif cmd == "normalize":
            res = cmd_normalize(args, f, text)
        elif cmd == "curve":
            res = cmd_curve(args, f, text, out)
        else:
            res = cmd_validate(args, f, text, out)
        report["result"] = res
    except CommandFailed as exc:
        report["result"] = exc.result
        code = exc.code
    except ParseError as exc:
        report["error"] = {"type": "ParseError", "message": str(exc), "position": exc.pos,
                           "expected": list(exc.expected)}
        code = EXIT_INPUT
    except (HypothesisError, OrderGainError) as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = EXIT_HYPOTHESIS
    except TruncationError as exc:
        report["error"] = {"type": "TruncationError", "message": str(exc)}
        code = EXIT_TRUNCATION
    except (NonConvergence, OrbitEscape, ArithmeticError) as exc:
        # a float-mode recursion that loses accuracy is reported as a numerical failure
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = EXIT_NONCONVERGENCE
    report["exit_code"] = code
    return report, code, out


def _summary(report: Dict) -> str:
    res = report.get("result", {})
    lines = [f"{report['command']}: exit {report['exit_code']}"]
    if "error" in report:
        lines.append(f"  error: {report['error']['message']}")
    if isinstance(res, dict):
        if "error" in res:
            lines.append(f"  {res['error']['message']}")
        cls = res.get("classification")
        if isinstance(cls, dict) and "case" in cls:
            lines.append(f"  case {cls['case']}, curves {cls['curve_count']}")
        if "ind" in res:
            lines.append(f"  Ind = {res['ind']['value']}")
        for c in res.get("curves", []):
            lines.append(f"  component {c['component']}: residual {c['residual']['value']:.2e}, "
                         f"contraction {c['contraction']['value']:.3f}")
    return "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    report, code, out = run(args)
    text = dump_report(report)
    if out is not None:
        (out / "report.json").write_text(text, encoding="utf-8")
        print(_summary(report))
    else:
        sys.stdout.write(text)
        print(_summary(report), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
