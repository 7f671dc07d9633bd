"""Command-line front end: run, check, verify, batch.

Artifacts are written under --out (default: the current directory), named
after the scenario file stem: <stem>_trace.txt (native trace),
<stem>_trace.csv (plain CSV mirror), <stem>.svg (mode-colored path with
boundary snapshots and the d0-equidistant curve), <stem>_summary.txt,
<stem>_feasibility.json.

Exit codes are stable: 0 ok, 1 usage or parse/validation error,
2 infeasible scenario, 3 failed verdict (collision, identity residual,
or engagement conclusion), 4 inconclusive (run ended before the question
was settled). `batch` exits with the first code in priority order
1, 2, 3, 4 present among its rows, 0 when every row passed.
"""

import argparse
import json
import os
import sys
from typing import Optional

import numpy as np

from . import feasibility, sim, svg, verify
from .controller import NORMAL, REVERSED
from .scenario import Scenario, ScenarioError, load
from .trace import COLUMNS, Trace

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_VERDICT = 3
EXIT_INCONCLUSIVE = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the documented usage code is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(_fail(f"error: {message}"))


def _fail(message: str) -> int:
    print(message, file=sys.stderr)
    return EXIT_USAGE


def _load_scenario(path: str, args) -> Scenario:
    sc = load(path)
    if getattr(args, "variant", None):
        sc = sc._replace(control=sc.control._replace(sign_variant=args.variant))
    if getattr(args, "dt", None) is not None:
        sc = sc._replace(dt=args.dt)
    if getattr(args, "horizon", None) is not None:
        sc = sc._replace(horizon=args.horizon)
    sc.validate()
    return sc


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _out_dir(args) -> str:
    out = getattr(args, "out", None) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_csv(trace: Trace, path: str) -> None:
    np.savetxt(path, trace.data, delimiter=",", fmt="%.17g",
               header=",".join(COLUMNS), comments="")


def _summary_text(res: sim.RunOutcome) -> str:
    lines = [
        f"outcome: {res.outcome} ({res.reason})",
        f"t_final: {res.t_final:.6f} s in {res.steps} steps",
        f"final pose: x={res.state.x:.6f} y={res.state.y:.6f} "
        f"theta={res.state.theta:.6f}",
        f"min distance: {res.min_distance:.6f} m",
    ]
    lines += [f"event t={e.t:.3f} {e.kind}: {e.detail}" for e in res.trace.events]
    return "\n".join(lines)


def _run_one(sc: Scenario, stem: str, out: str) -> sim.RunOutcome:
    res = sim.run(sc)
    res.trace.write(os.path.join(out, f"{stem}_trace.txt"))
    _write_csv(res.trace, os.path.join(out, f"{stem}_trace.csv"))
    svg.write_svg(os.path.join(out, f"{stem}.svg"), res.trace, sc.obstacle)
    with open(os.path.join(out, f"{stem}_summary.txt"), "w",
              encoding="utf-8") as fh:
        fh.write(_summary_text(res) + "\n")
    return res


def _outcome_code(res: sim.RunOutcome) -> int:
    if res.outcome == sim.TARGET_REACHED:
        return EXIT_OK
    if res.outcome == sim.COLLISION:
        return EXIT_VERDICT
    return EXIT_INCONCLUSIVE


def cmd_run(args) -> int:
    try:
        sc = _load_scenario(args.scenario, args)
    except (OSError, ScenarioError) as e:
        return _fail(str(e))
    res = _run_one(sc, _stem(args.scenario), _out_dir(args))
    print(_summary_text(res))
    return _outcome_code(res)


def _check_report(sc: Scenario, stem: str, args) -> "feasibility.FeasibilityReport":
    report = feasibility.run_feasibility(sc)
    if getattr(args, "out", None):
        path = os.path.join(_out_dir(args), f"{stem}_feasibility.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report.as_dict(), fh, indent=2)
    return report


def cmd_check(args) -> int:
    try:
        sc = _load_scenario(args.scenario, args)
    except (OSError, ScenarioError) as e:
        return _fail(str(e))
    report = _check_report(sc, _stem(args.scenario), args)
    print(report.format_text())
    if args.suggest_delta:
        try:
            print(f"suggested delta = "
                  f"{feasibility.suggest_delta(sc, report)!r}")
        except ValueError as e:
            print(f"suggested delta: none ({e})")
    return EXIT_OK if report.ok else EXIT_INFEASIBLE


def _verify_trace(trace: Trace) -> tuple[int, str]:
    checks = verify.identity_checks(trace)
    report = verify.assess_engagement(trace)
    text = verify.format_report(checks, report)
    if report.conclusive:
        try:
            fit = verify.convergence_rate(trace, report)
            text += (f"\n  rate fit    {fit.rate:.4f} over {fit.n_points} rows"
                     f" in t = [{fit.t_span[0]:.3f}, {fit.t_span[1]:.3f}]")
        except ValueError:
            pass
    if not report.conclusive:
        return EXIT_INCONCLUSIVE, text + f"\ninconclusive: {report.reason}"
    failed = [c.name for c in checks if not c.ok]
    for name in ("safety", "corridor", "convergence", "overtaking"):
        if not getattr(report, f"{name}_ok"):
            failed.append(name)
    if failed:
        return EXIT_VERDICT, text + "\nfailed: " + ", ".join(failed)
    return EXIT_OK, text


def cmd_verify(args) -> int:
    try:
        trace = Trace.read(args.trace)
    except (OSError, ValueError) as e:
        return _fail(f"cannot read trace: {e}")
    code, text = _verify_trace(trace)
    print(text)
    return code


def cmd_batch(args) -> int:
    out = _out_dir(args)
    codes = []
    for path in args.scenarios:
        stem = _stem(path)
        try:
            sc = _load_scenario(path, args)
        except (OSError, ScenarioError) as e:
            print(f"{stem:24s} parse error: {e}", file=sys.stderr)
            codes.append(EXIT_USAGE)
            continue
        report = _check_report(sc, stem, args)
        if not report.ok:
            print(f"{stem:24s} infeasible: {'; '.join(report.violations)}")
            codes.append(EXIT_INFEASIBLE)
            continue
        res = _run_one(sc, stem, out)
        code, _ = _verify_trace(res.trace)
        code = max(code, _outcome_code(res))
        verdict = {EXIT_OK: "pass", EXIT_VERDICT: "verdict fail",
                   EXIT_INCONCLUSIVE: "inconclusive"}[code]
        print(f"{stem:24s} feasible, {res.outcome}, "
              f"min d {res.min_distance:.4f}, verify: {verdict}")
        codes.append(code)
    for code in (EXIT_USAGE, EXIT_INFEASIBLE, EXIT_VERDICT, EXIT_INCONCLUSIVE):
        if code in codes:
            return code
    return EXIT_OK


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dt", type=float, default=None,
                   help="override the scenario time step")
    p.add_argument("--horizon", type=float, default=None,
                   help="override the scenario horizon")
    p.add_argument("--variant", choices=(NORMAL, REVERSED), default=None,
                   help="override the turn variant")
    p.add_argument("--out", default=None,
                   help="artifact directory (default: current directory)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slidenav",
                     description="sliding-mode boundary-following navigation:"
                                 " simulate, check feasibility, verify runs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario and emit artifacts")
    p.add_argument("scenario")
    _add_scenario_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="run the feasibility scans")
    p.add_argument("scenario")
    p.add_argument("--suggest-delta", action="store_true",
                   help="print the largest admissible relay zone half-width")
    _add_scenario_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="check identities and verdicts of a "
                                      "recorded trace")
    p.add_argument("trace")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("batch", help="check + run + verify several scenarios")
    p.add_argument("scenarios", nargs="+")
    _add_scenario_flags(p)
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv: Optional[list] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
