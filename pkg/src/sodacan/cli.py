"""Command-line entry point: sodacan <command> [flags].

Exit codes: 0 success, 1 a check or verdict failed, 2 usage error.
Every command accepts --config PATH (a JSON object of flag values; explicit
flags win) and --out DIR (write report files and a manifest there).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from . import barriers as B
from .classifier import classify, table_audit
from .geometry import Params, SodaCan
from .report import csv_text, json_text
from .solver import regularity_probe
from .wiener import divergence_integral_test, soda_can_profile, wiener_partial_sums

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    parameters: Dict
    version: str = __version__
    outputs: List[str] = field(default_factory=list)
    duration_s: float = 0.0


class _Outputs:
    """Writes report files into one directory and remembers them for the manifest."""

    def __init__(self, out: Optional[str]):
        self.dir = Path(out) if out else None
        self.paths: List[str] = []
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str):
        if self.dir is None:
            return
        path = self.dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.paths.append(str(path))


def threads() -> int:
    """Worker cap from SODACAN_THREADS (default 1)."""
    raw = os.environ.get("SODACAN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"SODACAN_THREADS must be an integer, got {raw!r}")


def _params(a) -> Params:
    return Params(a.n, a.p, a.l, a.theta)


# commands ------------------------------------------------------------------

def cmd_classify(a, out: _Outputs) -> int:
    c = classify(a.n, a.p, a.l, a.theta)
    text = json_text(c.to_dict())
    out.write("classification.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def _build_barrier(a):
    """Returns (candidate, domain, family or None)."""
    name = a.construction
    if name == "power":
        params = _params(a)
        _, barrier = B.power_barrier_min_j(params)
        return barrier, SodaCan(params), lambda: B.power_barrier_family(params, count=a.family_size)
    if name == "kappa":
        params = _params(a)
        if not params.p > 2:
            raise UsageError("kappa barrier needs p > 2")
        kappa = a.kappa if a.kappa is not None else 0.5 * B.kappa_threshold(params)
        if not 0 < kappa <= B.kappa_threshold(params):
            raise UsageError("kappa must lie in (0, ((p-1)/(n p theta))^(1/(p-2))]")
        return B.KappaBarrier(kappa, params.p, params.n), SodaCan(params), None
    if name == "radial_ode":
        params = _params(a)
        return (B.build_radial_ode_barrier(params.n, params.p, a.j), SodaCan(params),
                lambda: B.radial_ode_family(params.n, params.p, count=a.family_size))
    if name == "barenblatt":
        params = _params(a)
        if a.delta is not None:
            pasted, _ = B.scaled_barenblatt_barrier(params, a.delta, a.epsilon)
            return pasted, SodaCan(params), None
        bb = B.build_barenblatt_barrier(params.n, params.p, params.l, a.epsilon)
        member = B.barenblatt_family_member(params.n, params.p, params.l, a.epsilon, 1.0 / bb.delta_eps)
        dom = SodaCan(Params(params.n, params.p, params.l, bb.theta0))
        return member, dom, lambda: B.barenblatt_family(params.n, params.p, params.l, a.epsilon,
                                                         count=a.family_size)
    if name == "pasted":
        params = _params(a)
        return B.pasted_kappa_barrier(params, a.delta if a.delta is not None else 1.0), SodaCan(params), None
    raise UsageError(f"unknown construction {name!r}")


def cmd_barrier_check(a, out: _Outputs) -> int:
    cfg = B.SamplerConfig(points=a.points, seed=a.seed)
    try:
        if a.construction == "irregularity":
            params = _params(a)
            s = B.build_irregularity_supersolution(params.n, params.p, params.l)
            f, dom, family = s, SodaCan(params), None
            report = B.verify_irregularity_supersolution(s, dom, cfg)
        else:
            f, dom, family = _build_barrier(a)
            report = B.verify_barrier(f, dom, cfg=cfg)
    except B.PastingError as e:
        sys.stdout.write(json_text({"construction": a.construction, "passed": False, "error": str(e)}))
        return EXIT_FAIL
    result = {"construction": a.construction, "domain": dom.to_dict(), "report": report.to_dict()}
    passed = report.passed
    if a.growth and family is not None:
        growth = B.barrier_family_growth_check(family(), dom, k_max=a.growth)
        result["growth"] = growth.to_dict()
        passed = passed and growth.passed
    result["passed"] = passed
    smp = B.residual_samples(f, dom, cfg)
    out.write("residuals.csv", csv_text(["r", "t", "residual", "margin"],
                                        zip(smp["r"], smp["t"], smp["residual"], smp["margin"])))
    text = json_text(result)
    out.write("report.json", text)
    sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_wiener(a, out: _Outputs) -> int:
    params = Params(a.n, 2.0, a.l, a.theta)
    rep = wiener_partial_sums(SodaCan(params), k_max=a.kmax)
    check = divergence_integral_test(a.n, soda_can_profile(a.l, a.theta))
    out.write("wiener.csv", rep.to_csv())
    result = rep.to_dict()
    result["integral_test"] = check.to_dict()
    verdict = rep.verdict.kind
    ok = verdict != "Inconclusive" and verdict == check.kind
    if a.expect:
        ok = ok and verdict == a.expect
    result["passed"] = ok
    text = json_text(result)
    out.write("wiener.json", text)
    sys.stdout.write(json_text({"verdict": verdict, "integral_test": check.kind, "passed": ok}))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_solve(a, out: _Outputs) -> int:
    params = _params(a)
    if a.grid < 256:
        raise UsageError("--grid must be at least 256 (the ladder is grid/4, grid/2, grid)")
    ladder = [a.grid // 4, a.grid // 2, a.grid]
    rep = regularity_probe(params, data=a.profile, ladder=ladder, workers=threads(),
                           attain_below=a.attain_below, fail_above=a.fail_above)
    out.write("solve.csv", rep.finest.to_csv())
    result = rep.to_dict()
    result["finest"] = rep.finest.summary()
    text = json_text(result)
    out.write("probe.json", text)
    sys.stdout.write(text)
    if a.expect and rep.verdict != a.expect:
        return EXIT_FAIL
    return EXIT_OK


def cmd_table_audit(a, out: _Outputs) -> int:
    rep = table_audit()
    text = json_text(rep.to_dict())
    out.write("audit.json", text)
    sys.stdout.write(json_text({"passed": rep.passed, "cells_checked": rep.cells_checked,
                                "mismatches": len(rep.mismatches)}))
    return EXIT_OK if rep.passed else EXIT_FAIL


# parser --------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file of flag values; explicit flags take precedence")
    common.add_argument("--out", help="directory for report files and the manifest")

    shape = _Parser(add_help=False)
    shape.add_argument("--n", type=int, default=3)
    shape.add_argument("--p", type=float, default=2.0)
    shape.add_argument("--l", type=float, default=2.0)
    shape.add_argument("--theta", type=float, default=1.0)

    ap = _Parser(prog="sodacan", description="Boundary regularity toolkit for soda-can domains.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    ap.subcommands = sub.choices

    c = sub.add_parser("classify", parents=[common, shape], help="regularity verdict")
    c.set_defaults(func=cmd_classify)

    b = sub.add_parser("barrier-check", parents=[common, shape], help="verify a barrier construction")
    b.add_argument("construction",
                   choices=["power", "kappa", "radial_ode", "irregularity", "barenblatt", "pasted"])
    b.add_argument("--kappa", type=float)
    b.add_argument("--j", type=float, default=1.0)
    b.add_argument("--epsilon", type=float, default=0.5)
    b.add_argument("--delta", type=float)
    b.add_argument("--points", type=_positive_int, default=1000)
    b.add_argument("--seed", type=int, default=12345)
    b.add_argument("--growth", type=int, default=0, help="also check family growth up to this k")
    b.add_argument("--family-size", type=_positive_int, default=12)
    b.set_defaults(func=cmd_barrier_check)

    w = sub.add_parser("wiener", parents=[common], help="Wiener series for the heat equation")
    w.add_argument("--n", type=int, default=3)
    w.add_argument("--l", type=float, default=2.0)
    w.add_argument("--theta", type=float, default=1.0)
    w.add_argument("--kmax", type=_positive_int, default=40)
    w.add_argument("--expect", choices=["Converges", "Diverges"])
    w.set_defaults(func=cmd_wiener)

    s = sub.add_parser("solve", parents=[common, shape], help="numerical regularity probe")
    s.add_argument("--profile", default="linear", choices=["linear", "one_minus_r", "zero"])
    s.add_argument("--grid", type=_positive_int, default=256)
    s.add_argument("--attain-below", type=float, default=0.2)
    s.add_argument("--fail-above", type=float, default=0.4)
    s.add_argument("--expect", choices=["AttainsData", "FailsToAttain", "Inconclusive"])
    s.set_defaults(func=cmd_solve)

    t = sub.add_parser("table-audit", parents=[common], help="sweep the classifier against the lookup table")
    t.set_defaults(func=cmd_table_audit)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: List[str]) -> argparse.Namespace:
    args = ap.parse_args(argv)
    if not args.config:
        return args
    try:
        with open(args.config, encoding="utf-8") as fh:
            conf = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config: {e}")
    if not isinstance(conf, dict):
        raise UsageError("config must be a JSON object")
    sub = ap.subcommands[args.command]
    known = set(vars(args)) - {"func", "command", "config"}
    unknown = sorted(set(k.replace("-", "_") for k in conf) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in conf.items()})
    return ap.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    start = time.perf_counter()
    try:
        args = _apply_config(ap, argv)
        out = _Outputs(args.out)
        code = args.func(args, out)
    except UsageError as e:
        print(f"sodacan: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        # invalid parameters surface as ValueError from the constructors
        print(f"sodacan: invalid parameters: {e}", file=sys.stderr)
        return EXIT_USAGE
    if out.dir is not None:
        params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "config")}
        man = RunManifest(args.command, params, outputs=list(out.paths),
                          duration_s=time.perf_counter() - start)
        man.outputs.append(str(out.dir / "manifest.json"))
        out.write("manifest.json", json_text(asdict(man)))
    return code


if __name__ == "__main__":
    sys.exit(main())
