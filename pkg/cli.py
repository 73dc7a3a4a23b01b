#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Tourney Lab CLI - 命令行入口
构建模型、运行负相依判定、执行场景清单、处理分阶段模型

Exit codes: 0 all properties/claims hold, 1 a property or claim fails,
2 operational error (bad input, exceeded budget). Budget exhaustion is never
reported as a verdict.
"""

import sys
import os
import argparse
import logging
from datetime import datetime

# Add src to path for modular imports
SRC_PATH = os.path.join(os.path.dirname(__file__), 'src')
if SRC_PATH not in sys.path:
    sys.path.insert(0, SRC_PATH)

from src.config import DEFAULT_BUDGETS, MC_DEFAULT_REPS, MC_DEFAULT_SEED, setup_logging
from src.depcheck import CHECKS, check_all
from src.errors import BudgetExceeded, TourneyError
from src.exactdist import Orthant
from src.models import build_from_config
from src.report_generator import build_report, generate_report
from src.scenarios import SCENARIOS, run_scenario
from src.staged import staged_from_dict, sum_staged, verify_assumption_i, verify_assumption_ii
from src.utils.serialization import dist_from_dict, dist_to_dict, read_json, write_json
from src.utils.verifier import verify_witness

logger = logging.getLogger("tourney.cli")

EXIT_OK, EXIT_VIOLATED, EXIT_ERROR = 0, 1, 2


def _banner(title: str, detail: str):
    print(f"\n{'='*50}")
    print(f"  Tourney Lab - {title}")
    print(f"  Date: {datetime.now().strftime('%Y-%m-%d')} | {detail}")
    print(f"{'='*50}\n")


def _budgets(args):
    return DEFAULT_BUDGETS.with_overrides(
        atoms=args.atom_budget,
        threshold_grid=getattr(args, "threshold_budget", None),
        upper_sets=getattr(args, "block_upper_set_budget", None),
        upper_set_pairs=getattr(args, "upper_set_budget", None),
        max_subset_size=getattr(args, "max_subset", None),
        workers=getattr(args, "workers", None),
    )


def _emit(report: dict, out: str, markdown: str = None):
    if out:
        write_json(out, report)
        print(f"[SUCCESS] Report saved to: {out}")
    if markdown:
        with open(markdown, "w", encoding="utf-8") as f:
            f.write(generate_report(report))
        print(f"[SUCCESS] Summary saved to: {markdown}")


def cmd_build(args) -> int:
    _banner("build", f"config: {args.config}")
    budgets = _budgets(args)
    d, provenance = build_from_config(read_json(args.config), budgets)
    write_json(args.out, {**dist_to_dict(d), "provenance": provenance})
    print(f"[SUCCESS] {provenance['model']}: {len(d)} atoms -> {args.out}")
    return EXIT_OK


def cmd_check(args) -> int:
    names = [name.strip() for name in args.checks.split(",") if name.strip()]
    _banner("check", f"dist: {args.dist} | checks: {','.join(names)}")
    budgets = _budgets(args)
    d = dist_from_dict(read_json(args.dist), args.dist)
    results = check_all(d, names, budgets)
    for name, r in zip(names, results):
        if not r.holds and not verify_witness(d, r):
            raise TourneyError(f"{name}: witness failed re-verification")
        print(f"  {name:8s} {r.verdict.value}")
    violated = any(not r.holds for r in results)
    report = build_report(
        command={"command": "check", "checks": names},
        inputs={"dist": dist_to_dict(d), "budgets": budgets.to_dict()},
        checks=[{"name": name, "result": r} for name, r in zip(names, results)],
        verdict="fail" if violated else "pass",
    )
    _emit(report, args.out, args.markdown)
    return EXIT_VIOLATED if violated else EXIT_OK


def cmd_scenario(args) -> int:
    _banner("scenario", f"id: {args.id} | seed: {args.seed} | reps: {args.reps}")
    report = run_scenario(args.id, args.seed, args.reps, _budgets(args))
    failed = [c for c in report["results"]["claims"] if not c["passed"]]
    for c in failed:
        print(f"  [FAIL] {c['name']}: expected {c['expected']}, computed {c['computed']}")
    print(f"  verdict: {report['verdict']}")
    _emit(report, args.out, args.markdown)
    return EXIT_OK if report["verdict"] == "pass" else EXIT_VIOLATED


def cmd_staged(args) -> int:
    _banner(f"staged {args.action}", f"model: {args.model}")
    budgets = _budgets(args)
    model = staged_from_dict(read_json(args.model))
    if args.action == "sum":
        d = sum_staged(model, budgets)
        if args.out:
            write_json(args.out, dist_to_dict(d))
        print(f"[SUCCESS] staged sum over {model.stages} stages: {len(d)} atoms")
        return EXIT_OK

    results = [
        ("assumption_i_lower", verify_assumption_i(model, Orthant.LOWER, budgets)),
        ("assumption_i_upper", verify_assumption_i(model, Orthant.UPPER, budgets)),
        ("assumption_ii", verify_assumption_ii(model, budgets)),
    ]
    for name, r in results:
        print(f"  {name:20s} {r.verdict.value}")
    violated = any(not r.holds for _, r in results)
    report = build_report(
        command={"command": "staged verify"},
        inputs={"model": args.model, "stages": model.stages, "budgets": budgets.to_dict()},
        checks=[{"name": name, "result": r} for name, r in results],
        verdict="fail" if violated else "pass",
    )
    _emit(report, args.out, args.markdown)
    return EXIT_VIOLATED if violated else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Exact negative-dependence checks for tournament score vectors")
    parser.add_argument("--log-level", default="INFO", help="Logging level")
    parser.add_argument("--log-file", help="Also log to this file")
    parser.add_argument("--atom-budget", type=int, help="Max atoms of any built law")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="Build a JointDist from a model config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    def search_flags(p):
        p.add_argument("--max-subset", type=int, help="Largest coordinate subset searched by na/signed")
        p.add_argument("--upper-set-budget", type=int, help="Max upper-set pairs per partition (na/signed)")
        p.add_argument("--block-upper-set-budget", type=int, help="Max upper sets enumerated per block")
        p.add_argument("--threshold-budget", type=int, help="Max orthant thresholds")
        p.add_argument("--workers", type=int, help="Worker threads")

    p = sub.add_parser("check", help="Run dependence checks on a JointDist file")
    p.add_argument("--dist", required=True)
    p.add_argument("--checks", default="nlod,nuod,nod,na", help=f"Comma list from {sorted(CHECKS)}")
    p.add_argument("--out")
    p.add_argument("--markdown")
    search_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("scenario", help="Run a catalog scenario")
    p.add_argument("--id", required=True, choices=sorted(SCENARIOS))
    p.add_argument("--seed", type=int, default=MC_DEFAULT_SEED)
    p.add_argument("--reps", type=int, default=MC_DEFAULT_REPS)
    p.add_argument("--out")
    p.add_argument("--markdown")
    search_flags(p)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("staged", help="Verify or sum a staged model")
    p.add_argument("action", choices=["verify", "sum"])
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.add_argument("--markdown")
    search_flags(p)
    p.set_defaults(func=cmd_staged)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, args.log_file)
    try:
        return args.func(args)
    except BudgetExceeded as e:
        logger.error(f"{e.budget_name} exceeded: {e}")
        return EXIT_ERROR
    except TourneyError as e:
        logger.error(str(e))
        return EXIT_ERROR
    except (OSError, ValueError, KeyError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
