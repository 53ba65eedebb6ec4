"""Command-line entry point: run / check / gap / verify."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .checkers import check_adaptive, check_policy_adaptive, check_policywise
from .experiments import (
    ExperimentConfig,
    run_experiment,
    write_results_csv,
    write_summary_csv,
)
from .instance_io import load_instance, policy_to_obj
from .sampling import BernoulliSampling, sampling_gap
from .verification import SCOPES, run_verify

CHECKERS = {
    "adaptive": check_adaptive,
    "policy-adaptive": check_policy_adaptive,
    "policywise": check_policywise,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adsub")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a sampling-rate sweep from a config file")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--out", required=True)
    run_p.add_argument("--summary-out", default=None)
    run_p.add_argument("--workers", type=int, default=None)
    run_p.add_argument("--edge-prob", type=float, default=None,
                       help="override the default propagation probability of edge-list instances")
    run_p.add_argument("--k", type=int, default=None, help="override the seed budget k")
    run_p.add_argument(
        "--timings",
        action="store_true",
        help="record real wall times per row (off by default so reruns are byte-identical)",
    )

    check_p = sub.add_parser("check", help="check a submodularity class on an instance file")
    check_p.add_argument("--instance", required=True)
    check_p.add_argument(
        "--class", dest="cls", required=True, choices=sorted(CHECKERS)
    )

    gap_p = sub.add_parser("gap", help="sampling-gap report for an instance file")
    gap_p.add_argument("--instance", required=True)
    gap_p.add_argument("--rate", type=float, required=True)
    mode = gap_p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--mc", type=int, default=None, metavar="TRIALS")
    gap_p.add_argument("--seed", type=int, default=0)

    verify_p = sub.add_parser("verify", help="run the built-in verification batches")
    verify_p.add_argument("--scope", choices=SCOPES, default="all")
    return parser


def _cmd_run(args) -> int:
    raw = json.loads(Path(args.config).read_text())
    if args.edge_prob is not None:
        raw.setdefault("instance", {})["edge_prob"] = args.edge_prob
    if args.k is not None:
        raw["k"] = args.k
    cfg = ExperimentConfig.from_dict(raw)
    rows, summaries = run_experiment(cfg, workers=args.workers, timings=args.timings)
    mode = rows[0].mode if rows else "exact"
    write_results_csv(args.out, rows, metadata={"config": cfg.to_dict(), "mode": mode})
    summary_path = args.summary_out or (str(args.out) + ".summary.csv")
    write_summary_csv(summary_path, summaries)
    _persist_id_map(cfg, args.out)
    print(f"wrote {len(rows)} rows to {args.out} (mode={mode}); summary at {summary_path}")
    return 0


def _persist_id_map(cfg: ExperimentConfig, out_path) -> None:
    """Edge-list nodes are compacted to dense ids; keep the mapping next to
    the results so rows can be traced back to the original node labels."""
    if cfg.instance.get("kind") != "edge-list":
        return
    from .experiments import build_context

    ctx = build_context(cfg)
    graph = ctx.graph if ctx.graph is not None else getattr(ctx.instance.utility, "graph", None)
    if graph is None or graph.id_map is None:
        return
    path = Path(str(out_path) + ".idmap.json")
    path.write_text(json.dumps({orig: dense for orig, dense in graph.id_map}, indent=2) + "\n")


def _cmd_check(args) -> int:
    inst = load_instance(args.instance)
    report = CHECKERS[args.cls](inst)
    payload = {"class": args.cls, "holds": report.holds, "comparisons": report.comparisons}
    if report.witness is not None:
        w = report.witness
        payload["witness"] = {
            "psi_a": list(w.psi_a.observations),
            "psi_b": list(w.psi_b.observations),
            "lhs": w.lhs,
            "rhs": w.rhs,
        }
        if w.item is not None:
            payload["witness"]["item"] = w.item
        if w.policy is not None:
            payload["witness"]["policy"] = policy_to_obj(w.policy)
    print(json.dumps(payload, indent=2))
    return 0 if report.holds else 1


def _cmd_gap(args) -> int:
    inst = load_instance(args.instance)
    dist = BernoulliSampling(n=inst.n, rate=args.rate)
    if args.mc is not None:
        report = sampling_gap(inst, dist, mode="mc", trials=args.mc, seed=args.seed)
    else:
        report = sampling_gap(inst, dist, mode="exact")
    payload = {
        "rate": report.rate,
        "full_value": report.full_value,
        "expected_sampled_value": report.expected_sampled_value,
        "gap": report.gap,
        "bound_rhs": report.bound_rhs,
        "degenerate": report.degenerate,
        "mode": report.mode,
    }
    print(json.dumps(payload, indent=2))
    if report.degenerate:
        print(f"rate {report.rate}: sampled optimum is not positive; gap undefined")
    else:
        print(
            f"rate {report.rate}: full {report.full_value:.6g}, sampled "
            f"{report.expected_sampled_value:.6g}, gap {report.gap:.6g} "
            f"(bound rhs {report.bound_rhs:.6g})"
        )
    return 0


def _cmd_verify(args) -> int:
    lines = run_verify(args.scope)
    failed = 0
    for line in lines:
        status = "PASS" if line.passed else "FAIL"
        detail = f"  ({line.detail})" if line.detail else ""
        print(f"[{status}] {line.name}{detail}")
        if not line.passed:
            failed += 1
    print(f"{len(lines) - failed}/{len(lines)} checks passed")
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "check":
        return _cmd_check(args)
    if args.command == "gap":
        return _cmd_gap(args)
    if args.command == "verify":
        return _cmd_verify(args)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
