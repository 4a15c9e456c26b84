"""Operator command line.

Journal-backed subcommands (ingest, settle, propose-pairs) replay the
configured journal, apply the operation, and append the resulting
events; optimize and simulate are pure functions of their input files;
serve runs the HTTP facade.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import fields

from .combinatorial import propose_pairs
from .config import ServiceConfig, load_config
from .errors import JournalCorruptError, ToxmarketError
from .optimizer import format_model, build_model, optimize_basket, parse_instance
from .simulator import SimConfig, format_metrics, run_session, shock_session
from .service import build_state, ingest_into_state, serve


def _euro(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    cents = abs(cents)
    return f"{sign}EUR {cents // 100:,}.{cents % 100:02d}"


def _load_service_config(args) -> ServiceConfig:
    return load_config(args.config)


def cmd_ingest(args) -> int:
    state = build_state(_load_service_config(args))
    with open(args.file, "rb") as fh:
        report = ingest_into_state(state, fh)
    print(f"accepted {report.accepted} record(s), rejected {report.rejected_count}")
    for rej in report.rejected:
        print(f"  line {rej.line}: {rej.reason}")
    return 0 if report.rejected_count == 0 else 1


def cmd_settle(args) -> int:
    state = build_state(_load_service_config(args))
    body = state.submit(
        {
            "type": "market_settled",
            "market_id": args.market_id,
            "announced_price_cents": args.announced_cents,
            "now": time.time(),
        }
    )
    print(f"market {body['market_id']} settled: {body['winning_outcome']} wins")
    for p in body["payouts"]:
        print(f"  {p['account_id']}: {_euro(p['payout_cents'])}")
    for joint_id in body["settled_joint_markets"]:
        print(f"  joint market {joint_id} settled")
    return 0


def cmd_propose_pairs(args) -> int:
    state = build_state(_load_service_config(args))
    pairs = propose_pairs(
        state.registry,
        state.exchange,
        radius_km=args.radius_km,
        max_pairs=args.max,
        book=state.book,
    )
    print("asset_a,asset_b,distance_km")
    for a, b, d in pairs:
        print(f"{a},{b},{d:.3f}")
    return 0


def cmd_optimize(args) -> int:
    with open(args.instance, "r", encoding="utf-8") as fh:
        instance = parse_instance(fh.read())
    if args.export_model:
        print(format_model(build_model(instance)), end="")
        return 0
    time_limit = None if args.time_limit_ms is None else args.time_limit_ms / 1000.0
    solution = optimize_basket(instance, time_limit=time_limit)
    print(f"proof: {solution.proof}")
    print(f"selected: {' '.join(map(str, solution.selected)) or '(none)'}")
    print(f"objective: {_euro(solution.objective_cents)}")
    print(f"spend: {_euro(solution.spend_cents)} of {_euro(instance.budget)}")
    if solution.bound_cents is not None:
        print(f"upper bound: {_euro(solution.bound_cents)}")
    return 0


def cmd_simulate(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    known = {f.name for f in fields(SimConfig)}
    unknown = set(raw) - known
    if unknown:
        print(f"unknown simulation config keys: {sorted(unknown)}", file=sys.stderr)
        return 2
    if "thresholds_cents" in raw:
        raw["thresholds_cents"] = tuple(raw["thresholds_cents"])
    if args.seed is not None:
        raw["seed"] = args.seed
    config = SimConfig(**raw)
    if args.shock_round is not None:
        if args.new_price is None:
            print("--shock-round needs --new-price", file=sys.stderr)
            return 2
        metrics = shock_session(config, args.shock_round, args.new_price)
    else:
        metrics = run_session(config)
    print(format_metrics(metrics), end="")
    return 0


def cmd_serve(args) -> int:
    serve(_load_service_config(args))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toxmarket",
        description="Prediction-market exchange for impaired-asset transfer prices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest an asset file into the journal-backed registry")
    p.add_argument("file")
    p.add_argument("--config", default=None, help="service config JSON")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("settle", help="resolve a halted market at the announced price")
    p.add_argument("market_id")
    p.add_argument("--announced-cents", type=int, required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(fn=cmd_settle)

    p = sub.add_parser("propose-pairs", help="suggest joint-market pairs by proximity")
    p.add_argument("--radius-km", type=float, required=True)
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(fn=cmd_propose_pairs)

    p = sub.add_parser("optimize", help="solve a basket instance file")
    p.add_argument("instance")
    p.add_argument("--time-limit-ms", type=int, default=None)
    p.add_argument("--export-model", action="store_true", help="print the MIP instead of solving")
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("simulate", help="run an agent-based session")
    p.add_argument("--config", required=True, help="simulation config JSON")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--shock-round", type=int, default=None)
    p.add_argument("--new-price", type=int, default=None)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", default=None)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except JournalCorruptError as exc:
        print(f"refusing to start: {exc}", file=sys.stderr)
        return 1
    except ToxmarketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
