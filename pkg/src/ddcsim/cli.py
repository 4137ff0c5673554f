"""Command-line front end: ``ddcsim gen``, ``ddcsim run`` and ``ddcsim report``.

Failures print one JSON object on stderr (``{"error": ..., "message": ...}``)
and exit nonzero: 2 for usage errors, 1 for everything else.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import PRESETS, load_scenario
from .errors import DdcError, SchemaError
from .schedulers import ALGORITHMS
from .simengine import METRICS_SCHEMA, run
from .workload import SyntheticSpec, gen_synthetic, load_trace, take_prefix, write_trace

SUMMARY_COLUMNS = (
    "algorithm", "workload", "total_requests", "placed_count", "dropped_count",
    "inter_rack_count", "inter_rack_pct", "util_cpu", "util_ram", "util_sto",
    "net_util_intra", "net_util_inter", "switch_energy_j", "transceiver_energy_j",
    "total_energy_j", "average_power_w", "avg_cpu_ram_rtt_ns", "scheduler_seconds",
)

_REQUIRED = ("algorithm", "total_requests", "placed_count", "dropped_count",
             "inter_rack_count", "avg_cpu_ram_rtt_ns", "utilization",
             "network_utilization", "energy", "scheduler_seconds")


class UsageError(DdcError):
    pass


def _fail(kind, message, code):
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ddcsim", description="Disaggregated datacenter VM placement simulator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def synthetic_flags(sp):
        sp.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
        sp.add_argument("--count", type=int, default=SyntheticSpec.vm_count,
                        help="synthetic VM count (default 2500)")

    g = sub.add_parser("gen", help="write a synthetic workload CSV")
    synthetic_flags(g)
    g.add_argument("--out", required=True, help="output CSV path")

    r = sub.add_parser("run", help="simulate one or more algorithms")
    src = r.add_mutually_exclusive_group()
    src.add_argument("--config", help="JSON config file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="named configuration")
    r.add_argument("--algo", action="append", dest="algos", metavar="NAME",
                   help=f"algorithm, repeatable ({', '.join(ALGORITHMS)}; default all)")
    r.add_argument("--workload", help="trace CSV (default: synthetic)")
    r.add_argument("--take", type=int, help="use only the first N requests")
    synthetic_flags(r)
    r.add_argument("--time-unit-seconds", type=float,
                   help="seconds per simulation time unit (overrides config)")
    r.add_argument("--out", default="ddcsim-out", help="output directory")
    r.add_argument("--jobs", type=int, default=1, help="algorithms run in parallel")
    r.add_argument("--no-timing", action="store_true",
                   help="omit wall-clock scheduler time so outputs are byte-reproducible")
    r.add_argument("--check", action="store_true", help="verify conservation after every event")

    rep = sub.add_parser("report", help="merge metrics JSON files into one CSV table")
    rep.add_argument("metrics", nargs="+", help="metrics JSON files")
    rep.add_argument("--out", help="output CSV (default stdout)")
    return p


def _algorithms(names):
    names = names or list(ALGORITHMS)
    out = []
    for name in names:
        key = name.strip().lower()
        if key not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {name!r}; valid names: {', '.join(ALGORITHMS)}")
        if key not in out:
            out.append(key)
    return out


def _workload(args, scenario):
    if args.workload:
        requests = load_trace(args.workload, scenario.config)
        name = Path(args.workload).name
    else:
        requests = gen_synthetic(SyntheticSpec(vm_count=args.count, rng_seed=args.seed))
        name = f"synthetic-{args.count}-seed{args.seed}"
    if args.take is not None:
        if args.take < 0:
            raise UsageError("--take must be >= 0")
        requests = take_prefix(requests, args.take)
        name += f"-take{args.take}"
    return requests, name


def summary_row(doc: dict) -> dict:
    placed = doc["placed_count"]
    util, net, energy = doc["utilization"], doc["network_utilization"], doc["energy"]
    return {
        "algorithm": doc["algorithm"],
        "workload": doc.get("workload", ""),
        "total_requests": doc["total_requests"],
        "placed_count": placed,
        "dropped_count": doc["dropped_count"],
        "inter_rack_count": doc["inter_rack_count"],
        "inter_rack_pct": 100.0 * doc["inter_rack_count"] / placed if placed else 0.0,
        "util_cpu": util["CPU"],
        "util_ram": util["RAM"],
        "util_sto": util["STO"],
        "net_util_intra": net["intra"],
        "net_util_inter": net["inter"],
        "switch_energy_j": energy["switch_energy_j"],
        "transceiver_energy_j": energy["transceiver_energy_j"],
        "total_energy_j": energy["total_j"],
        "average_power_w": energy["average_power_w"],
        "avg_cpu_ram_rtt_ns": "" if doc["avg_cpu_ram_rtt_ns"] is None else doc["avg_cpu_ram_rtt_ns"],
        "scheduler_seconds": "" if doc["scheduler_seconds"] is None else doc["scheduler_seconds"],
    }


def summary_csv(docs) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for doc in docs:
        writer.writerow(summary_row(doc))
    return buf.getvalue()


def cmd_gen(args) -> int:
    if args.count < 0:
        raise UsageError("--count must be >= 0")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trace(gen_synthetic(SyntheticSpec(vm_count=args.count, rng_seed=args.seed)), out)
    print(out)
    return 0


def cmd_run(args) -> int:
    algos = _algorithms(args.algos)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    scenario = load_scenario(args.config, args.preset)
    if args.time_unit_seconds is not None:
        if args.time_unit_seconds <= 0:
            raise UsageError("--time-unit-seconds must be > 0")
        scenario = replace(scenario, energy=replace(scenario.energy,
                                                    time_unit_seconds=args.time_unit_seconds))
    requests, name = _workload(args, scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def one(algo):
        return run(scenario, algo, requests, check_invariants=args.check, workload_name=name)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(one, algos))

    docs = []
    for algo, result in zip(algos, results):
        if args.no_timing:
            result.metrics.scheduler_seconds = None
        doc = result.metrics.to_dict()
        docs.append(doc)
        (out / f"metrics_{algo}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        (out / f"placements_{algo}.csv").write_text(result.log_csv())
    (out / "summary.csv").write_text(summary_csv(docs))
    sys.stdout.write(summary_csv(docs))
    return 0


def read_metrics(path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise SchemaError(path, f"cannot read: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(path, f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema") != METRICS_SCHEMA:
        raise SchemaError(path, f"not a {METRICS_SCHEMA} document")
    missing = [k for k in _REQUIRED if k not in doc]
    if missing:
        raise SchemaError(path, f"missing keys {missing}")
    return doc


def cmd_report(args) -> int:
    text = summary_csv(read_metrics(p) for p in args.metrics)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "report": cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except DdcError as exc:
        return _fail(type(exc).__name__, str(exc), 1)
    except OSError as exc:
        return _fail("io", f"{exc.filename or ''}: {exc.strerror or exc}", 1)


if __name__ == "__main__":
    sys.exit(main())
