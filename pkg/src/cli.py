"""Command-line front end.

    chunksim sim       replay a scenario (or a generated workload), write a report
    chunksim attack    build and replay an attack scenario, print the verdict
    chunksim overhead  print the storage overhead breakdown
    chunksim compare   replay one trace on every LLC model, write a side-by-side table
    chunksim suite     run the fuzzed non-interference suite on one model

Exit codes: 0 success, 1 verdict FAIL, 2 usage error, 3 IO error,
4 configuration or simulation error. Diagnostics go to stderr as one line;
reports go to files under the output directory (``--out``, else the
CHUNKSIM_OUT_DIR environment variable, else ``results``).
"""

import argparse
import logging
import os
import sys
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any

import pandas as pd
import yaml
from pydantic import ValidationError

from src.analysis.overhead import storage_overhead
from src.analysis.report import emit_report, format_overhead
from src.analysis.stats import phase_misses
from src.config import load_simulator_config, published_config
from src.models.errors import SimulationError, UsageError
from src.models.parameters import (
    NID,
    IsolationMode,
    LlcModelKind,
    RunConfig,
    SimulatorConfig,
    WorkloadKind,
    WorkloadSpec,
)
from src.models.results import OverheadBreakdown
from src.simulation.engine import RunResult, run_scenario
from src.simulation.security import (
    ATTACKER_DID,
    VICTIM_DID,
    differential_replay,
    run_noninterference_suite,
)
from src.workloads.attacks import build_occupancy_probe, build_prime_probe, occupancy_victim
from src.workloads.generators import gen
from src.workloads.scenario import Register, ScenarioEvent, Switch, parse_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_ERROR = 4

OUT_DIR_ENV = "CHUNKSIM_OUT_DIR"
DEFAULT_OUT_DIR = "results"


def _override(text: str) -> tuple[str, Any]:
    key, sep, value = text.partition("=")
    if not sep or "." not in key:
        raise argparse.ArgumentTypeError(f"expected section.key=value, got {text!r}")
    return key, yaml.safe_load(value)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="Simulator configuration YAML")
    parser.add_argument(
        "--set", dest="overrides", type=_override, action="append", default=[],
        metavar="SECTION.KEY=VALUE", help="Override one configuration value",
    )
    parser.add_argument(
        "--llc", choices=[k.value for k in LlcModelKind], help="LLC model to simulate"
    )
    parser.add_argument("--seed", type=int, help="Run seed (default from the configuration)")
    parser.add_argument("--out", type=Path, help=f"Output directory (env {OUT_DIR_ENV})")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chunksim",
        description="Trace-driven simulator of a chunked last-level cache for TEEs",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="Replay a scenario and write a report")
    _common(sim)
    sim.add_argument("--scenario", type=Path, help="Scenario file to replay")
    sim.add_argument(
        "--generate", choices=[k.value for k in WorkloadKind],
        help="Generate a synthetic workload instead of reading a scenario",
    )
    sim.add_argument("--length", type=int, default=10000)
    sim.add_argument("--footprint", type=int, default=1024)
    sim.add_argument("--did", type=int, default=NID, help="Domain running the workload")

    attack = sub.add_parser("attack", help="Replay an attack and print the verdict")
    _common(attack)
    attack.add_argument("--kind", choices=["prime-probe", "occupancy"], default="prime-probe")
    attack.add_argument("--target-index", type=int, default=0)
    attack.add_argument("--footprint", type=int, default=32, help="Occupancy victim lines")

    overhead = sub.add_parser("overhead", help="Print the storage overhead breakdown")
    overhead.add_argument("--config", type=Path)
    overhead.add_argument(
        "--published-config", "--paper-config", action="store_true",
        help="Use the bundled 16 MB / 16-way setup",
    )
    overhead.add_argument("--domains", type=int, help="Override max_domains")
    overhead.add_argument("--did-bits", type=int, help="Override the DID tag width")

    compare = sub.add_parser("compare", help="Replay one trace on every LLC model")
    _common(compare)
    compare.add_argument("--scenario", type=Path)
    compare.add_argument("--generate", choices=[k.value for k in WorkloadKind])
    compare.add_argument("--length", type=int, default=10000)
    compare.add_argument("--footprint", type=int, default=1024)
    compare.add_argument("--did", type=int, default=NID)

    suite = sub.add_parser("suite", help="Run the fuzzed non-interference suite")
    suite.add_argument("--llc", choices=[k.value for k in LlcModelKind], default="chunked")
    suite.add_argument("--scenarios", type=int, default=1000)
    suite.add_argument("--seed", type=int, default=20240101)
    return parser


def _load_config(args: argparse.Namespace) -> SimulatorConfig:
    overrides = dict(args.overrides)
    if args.seed is not None:
        overrides["run.seed"] = args.seed
    if args.llc is not None:
        overrides["run.llc_model"] = args.llc
    return load_simulator_config(args.config, overrides)


def _out_dir(args: argparse.Namespace) -> Path:
    return Path(args.out or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)


def _run_config(args: argparse.Namespace, config: SimulatorConfig) -> RunConfig:
    workload = None
    if args.generate is not None:
        workload = WorkloadSpec(
            kind=WorkloadKind(args.generate),
            length=args.length,
            seed=config.seed,
            footprint=args.footprint,
        )
    elif args.scenario is None:
        raise UsageError("either --scenario or --generate is required")
    return RunConfig(
        config_path=args.config,
        scenario_path=args.scenario if workload is None else None,
        workload=workload,
        llc_model=config.llc_model,
        seed=config.seed,
        out_dir=_out_dir(args),
        workload_did=args.did,
    )


def _events(run: RunConfig, config: SimulatorConfig) -> list[ScenarioEvent]:
    if run.workload is None:
        assert run.scenario_path is not None
        parsed = parse_scenario(run.scenario_path.read_text())
        logger.info("loaded %d events from %s", len(parsed), run.scenario_path)
        return parsed
    events: list[ScenarioEvent] = []
    if run.workload_did != NID:
        events.append(Register(run.workload_did, IsolationMode.EXCLUSIVE))
        events.append(Switch(0, run.workload_did))
    events += gen(run.workload, run.workload_did, 0, config.llc.line_size_bytes)
    return events


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def _overhead(config: SimulatorConfig, model: str) -> OverheadBreakdown | None:
    # CST, EC-TABLE and tag extension only exist on the chunked controller
    return storage_overhead(config.controller) if model == LlcModelKind.CHUNKED.value else None


def cmd_sim(args: argparse.Namespace) -> int:
    config = _load_config(args)
    run = _run_config(args, config)
    result = run_scenario(config, _events(run, config), run.llc_model)
    text = emit_report(
        result.stats, args.format, model=result.model, overhead=_overhead(config, result.model)
    )
    path = _write(run.out_dir, f"sim_{result.model}.{args.format}", text)
    print(path)
    return EXIT_OK


def cmd_attack(args: argparse.Namespace) -> int:
    config = _load_config(args)
    geometry = config.llc
    if args.kind == "prime-probe":
        events = build_prime_probe(
            ATTACKER_DID, VICTIM_DID, args.target_index,
            num_sets=geometry.num_sets, ways=geometry.ways,
            line_size=geometry.line_size_bytes,
        )
    else:
        events = build_occupancy_probe(
            ATTACKER_DID, occupancy_victim(args.footprint, geometry.num_sets, config.seed),
            victim_did=VICTIM_DID, num_sets=geometry.num_sets, ways=geometry.ways,
            line_size=geometry.line_size_bytes,
        )
    verdict, with_victim, without_victim = differential_replay(
        config, events, ATTACKER_DID, VICTIM_DID, config.llc_model, private_caches=None
    )
    delta = phase_misses(with_victim.stats, "probe", ATTACKER_DID) - phase_misses(
        without_victim.stats, "probe", ATTACKER_DID
    )
    line = f"{args.kind} on {config.llc_model.value}: {verdict.label} (probe miss delta {delta})"
    if not verdict.passed:
        line += (
            f"; first divergence at attacker access {verdict.index}: "
            f"{verdict.with_value} vs {verdict.without_value}"
        )
    print(line)
    if args.out is not None or os.environ.get(OUT_DIR_ENV):
        text = emit_report(
            with_victim.stats, args.format, model=with_victim.model,
            overhead=_overhead(config, with_victim.model),
        )
        _write(_out_dir(args), f"attack_{args.kind}_{with_victim.model}.{args.format}", text)
    return EXIT_OK if verdict.passed else EXIT_FAIL


def cmd_overhead(args: argparse.Namespace) -> int:
    if args.published_config or args.config is None:
        config = published_config()
    else:
        config = load_simulator_config(args.config)
    controller = config.controller
    if args.did_bits is not None:
        controller = replace(
            controller, geometry=replace(controller.geometry, did_bits=args.did_bits)
        )
    if args.domains is not None:
        controller = replace(controller, max_domains=args.domains)
    title = f"Storage overhead ({controller.max_domains} domains)"
    print(format_overhead(storage_overhead(controller), title), end="")
    return EXIT_OK


def _compare_table(results: list[RunResult]) -> pd.DataFrame:
    rows = [
        {
            "model": result.model,
            "did": d.did,
            "llc_miss_rate": d.level("L3").miss_rate,
            "amat": d.cycles / d.accesses if d.accesses else 0.0,
        }
        for result in results
        for d in result.stats.domains
    ]
    frame = pd.DataFrame(rows, columns=["model", "did", "llc_miss_rate", "amat"])
    table = frame.pivot(index="did", columns="model", values=["llc_miss_rate", "amat"])
    table.columns = [f"{value}_{model}" for value, model in table.columns]
    return table.sort_index(axis=1)


def cmd_compare(args: argparse.Namespace) -> int:
    config = _load_config(args)
    run = _run_config(args, config)
    events = _events(run, config)
    models = sorted(k.value for k in LlcModelKind)
    with ThreadPoolExecutor(max_workers=len(models)) as pool:
        results = list(pool.map(lambda m: run_scenario(config, events, m), models))
    table = _compare_table(results)
    text = table.to_csv(float_format="%.6f", lineterminator="\n")
    path = _write(run.out_dir, "compare.csv", text)
    print(text, end="")
    print(format_overhead(storage_overhead(config.controller), "Chunked storage overhead"), end="")
    logger.info("wrote %s", path)
    return EXIT_OK


def cmd_suite(args: argparse.Namespace) -> int:
    report = run_noninterference_suite(args.llc, args.scenarios, args.seed)
    print(
        f"{report.model}: {report.passed}/{report.scenarios} PASS, "
        f"{report.contended} contended, {report.contended_failed} contended FAIL "
        f"({report.contended_fail_rate:.2%})"
    )
    for number, channel, verdict in report.failures:
        print(f"  scenario {number} ({channel}): FAIL at {verdict.index}")
    return EXIT_OK if report.all_passed else EXIT_FAIL


_COMMANDS = {
    "sim": cmd_sim,
    "attack": cmd_attack,
    "overhead": cmd_overhead,
    "compare": cmd_compare,
    "suite": cmd_suite,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=(logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"chunksim: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"chunksim: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SimulationError, ValidationError, yaml.YAMLError) as exc:
        message = str(exc).splitlines()[0]
        print(f"chunksim: {type(exc).__name__}: {message}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
