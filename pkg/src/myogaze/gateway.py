"""Command line entry points.

    myogaze sim    --protocol p.json --agent a.json --seed 7 --out log.jsonl
    myogaze stats  log.jsonl [log2.jsonl ...] [--csv rows.csv]
    myogaze replay inputs.jsonl --out events.jsonl
    myogaze serve  [--port N] [--logdir DIR] [--ui-dir DIR]

`sim` runs a whole scripted session headlessly and prints the metrics
summary. `stats` prints metrics per log; with two logs it runs a Wilcoxon
signed-rank test on paired per-trial times, with three or more a Friedman
test plus Bonferroni-adjusted pairwise comparisons. `replay` re-runs a
recorded live-session input trace. `serve` hosts live sessions and the
browser UI.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import analysis, service, wire
from .runner import AgentConfig, Mode, ProtocolConfig, run_session

DEFAULT_PORT = 8765
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


def _load_json(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc.msg}") from exc


def _build_configs(args) -> tuple[ProtocolConfig, AgentConfig]:
    try:
        protocol = (
            ProtocolConfig.from_json(_load_json(args.protocol))
            if args.protocol
            else ProtocolConfig()
        )
        agent = (
            AgentConfig.from_json(_load_json(args.agent))
            if args.agent
            else AgentConfig()
        )
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.blocks is not None:
            overrides["blocks"] = args.blocks
        if args.mode is not None:
            overrides["mode"] = Mode(args.mode)
        if overrides:
            protocol = ProtocolConfig.from_json({**protocol.to_json(), **{
                k: (v.value if isinstance(v, Mode) else v) for k, v in overrides.items()
            }})
        if args.seed is not None:
            agent = AgentConfig.from_json({**agent.to_json(), "seed": args.seed})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return protocol, agent


def cmd_sim(args) -> int:
    try:
        protocol, agent = _build_configs(args)
        meta, records = run_session(protocol, agent)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    tmp = out.with_suffix(out.suffix + ".tmp")
    wire.write_log(tmp, records, meta)
    tmp.replace(out)  # no partial logs on failure
    report = analysis.compute_metrics(records, protocol.mode)
    print(report.to_text())
    print(f"log written: {out} ({len(records)} events)")
    return 0


def _read_log(path: str) -> tuple[dict, list[wire.EventRecord]]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"log file not found: {path}")
    try:
        return wire.read_log(p)
    except wire.LogError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _mode_of(meta: dict) -> Mode:
    try:
        return Mode(meta["protocol"]["mode"])
    except (KeyError, ValueError):
        return Mode.TRANSPORT


def cmd_stats(args) -> int:
    try:
        logs = [_read_log(p) for p in args.logs]
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    for path, (meta, records) in zip(args.logs, logs):
        report = analysis.compute_metrics(records, _mode_of(meta))
        print(f"== {path}")
        print(report.to_text())
        print()

    if args.csv:
        meta, records = logs[0]
        report = analysis.compute_metrics(records, _mode_of(meta))
        with open(args.csv, "w", newline="") as fh:
            csv.writer(fh).writerows(report.csv_rows())
        print(f"per-trial rows written: {args.csv}")

    if args.json:
        doc = {
            path: analysis.compute_metrics(records, _mode_of(meta)).to_json()
            for path, (meta, records) in zip(args.logs, logs)
        }
        Path(args.json).write_text(json.dumps(doc, indent=2) + "\n")
        print(f"reports written: {args.json}")

    if len(logs) >= 2:
        durations = [analysis.trial_durations(records) for _, records in logs]
        counts = {len(d) for d in durations}
        if len(counts) != 1:
            print(
                f"error: paired tests need equal trial counts, got {sorted(counts)}",
                file=sys.stderr,
            )
            return EXIT_CONFIG
        if len(logs) == 2:
            try:
                res = analysis.wilcoxon_signed_rank(durations[0], durations[1])
            except ValueError as exc:
                print(f"wilcoxon: not applicable ({exc})")
                return 0
            print(
                f"wilcoxon signed-rank on paired trial durations: "
                f"W={res.statistic:.1f} p={res.p_value:.4g} n={res.n} [{res.method}]"
            )
        else:
            res = analysis.friedman(durations)
            print(
                f"friedman on paired trial durations: chi2={res.statistic:.3f} "
                f"p={res.p_value:.4g} (k={len(logs)}, n={res.n})"
            )
            pairs = []
            raw = []
            for i in range(len(logs)):
                for j in range(i + 1, len(logs)):
                    try:
                        r = analysis.wilcoxon_signed_rank(durations[i], durations[j])
                        raw.append(r.p_value)
                        pairs.append((i, j, r))
                    except ValueError:
                        pass
            if pairs:
                adjusted = analysis.bonferroni(raw, m=len(raw))
                for (i, j, r), p_adj in zip(pairs, adjusted):
                    print(
                        f"  {args.logs[i]} vs {args.logs[j]}: "
                        f"p={r.p_value:.4g} p_adj={p_adj:.4g}"
                    )
    return 0


def cmd_replay(args) -> int:
    try:
        lines = service.load_trace(args.trace)
        meta, records = service.replay_trace(lines)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    wire.write_log(args.out, records, meta)
    print(f"replayed {args.trace} -> {args.out} ({len(records)} events)")
    return 0


def cmd_serve(args) -> int:
    service.serve(port=args.port, logdir=args.logdir, ui_dir=args.ui_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="myogaze", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("sim", help="run a scripted session headlessly")
    p_sim.add_argument("--protocol", help="protocol config JSON")
    p_sim.add_argument("--agent", help="agent config JSON")
    p_sim.add_argument("--seed", type=int, help="override both seeds")
    p_sim.add_argument("--blocks", type=int, help="override block count")
    p_sim.add_argument("--mode", choices=[m.value for m in Mode])
    p_sim.add_argument("--out", default="log.jsonl", help="output event log")
    p_sim.set_defaults(func=cmd_sim)

    p_stats = sub.add_parser("stats", help="metrics and significance tests")
    p_stats.add_argument("logs", nargs="+", help="event log files")
    p_stats.add_argument("--csv", help="write per-trial rows to CSV")
    p_stats.add_argument("--json", help="write full reports to JSON")
    p_stats.set_defaults(func=cmd_stats)

    p_replay = sub.add_parser("replay", help="re-run a recorded input trace")
    p_replay.add_argument("trace", help="inputs.jsonl from a live session")
    p_replay.add_argument("--out", default="replayed.jsonl")
    p_replay.set_defaults(func=cmd_replay)

    p_serve = sub.add_parser("serve", help="host live sessions and the UI")
    p_serve.add_argument(
        "--port", type=int,
        default=int(os.environ.get("MYOGAZE_PORT", DEFAULT_PORT)),
    )
    p_serve.add_argument("--logdir", default="sessions")
    p_serve.add_argument(
        "--ui-dir", default="frontend" if Path("frontend").is_dir() else None,
    )
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
