"""Command-line pipeline: tracks -> events -> logs -> cycles -> network -> rankings."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import eventlog, events, procnet, ranking, sim
from .errors import ConvergenceError, DataError, TrackmineError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4

# the two worked link matrices used by the `tables` subcommand
BUILTIN_MATRICES = {
    "L0": np.array(
        [
            [1.01, 0.01, 0.00],
            [0.01, 1.00, 0.00],
            [0.00, 0.00, 0.90],
        ]
    ),
    "L1": np.array(
        [
            [1.01, 0.01, 0.00, 0.01],
            [0.01, 1.00, 0.00, 0.02],
            [0.00, 0.00, 0.90, 1.00],
            [0.01, 0.01, 0.02, 0.05],
        ]
    ),
}


def _builtin_lm(name: str) -> procnet.LinkMatrix:
    values = BUILTIN_MATRICES[name]
    labels = [procnet.NodeLabel("x", str(i + 1)) for i in range(values.shape[0])]
    return procnet.LinkMatrix(labels=labels, values=values)


def write_atomic(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_log(path: str) -> eventlog.EventLog:
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".jsonl"):
        return eventlog.log_from_jsonl(text)
    return eventlog.parse_log(text)


def _write_log(path: str, log: eventlog.EventLog) -> None:
    if path.endswith(".jsonl"):
        write_atomic(path, eventlog.log_to_jsonl(log))
    else:
        write_atomic(path, eventlog.serialize_log(log))


def _detection_config(args) -> events.DetectionConfig:
    return events.DetectionConfig(
        min_duration=args.min_duration,
        min_overlap_ratio=args.min_overlap_ratio,
        sample_period=args.sample_period,
        dedup_window=args.dedup_window,
    )


def _add_detection_flags(p):
    p.add_argument("--min-duration", type=float, default=3.0, dest="min_duration")
    p.add_argument("--min-overlap-ratio", type=float, default=0.10, dest="min_overlap_ratio")
    p.add_argument("--sample-period", type=float, default=1.0, dest="sample_period")
    p.add_argument("--dedup-window", type=float, default=2.0, dest="dedup_window")


def _cycles_from_args(args, log):
    if args.boundaries:
        bounds = [eventlog.to_datetime(events.parse_time(b)) for b in args.boundaries.split(",")]
        return eventlog.segment_cycles(log, boundaries=bounds)
    if args.anchor:
        return eventlog.segment_cycles(log, anchor=args.anchor)
    raise DataError("either --anchor or --boundaries is required")


def _report_json(ranked, result, stats):
    return {
        "algorithm": result.algorithm,
        "alpha": result.alpha,
        "kind": result.matrix_kind,
        "convention": result.convention,
        "scores": [{"node": lbl.render(), "value": value} for lbl, value in ranked],
        "entropy": stats.shannon_entropy,
        "participation_ratio": stats.participation_ratio,
        "iterations": result.iterations,
    }


# ---------------------------------------------------------------------------
# subcommands

def cmd_detect(args) -> int:
    cfg = _detection_config(args)
    samples = events.load_tracks_csv(args.tracks)
    zones = events.load_zones_json(args.zones)
    by_camera = {}
    for z in zones:
        by_camera.setdefault(z.camera_id, []).append(z)
    streams = []
    for cam in sorted(by_camera):
        cam_samples = [s for s in samples if s.camera_id == cam]
        streams.append(events.detect_events(cam_samples, by_camera[cam], cfg))
    occurrences = events.merge_camera_streams(streams, cfg.dedup_window)
    if args.out.endswith(".csv"):
        events.write_occurrences_csv(args.out, occurrences)
    else:
        _write_log(args.out, eventlog.occurrences_to_log(occurrences, label=args.label))
    if args.json:
        json.dump({"occurrences": len(occurrences), "out": args.out}, sys.stdout)
        print()
    return EXIT_OK


def cmd_merge(args) -> int:
    streams = [events.load_occurrences_csv(p) for p in args.inputs]
    merged = events.merge_camera_streams(streams, args.dedup_window)
    events.write_occurrences_csv(args.out, merged)
    if args.json:
        json.dump({"occurrences": len(merged), "out": args.out}, sys.stdout)
        print()
    return EXIT_OK


def cmd_gantt(args) -> int:
    log = _read_log(args.log)
    svg = eventlog.gantt(log, lane_key=args.lane_key)
    write_atomic(args.out, svg)
    if args.json:
        json.dump({"out": args.out, "lanes": svg.count("text-anchor=\"end\"")}, sys.stdout)
        print()
    return EXIT_OK


def cmd_cycles(args) -> int:
    log = _read_log(args.log)
    cycles = _cycles_from_args(args, log)
    payload = [
        {"index": c.index, "records": len(c.records), "cycle_time": c.cycle_time}
        for c in cycles
    ]
    json.dump({"label": log.label, "cycles": payload}, sys.stdout, indent=None if args.json else 2)
    print()
    return EXIT_OK


def cmd_dfg(args) -> int:
    log = _read_log(args.log)
    cycles = _cycles_from_args(args, log)
    try:
        cycle = next(c for c in cycles if c.index == args.cycle)
    except StopIteration:
        raise DataError(f"no cycle with index {args.cycle}; found {len(cycles)} cycles")
    net = procnet.build_dfg(cycle)
    lm = procnet.link_matrix(net)
    if args.out_matrix:
        write_atomic(args.out_matrix, procnet.matrix_to_csv(lm))
    if args.out_dot:
        write_atomic(args.out_dot, procnet.network_to_dot(net))
    if args.json:
        json.dump(
            {
                "cycle": cycle.index,
                "nodes": [lbl.render() for lbl in net.nodes],
                "edges": len(net.edges),
                "events": sum(net.activities.values()),
            },
            sys.stdout,
        )
        print()
    return EXIT_OK


def cmd_rank(args) -> int:
    if args.matrix:
        with open(args.matrix) as fh:
            lm = procnet.matrix_from_csv(fh.read())
    else:
        log = _read_log(args.log)
        cycles = _cycles_from_args(args, log)
        try:
            cycle = next(c for c in cycles if c.index == args.cycle)
        except StopIteration:
            raise DataError(f"no cycle with index {args.cycle}")
        lm = procnet.link_matrix(procnet.build_dfg(cycle))
    ranked, result, stats = ranking.rank_nodes(
        lm,
        algorithm=args.algorithm,
        kind=args.kind,
        alpha=args.alpha,
        convention=args.convention,
        k=args.k,
    )
    report = _report_json(ranked, result, stats)
    if args.out:
        write_atomic(args.out, json.dumps(report, indent=2) + "\n")
    if args.json or not args.out:
        json.dump(report, sys.stdout)
        print()
    return EXIT_OK


def _read_node_list(path: str) -> list[str]:
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        data = json.loads(text)
        if isinstance(data, dict) and "scores" in data:
            return [entry["node"] for entry in data["scores"]]
        return [str(x) for x in data]
    return [line.strip() for line in text.splitlines() if line.strip()]


def cmd_compare(args) -> int:
    a = _read_node_list(args.a)
    b = _read_node_list(args.b)
    result = ranking.compare_topk(a, b, args.k)
    json.dump(
        {
            "common": sorted(result["common"]),
            "only_a": sorted(result["only_a"]),
            "only_b": sorted(result["only_b"]),
            "jaccard": result["jaccard"],
        },
        sys.stdout,
    )
    print()
    return EXIT_OK


def cmd_precision(args) -> int:
    detected = events.load_occurrences_csv(args.detected)
    truth = events.load_occurrences_csv(args.truth)
    value = eventlog.precision(detected, truth, args.window)
    json.dump({"precision": value, "detected": len(detected), "truth": len(truth)}, sys.stdout)
    print()
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = sim.scenario_from_json(args.scenario)
    if args.seed is not None:
        sc.seed = args.seed
    samples, truth = sim.simulate(sc, min_duration=args.min_duration)
    lines = ["camera_id,time,entity_class,track_id,x,y,w,h"]
    for s in samples:
        lines.append(
            f"{s.camera_id},{s.time!r},{s.entity_class},{s.track_id},"
            f"{s.box.x!r},{s.box.y!r},{s.box.w!r},{s.box.h!r}"
        )
    write_atomic(args.out_tracks, "\n".join(lines) + "\n")
    events.write_occurrences_csv(args.out_truth, truth)
    zones = {}
    for z in sc.zones:
        zones.setdefault(
            (z.location_id, z.camera_id),
            {
                "location_id": z.location_id,
                "camera_id": z.camera_id,
                "x": z.box.x,
                "y": z.box.y,
                "w": z.box.w,
                "h": z.box.h,
                "category": z.category,
            },
        )
    if args.out_zones:
        write_atomic(args.out_zones, json.dumps(list(zones.values()), indent=2) + "\n")
    if args.json:
        json.dump({"samples": len(samples), "truth": len(truth)}, sys.stdout)
        print()
    return EXIT_OK


def cmd_tables(args) -> int:
    rows = {}
    for name in ("L0", "L1"):
        lm = _builtin_lm(name)
        grad = ranking.gradient_ranking(lm, kind="authority")
        h8 = ranking.hits_pm_norm(lm, alpha=0.8)
        h3 = ranking.hits_pm_norm(lm, alpha=0.3)
        pr = ranking.pagerank_norm(lm, alpha=0.8)
        rows[name] = {
            "nodes": [lbl.render() for lbl in lm.labels],
            "gradient": [grad.scores[lbl] for lbl in lm.labels],
            "hits_pm_norm_0.8": [h8.scores[lbl] for lbl in lm.labels],
            "hits_pm_norm_0.3": [h3.scores[lbl] for lbl in lm.labels],
            "pagerank_norm_0.8": [pr.scores[lbl] for lbl in lm.labels],
        }
    if args.json:
        json.dump(rows, sys.stdout)
        print()
        return EXIT_OK
    for name, table in rows.items():
        print(f"link matrix {name}")
        header = ["node", "gradient", "hits a=0.8", "hits a=0.3", "pagerank a=0.8"]
        print("  " + "  ".join(f"{h:>14}" for h in header))
        for i, node in enumerate(table["nodes"]):
            cells = [
                table["gradient"][i],
                table["hits_pm_norm_0.8"][i],
                table["hits_pm_norm_0.3"][i],
                table["pagerank_norm_0.8"][i],
            ]
            print("  " + f"{node:>14}" + "  " + "  ".join(f"{c:>14.6e}" for c in cells))
        print()
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trackmine",
        description="Mine camera detection tracks into event logs, process networks "
        "and spectral node rankings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="tracks CSV + zones JSON -> event log")
    p.add_argument("--tracks", required=True)
    p.add_argument("--zones", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--label", default="EL1")
    _add_detection_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("merge", help="merge occurrence CSV streams")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--dedup-window", type=float, default=2.0, dest="dedup_window")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("gantt", help="event log -> SVG start-time chart")
    p.add_argument("--log", required=True)
    p.add_argument("--lane-key", choices=["location", "entity"], default="location",
                   dest="lane_key")
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gantt)

    p = sub.add_parser("cycles", help="segment an event log into cycles")
    p.add_argument("--log", required=True)
    p.add_argument("--anchor")
    p.add_argument("--boundaries")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_cycles)

    p = sub.add_parser("dfg", help="mine the directly-follows network of one cycle")
    p.add_argument("--log", required=True)
    p.add_argument("--anchor")
    p.add_argument("--boundaries")
    p.add_argument("--cycle", type=int, default=1)
    p.add_argument("--out-matrix", dest="out_matrix")
    p.add_argument("--out-dot", dest="out_dot")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dfg)

    p = sub.add_parser("rank", help="rank nodes of a cycle network or matrix CSV")
    p.add_argument("--matrix")
    p.add_argument("--log")
    p.add_argument("--anchor")
    p.add_argument("--boundaries")
    p.add_argument("--cycle", type=int, default=1)
    p.add_argument("--algorithm", choices=["gradient", "hits_pm_norm", "pagerank_norm"],
                   default="gradient")
    p.add_argument("--kind", choices=["authority", "hub"], default="authority")
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--convention", choices=["squared", "raw", "l1"], default="squared")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("compare", help="top-k overlap between two ranked node lists")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("precision", help="detected vs ground-truth occurrence streams")
    p.add_argument("--detected", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--window", type=float, default=2.0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_precision)

    p = sub.add_parser("simulate", help="run a scenario JSON into tracks + ground truth")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-tracks", required=True, dest="out_tracks")
    p.add_argument("--out-truth", required=True, dest="out_truth")
    p.add_argument("--out-zones", dest="out_zones")
    p.add_argument("--seed", type=int)
    p.add_argument("--min-duration", type=float, default=3.0, dest="min_duration")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tables", help="score the built-in worked matrices with all "
                       "three algorithms")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_tables)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"trackmine {args.command}: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (TrackmineError, OSError) as exc:
        print(f"trackmine {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
