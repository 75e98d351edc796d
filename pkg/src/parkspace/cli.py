"""Command-line entry point: ``parkspace {simulate,detect,eval,aggregate,render}``.

Exit codes: 0 ok, 1 unreadable or malformed input, 2 configuration out of
range, 3 semantically empty input (no frames, no ground-truth spaces).
Outputs are computed in memory first and only then written, each through a
temporary file, so a failing command leaves nothing behind.
"""

from __future__ import annotations

import argparse
import glob
import hashlib
import os
import sys
import tempfile
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__, jsonfmt
from .accumulate import PipelineConfig, accumulate
from .detect import detect_from_accumulators, read_detections
from .errors import ConfigError, EmptyDay, ParseError, ZeroGroundTruth
from .evaluate import aggregate_reports, evaluate, read_ground_truth, read_report
from .mask import read_frames
from .render import overlay_json, render_heatmap, render_overlay
from .simulate import PRESETS, generate, load_config, preset

EXIT_OK, EXIT_PARSE, EXIT_CONFIG, EXIT_SEMANTIC = 0, 1, 2, 3


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class _Job:
    """Collects inputs and outputs of one command for the manifest."""

    def __init__(self, command: str):
        self.command = command
        self.inputs: Dict[str, dict] = {}
        self.outputs: Dict[str, bytes] = {}
        self.output_names: Dict[str, str] = {}
        self.config: dict = {}
        self.seed: Optional[int] = None

    def read(self, name: str, path: str) -> bytes:
        data = Path(path).read_bytes()
        self.inputs[name] = {"path": str(path), "sha256": _digest(data)}
        return data

    def emit(self, name: str, path: str, data) -> None:
        if isinstance(data, str):
            data = data.encode("utf-8")
        self.outputs[str(path)] = data
        self.output_names[str(path)] = name

    def manifest(self) -> str:
        return jsonfmt.dumps({
            "command": self.command,
            "tool_version": __version__,
            "inputs": self.inputs,
            "config": self.config,
            "seed": self.seed,
            "outputs": {
                self.output_names[p]: {"path": p, "sha256": _digest(d)} for p, d in self.outputs.items()
            },
        })

    def commit(self, manifest_path: Optional[str]) -> None:
        files = dict(self.outputs)
        if manifest_path:
            files[str(manifest_path)] = self.manifest().encode("utf-8")
        for path, data in files.items():
            _atomic_write(path, data)


def _atomic_write(path: str, data: bytes) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _thresholds(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("iou", f"not a comma-separated list of numbers: {text!r}") from None
    if not values:
        raise ConfigError("iou", "need at least one threshold")
    for v in values:
        if not 0.0 < v <= 1.0:
            raise ConfigError("iou", f"threshold must lie in (0, 1], got {v}")
    return values


def _load_frames(job: _Job, path: str):
    data = job.read("frames", path)
    return read_frames(data.decode("utf-8").splitlines(keepends=True))


# -- commands -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    job = _Job("simulate")
    if args.config:
        job.read("config", args.config)
        cfg = load_config(args.config)
    else:
        cfg = preset(args.preset)
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.validate()
    job.config = cfg.to_dict()
    job.seed = cfg.seed
    scn = generate(cfg)
    out = Path(args.out_dir)
    job.emit("frames", out / "frames.jsonl", scn.frames_jsonl())
    job.emit("ground_truth", out / "ground_truth.json", scn.ground_truth_json())
    job.emit("duty_cycles", out / "duty_cycles.json", scn.duty_cycles_json())
    job.commit(out / "manifest.json")
    return EXIT_OK


def cmd_detect(args) -> int:
    config = PipelineConfig(args.t_sum, args.t_nms, args.min_posterior)
    job = _Job("detect")
    job.config = config.to_dict()
    frames = _load_frames(job, args.frames)
    if not frames:
        raise EmptyDay("frame file is empty")
    acc_set = accumulate(frames, config.t_sum)
    dets = detect_from_accumulators(acc_set, config)
    job.emit("detections", args.out, dets.to_json())
    if args.heatmap:
        job.emit("heatmap", args.heatmap, render_heatmap(acc_set).to_pgm())
    job.commit(args.manifest or f"{args.out}.manifest.json")
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.reports:
        return cmd_aggregate(args)
    if not args.detections or not args.ground_truth:
        raise ConfigError("eval", "--detections and --ground-truth are required")
    thresholds = _thresholds(args.iou)
    job = _Job("eval")
    job.config = {"iou": thresholds}
    job.read("detections", args.detections)
    job.read("ground_truth", args.ground_truth)
    dets = read_detections(args.detections)
    _, gts = read_ground_truth(args.ground_truth)
    if not gts:
        raise ZeroGroundTruth("ground-truth file lists no spaces")
    report = evaluate(dets, gts, thresholds)
    if args.out:
        job.emit("report", args.out, report.to_json())
        job.commit(args.manifest or f"{args.out}.manifest.json")
    else:
        sys.stdout.write(report.to_json())
    return EXIT_OK


def cmd_aggregate(args) -> int:
    paths = sorted(glob.glob(args.reports))
    if not paths:
        raise ParseError(f"no report files match {args.reports!r}")
    job = _Job("aggregate")
    reports = []
    for i, p in enumerate(paths):
        job.read(f"report[{i}]", p)
        reports.append(read_report(p))
    summary = aggregate_reports(reports)
    if args.out:
        job.emit("aggregate", args.out, jsonfmt.dumps(summary))
        job.commit(args.manifest or f"{args.out}.manifest.json")
    else:
        sys.stdout.write(jsonfmt.dumps(summary))
    return EXIT_OK


def cmd_render(args) -> int:
    job = _Job("render")
    if not args.heatmap and not args.overlay:
        raise ConfigError("render", "nothing to do: pass --heatmap and/or --overlay")
    if args.heatmap:
        if not args.frames:
            raise ConfigError("frames", "--heatmap needs --frames")
        config = PipelineConfig(t_sum=args.t_sum)
        job.config["t_sum"] = config.t_sum
        frames = _load_frames(job, args.frames)
        if not frames:
            raise EmptyDay("frame file is empty")
        job.emit("heatmap", args.heatmap, render_heatmap(accumulate(frames, config.t_sum)).to_pgm())
    if args.overlay:
        if not args.detections or not args.ground_truth:
            raise ConfigError("overlay", "--overlay needs --detections and --ground-truth")
        thr = _thresholds(args.iou)[0]
        job.config["iou"] = thr
        job.read("detections", args.detections)
        job.read("ground_truth", args.ground_truth)
        dets = read_detections(args.detections)
        _, gts = read_ground_truth(args.ground_truth)
        job.emit("overlay", args.overlay, overlay_json(render_overlay(dets, gts, thr)))
    job.commit(args.manifest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parkspace", description="Parking-space detection from car occurrence.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic day of frames with ground truth")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="scenario JSON file")
    src.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="detect parking spaces in a frame-sequence file")
    p.add_argument("--frames", required=True)
    p.add_argument("--out", required=True, help="detections JSON to write")
    p.add_argument("--heatmap", help="also write the heat map as binary PGM")
    p.add_argument("--t-sum", type=float, default=0.5)
    p.add_argument("--t-nms", type=float, default=0.4)
    p.add_argument("--min-posterior", type=float, default=0.0)
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="AP of detections against ground truth")
    p.add_argument("--detections")
    p.add_argument("--ground-truth")
    p.add_argument("--iou", default="0.25,0.5")
    p.add_argument("--reports", help="glob of report files: aggregate instead of evaluate")
    p.add_argument("--out")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("aggregate", help="mean and sample std of AP across per-day reports")
    p.add_argument("--reports", required=True, help="glob of report files")
    p.add_argument("--out")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("render", help="heat map image and/or TP/FP/FN overlay")
    p.add_argument("--frames")
    p.add_argument("--t-sum", type=float, default=0.5)
    p.add_argument("--heatmap")
    p.add_argument("--detections")
    p.add_argument("--ground-truth")
    p.add_argument("--iou", default="0.25")
    p.add_argument("--overlay")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"parkspace: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, OSError, UnicodeDecodeError) as exc:
        print(f"parkspace: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (EmptyDay, ZeroGroundTruth) as exc:
        print(f"parkspace: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
