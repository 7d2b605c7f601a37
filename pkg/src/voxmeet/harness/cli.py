"""voxmeet command line: run scenarios, summarize reports, calibrate codec cost.

    voxmeet run --config scenario.json --out results/ [--seed N] [--realtime]
    voxmeet report --in results/
    voxmeet calibrate [--target-points N] [--octree-depth D]

Config files are JSON mirroring ScenarioConfig field names; exit code is 0
on success, nonzero with a one-line cause on stderr otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from voxmeet.capture import SceneConfig, default_camera
from voxmeet.codec import CodecConfig, active_backend
from voxmeet.errors import VoxmeetError
from voxmeet.harness.link import LinkModel
from voxmeet.harness.report import read_report, write_report
from voxmeet.harness.scenario import ScenarioConfig, run_scenario
from voxmeet.harness.service import ServiceTimes, measure_codec_times


def _link_from(d: dict) -> LinkModel:
    return LinkModel(
        base_delay_us=int(d.get("base_delay_us", 2_000)),
        jitter_us=int(d.get("jitter_us", 0)),
        bandwidth_bps=float(d.get("bandwidth_bps", 200e6)),
    )


def load_config(path, seed: int | None = None, realtime: bool = False) -> ScenarioConfig:
    raw = json.loads(Path(path).read_text())
    kwargs: dict = {}
    for key in (
        "participants",
        "duration_s",
        "seed",
        "clock_mode",
        "cam_width",
        "cam_height",
        "fps",
        "heartbeat_s",
        "position_hz",
        "audio_bps",
        "clock_offsets_us",
    ):
        if key in raw:
            kwargs[key] = raw[key]
    if "codec" in raw:
        kwargs["codec"] = CodecConfig(**raw["codec"])
    if "scene" in raw:
        kwargs["scene"] = SceneConfig(**raw["scene"])
    if "link" in raw:
        kwargs["link"] = _link_from(raw["link"])
    if "links" in raw:
        kwargs["links"] = [_link_from(d) for d in raw["links"]]
    if "service" in raw:
        svc = dict(raw["service"])
        kwargs["service_mode"] = svc.pop("mode", "measured")
        if kwargs["service_mode"] == "fixed":
            kwargs["service_fixed"] = ServiceTimes(
                capture_us=int(svc.get("capture_us", 0)),
                encode_us=int(svc.get("encode_us", 0)),
                decode_us=int(svc.get("decode_us", 0)),
            )
    if "endpoint" in raw:
        kwargs["endpoint"] = (raw["endpoint"]["host"], int(raw["endpoint"]["port"]))
    if seed is not None:
        kwargs["seed"] = seed
    if realtime:
        kwargs["clock_mode"] = "realtime"
    return ScenarioConfig(**kwargs)


def cmd_run(args) -> int:
    cfg = load_config(args.config, seed=args.seed, realtime=args.realtime)
    report = run_scenario(cfg)
    write_report(report, args.out)
    overall = report["delay_overall"]
    print(
        f"scenario done: {cfg.participants} participants, {cfg.duration_s}s "
        f"({cfg.clock_mode}); mean e2e delay raw={overall['raw_mean_ms']} ms, "
        f"corrected={overall['corrected_mean_ms']} ms; report in {args.out}"
    )
    return 0


def cmd_report(args) -> int:
    report = read_report(args.indir)
    print(f"scenario: {report['config']['participants']} participants, "
          f"{report['duration_s']}s, seed {report['seed']}, {report['clock_mode']} clock")
    print(f"service: {report['service']['mode']} ({report['service']['note']})")
    print()
    print(f"{'stream':>10} {'frames':>7} {'mean Mbps':>10} {'cov':>7} "
          f"{'raw ms':>9} {'corr ms':>9}")
    for key in sorted(report["throughput"]):
        t = report["throughput"][key]
        d = report["delays"].get(key, {})
        print(
            f"{key:>10} {t['frames']:>7} {t['mean_bps'] / 1e6:>10.2f} {t['cov']:>7.3f} "
            f"{d.get('raw_mean_ms', float('nan')):>9.1f} "
            f"{d.get('corrected_mean_ms', float('nan')):>9.1f}"
        )
    overall = report["delay_overall"]
    print()
    print(
        f"overall: {overall['frames']} frames, mean delay raw={overall['raw_mean_ms']} ms, "
        f"corrected={overall['corrected_mean_ms']} ms"
    )
    for receiver, s in sorted(report["skew"].items()):
        print(f"skew at {receiver}: max={s['max_ms']} ms mean={s['mean_ms']} ms")
    return 0


def cmd_calibrate(args) -> int:
    scene = SceneConfig(seed=0, target_points=args.target_points)
    codec = CodecConfig(octree_depth=args.octree_depth)
    cam = default_camera(camera_distance=scene.camera_distance)
    times = measure_codec_times(scene, cam, codec, repeats=args.repeats)
    print(f"kernel backend: {active_backend()}")
    print(f"encode_us: {times.encode_us}")
    print(f"decode_us: {times.decode_us}")
    print("use in a config as: "
          f'{{"service": {{"mode": "fixed", "encode_us": {times.encode_us}, '
          f'"decode_us": {times.decode_us}}}}}')
    return 0


def cmd_serve(args) -> int:
    import asyncio

    from voxmeet.harness.realtime import serve_forever

    conf = {}
    if args.config:
        conf = json.loads(Path(args.config).read_text())
    try:
        asyncio.run(
            serve_forever(
                host=conf.get("host", "127.0.0.1"),
                port=int(conf.get("listen_port", 9470)),
                max_members=int(conf.get("max_members", 6)),
                heartbeat_timeout_ms=int(conf.get("heartbeat_timeout_ms", 5000)),
            )
        )
    except KeyboardInterrupt:
        pass
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voxmeet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--realtime", action="store_true")
    p_run.set_defaults(fn=cmd_run)

    p_rep = sub.add_parser("report", help="print a summary table from a report dir")
    p_rep.add_argument("--in", dest="indir", required=True)
    p_rep.set_defaults(fn=cmd_report)

    p_cal = sub.add_parser("calibrate", help="micro-benchmark codec stage times")
    p_cal.add_argument("--target-points", type=int, default=50_000)
    p_cal.add_argument("--octree-depth", type=int, default=9)
    p_cal.add_argument("--repeats", type=int, default=5)
    p_cal.set_defaults(fn=cmd_calibrate)

    p_srv = sub.add_parser("serve", help="run a standalone orchestrator server")
    p_srv.add_argument(
        "--config",
        default=None,
        help="JSON with listen_port, max_members, heartbeat_timeout_ms, host",
    )
    p_srv.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (VoxmeetError, OSError, json.JSONDecodeError, TypeError, ValueError) as e:
        print(f"voxmeet: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
