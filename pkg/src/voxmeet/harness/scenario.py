"""Deterministic multi-party scenario runner.

VIRTUAL mode drives orchestrator and participants on a single-threaded
discrete-event loop over integer microseconds: every run with the same
(config, seed) produces a byte-identical report. REALTIME mode (see
realtime.py) runs the same components as asyncio actors over TCP.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace

import numpy as np

from voxmeet import wire
from voxmeet.capture import SceneConfig, default_camera
from voxmeet.client import Participant, ParticipantConfig
from voxmeet.codec import CodecConfig
from voxmeet.errors import ConfigError, ScenarioError
from voxmeet.harness.link import Link, LinkModel
from voxmeet.harness.metrics import (
    delay_stats,
    series_stats,
    skew_stats,
    throughput_series,
)
from voxmeet.harness.report import MetricsReport
from voxmeet.harness.service import (
    CALIBRATED_LINK,
    SERVICE_NOTES,
    ServiceTimes,
    resolve_service,
)
from voxmeet.errors import NoData
from voxmeet.orchestrator import Orchestrator
from voxmeet.wire import MsgType, WireMessage

AUDIO_PACKET_HZ = 50


@dataclass
class ScenarioConfig:
    """Everything a scenario needs; JSON config files mirror these names."""

    participants: int = 2
    duration_s: float = 10.0
    seed: int = 0
    clock_mode: str = "virtual"  # "virtual" | "realtime"
    codec: CodecConfig = field(default_factory=CodecConfig)
    scene: SceneConfig = field(default_factory=SceneConfig)
    cam_width: int = 640
    cam_height: int = 640
    fps: float = 15.0
    link: LinkModel | None = None  # shared model; None = mode default
    links: list[LinkModel] | None = None  # per-participant override
    service_mode: str = "measured"  # "measured" | "fixed" | "calibrated"
    service_fixed: ServiceTimes | None = None
    clock_offsets_us: list[int] | None = None  # None = uniform +/-3000 us from seed
    heartbeat_s: float = 1.0
    position_hz: float = 10.0
    audio_bps: int = 0
    endpoint: tuple[str, int] | None = None  # realtime: external orchestrator

    def __post_init__(self):
        if not 2 <= self.participants <= 6:
            raise ConfigError("participants must be in [2, 6]")
        if self.duration_s <= 0:
            raise ConfigError("duration_s must be positive")
        if self.clock_mode not in ("virtual", "realtime"):
            raise ConfigError(f"unknown clock_mode {self.clock_mode!r}")
        if self.links is not None and len(self.links) != self.participants:
            raise ConfigError("links must list one model per participant")
        if self.clock_offsets_us is not None and len(self.clock_offsets_us) != self.participants:
            raise ConfigError("clock_offsets_us must list one value per participant")

    def link_for(self, index: int) -> LinkModel:
        if self.links is not None:
            return self.links[index]
        if self.link is not None:
            return self.link
        return CALIBRATED_LINK if self.service_mode == "calibrated" else LinkModel()

    def offsets(self) -> list[int]:
        if self.clock_offsets_us is not None:
            return list(self.clock_offsets_us)
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0xC10C]))
        return [int(rng.integers(-3000, 3001)) for _ in range(self.participants)]

    def echo(self) -> dict:
        """Config summary embedded in the report."""
        return {
            "participants": self.participants,
            "duration_s": self.duration_s,
            "seed": self.seed,
            "clock_mode": self.clock_mode,
            "fps": self.fps,
            "cam_width": self.cam_width,
            "cam_height": self.cam_height,
            "codec": {
                "octree_depth": self.codec.octree_depth,
                "bbox_mode": self.codec.bbox_mode,
                "color_mode": self.codec.color_mode,
                "luma_bits": self.codec.luma_bits,
                "chroma_bits": self.codec.chroma_bits,
            },
            "scene": {
                "seed": self.scene.seed,
                "target_points": self.scene.target_points,
                "motion_amplitude": self.scene.motion_amplitude,
                "camera_distance": self.scene.camera_distance,
            },
            "links": [
                {
                    "base_delay_us": self.link_for(i).base_delay_us,
                    "jitter_us": self.link_for(i).jitter_us,
                    "bandwidth_bps": self.link_for(i).bandwidth_bps,
                }
                for i in range(self.participants)
            ],
            "service_mode": self.service_mode,
            "heartbeat_s": self.heartbeat_s,
            "position_hz": self.position_hz,
            "audio_bps": self.audio_bps,
        }


class EventLoop:
    """Minimal deterministic event heap (time, insertion order)."""

    def __init__(self):
        self._heap = []
        self._counter = 0
        self.now = 0

    def at(self, t_us: int, fn):
        heapq.heappush(self._heap, (int(t_us), self._counter, fn))
        self._counter += 1

    def run(self):
        while self._heap:
            t, _, fn = heapq.heappop(self._heap)
            self.now = t
            fn()


class _VirtualRun:
    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.end_us = int(cfg.duration_s * 1e6)
        self.loop = EventLoop()
        self.orch = Orchestrator()
        self.session_id = self.orch.create_session(cfg.participants, now_us=0)

        offsets = cfg.offsets()
        self.clients: dict[int, Participant] = {}
        self.uplinks: dict[int, Link] = {}
        self.downlinks: dict[int, Link] = {}
        for i in range(cfg.participants):
            member_id = i + 1
            model = cfg.link_for(i)
            pcfg = ParticipantConfig(
                member_id=member_id,
                scene=replace(cfg.scene, seed=cfg.scene.seed + 1000 * member_id),
                cam=default_camera(cfg.cam_width, cfg.cam_height, cfg.scene.camera_distance),
                codec=cfg.codec,
                fps=cfg.fps,
                clock_offset_us=offsets[i],
                position_hz=cfg.position_hz,
                audio_bps=cfg.audio_bps,
            )
            self.clients[member_id] = Participant(pcfg)
            self.uplinks[member_id] = Link(
                model, np.random.default_rng(np.random.SeedSequence([cfg.seed, member_id, 0]))
            )
            self.downlinks[member_id] = Link(
                model, np.random.default_rng(np.random.SeedSequence([cfg.seed, member_id, 1]))
            )

        self.service = resolve_service(
            cfg.service_mode,
            cfg.participants,
            self.clients[1].cfg.scene,
            self.clients[1].cfg.cam,
            cfg.codec,
            cfg.service_fixed,
        )
        self.offsets = {i + 1: offsets[i] for i in range(cfg.participants)}
        # (t_deliver_us, sender, receiver, kind, wire_bytes, seq)
        self.deliveries: list[tuple[int, int, int, str, int, int]] = []
        self.errors: list[str] = []

    # --- message plumbing --------------------------------------------------

    def send_up(self, member_id: int, msg: WireMessage, t_us: int):
        t_arr = self.uplinks[member_id].transfer(t_us, msg.wire_size())
        self.loop.at(t_arr, lambda: self.orch_receive(msg, t_arr))

    def orch_receive(self, msg: WireMessage, t_us: int):
        for recipient, out in self.orch.handle_message(msg, t_us):
            t_del = self.downlinks[recipient].transfer(t_us, out.wire_size())
            self.loop.at(t_del, self._recv_fn(recipient, out, t_del))

    def _recv_fn(self, recipient: int, msg: WireMessage, t_del: int):
        return lambda: self.client_receive(recipient, msg, t_del)

    def client_receive(self, recipient: int, msg: WireMessage, t_del: int):
        client = self.clients[recipient]
        if msg.msg_type == MsgType.MEDIA_PC:
            self.deliveries.append(
                (t_del, msg.sender_id, recipient, "media_pc", msg.wire_size(), msg.seq)
            )
            t_render = t_del + self.service.decode_us
            self.loop.at(t_render, lambda: client.on_media(msg, t_render))
        elif msg.msg_type == MsgType.MEDIA_AUDIO:
            self.deliveries.append(
                (t_del, msg.sender_id, recipient, "media_audio", msg.wire_size(), msg.seq)
            )
        elif msg.msg_type == MsgType.JOIN_ACK:
            seat, roster = wire.decode_join_ack(msg.payload)
            client.join_session(msg.session_id, seat, roster, t_del)
            self.start_client(recipient, t_del)
        elif msg.msg_type == MsgType.ROSTER:
            client.on_roster(msg)
        elif msg.msg_type == MsgType.ERROR:
            code, text = wire.decode_error(msg.payload)
            if not client.joined:
                self.errors.append(f"member {recipient} could not join: {text}")
            # post-join errors (peer timeouts) are informational

    # --- per-client schedules ------------------------------------------------

    def start_client(self, member_id: int, t_now: int):
        self.schedule_capture(member_id)
        if self.cfg.heartbeat_s > 0:
            self.loop.at(
                t_now + int(self.cfg.heartbeat_s * 1e6),
                lambda: self.heartbeat_event(member_id),
            )
        if self.cfg.position_hz > 0:
            self.loop.at(
                t_now + int(1e6 / self.cfg.position_hz),
                lambda: self.position_event(member_id),
            )
        if self.cfg.audio_bps > 0:
            self.loop.at(
                t_now + int(1e6 / AUDIO_PACKET_HZ), lambda: self.audio_event(member_id)
            )

    def schedule_capture(self, member_id: int):
        t = self.clients[member_id].next_due_us
        if t is not None and t < self.end_us:
            self.loop.at(t, lambda: self.capture_event(member_id, t))

    def capture_event(self, member_id: int, t: int):
        enc = self.clients[member_id].capture_tick(t)
        if enc is not None:
            t_pub = t + self.service.capture_us + self.service.encode_us
            self.loop.at(t_pub, lambda: self.publish_event(member_id, enc, t_pub))
        self.schedule_capture(member_id)

    def publish_event(self, member_id: int, enc, t_pub: int):
        msg = self.clients[member_id].media_message(enc, t_pub)
        self.send_up(member_id, msg, t_pub)

    def heartbeat_event(self, member_id: int):
        t = self.loop.now
        self.send_up(member_id, self.clients[member_id].heartbeat_message(t), t)
        nxt = t + int(self.cfg.heartbeat_s * 1e6)
        if nxt < self.end_us:
            self.loop.at(nxt, lambda: self.heartbeat_event(member_id))

    def position_event(self, member_id: int):
        t = self.loop.now
        self.send_up(member_id, self.clients[member_id].position_message(t), t)
        nxt = t + int(1e6 / self.cfg.position_hz)
        if nxt < self.end_us:
            self.loop.at(nxt, lambda: self.position_event(member_id))

    def audio_event(self, member_id: int):
        t = self.loop.now
        nbytes = max(1, self.cfg.audio_bps // (8 * AUDIO_PACKET_HZ))
        self.send_up(member_id, self.clients[member_id].audio_message(t, nbytes), t)
        nxt = t + int(1e6 / AUDIO_PACKET_HZ)
        if nxt < self.end_us:
            self.loop.at(nxt, lambda: self.audio_event(member_id))

    def orch_tick(self):
        t = self.loop.now
        _, deliveries = self.orch.heartbeat_tick(t)
        for recipient, out in deliveries:
            t_del = self.downlinks[recipient].transfer(t, out.wire_size())
            self.loop.at(t_del, self._recv_fn(recipient, out, t_del))
        nxt = t + 1_000_000
        if nxt <= self.end_us:
            self.loop.at(nxt, self.orch_tick)

    # --- run -------------------------------------------------------------

    def run(self) -> MetricsReport:
        for i in range(self.cfg.participants):
            member_id = i + 1
            t_join = 1_000 * member_id

            def send_join(mid=member_id, t=t_join):
                self.send_up(
                    mid,
                    WireMessage(
                        MsgType.JOIN,
                        session_id=self.session_id,
                        sender_id=mid,
                        seq=1,
                        send_ts_us=self.clients[mid].clock(t),
                    ),
                    t,
                )

            self.loop.at(t_join, send_join)
        self.loop.at(1_000_000, self.orch_tick)
        self.loop.run()

        if self.errors:
            raise ScenarioError("; ".join(self.errors))
        not_joined = [mid for mid, c in self.clients.items() if not c.joined]
        if not_joined:
            raise ScenarioError(f"members never joined: {not_joined}")
        self.orch.snapshot_stats(self.loop.now)
        return build_report(
            cfg=self.cfg,
            service=self.service,
            offsets=self.offsets,
            clients=self.clients,
            deliveries=self.deliveries,
            orch=self.orch,
            session_id=self.session_id,
        )


def build_report(
    cfg: ScenarioConfig,
    service: ServiceTimes,
    offsets: dict[int, int],
    clients: dict[int, Participant],
    deliveries: list,
    orch: Orchestrator,
    session_id: int,
) -> MetricsReport:
    """Assemble the serializable report from run state (virtual or realtime)."""
    media = [d for d in deliveries if d[3] == "media_pc"]

    throughput = {}
    stream_deliveries: dict[tuple[int, int], list] = {}
    for t_del, sender, receiver, _, nbytes, seq in media:
        stream_deliveries.setdefault((sender, receiver), []).append((t_del, nbytes))
    for (sender, receiver), rows in sorted(stream_deliveries.items()):
        series = throughput_series(rows, window_s=1.0)
        mean, stdv, cov = series_stats(series, window_s=1.0)
        throughput[f"{sender}->{receiver}"] = {
            "window_s": 1.0,
            "windows_bits": series,
            "mean_bps": round(mean, 1),
            "stdv_bps": round(stdv, 1),
            "cov": round(cov, 4),
            "total_bytes": sum(n for _, n in rows),
            "frames": len(rows),
        }

    delays = {}
    delay_rows = []
    all_raw, all_corr = [], []
    for receiver, client in sorted(clients.items()):
        for sender, stats in sorted(client.sink.sources.items()):
            if not stats.pairs:
                continue
            raw = delay_stats(stats.pairs)
            corr = delay_stats(stats.pairs, offsets[sender], offsets[receiver])
            key = f"{sender}->{receiver}"
            delays[key] = {
                "frames": raw.count,
                "gaps": stats.gaps,
                "decode_errors": stats.decode_errors,
                "out_of_order": stats.out_of_order,
                "raw_mean_ms": round(raw.mean_ms, 3),
                "raw_stdv_ms": round(raw.stdv_ms, 3),
                "raw_p95_ms": round(raw.p95_ms, 3),
                "corrected_mean_ms": round(corr.mean_ms, 3),
                "corrected_stdv_ms": round(corr.stdv_ms, 3),
                "corrected_p95_ms": round(corr.p95_ms, 3),
            }
            for seq, capture, render in stats.pairs:
                raw_us = render - capture
                corr_us = raw_us - (offsets[receiver] - offsets[sender])
                delay_rows.append(
                    [sender, receiver, seq, round(raw_us / 1000.0, 3), round(corr_us / 1000.0, 3)]
                )
                all_raw.append(raw_us)
                all_corr.append(corr_us)

    skew = {}
    for receiver, client in sorted(clients.items()):
        try:
            s = skew_stats(client.sink)
            skew[str(receiver)] = {
                "max_ms": round(s.max_ms, 3),
                "mean_ms": round(s.mean_ms, 3),
                "events": s.events,
            }
        except NoData:
            pass

    published_frames = sum(c.published for c in clients.values())
    delivered_frames = len(media)
    fanout = cfg.participants - 1
    client_rows = {}
    for mid, c in sorted(clients.items()):
        client_rows[str(mid)] = {
            "published": c.published,
            "published_bytes": c.published_bytes,
            "encode_skips": c.encode_skips,
            "cadence_misses": c.cadence_misses,
            "seat": c.seat,
            "received_frames": sum(s.frames for s in c.sink.sources.values()),
            "self_view_frames": len(c.sink.self_view),
        }

    relay = {
        f"{sid}:{sender}": stat.as_dict() for (sid, sender), stat in sorted(orch.stats.items())
    }

    data = {
        "clock_mode": cfg.clock_mode,
        "seed": cfg.seed,
        "session_id": session_id,
        "duration_s": cfg.duration_s,
        "config": cfg.echo(),
        "service": {
            "mode": cfg.service_mode,
            "capture_us": service.capture_us,
            "encode_us": service.encode_us,
            "decode_us": service.decode_us,
            "note": (
                "realtime run: stage costs are actual compute"
                if cfg.clock_mode == "realtime"
                else SERVICE_NOTES[cfg.service_mode]
            ),
        },
        "clock_offsets_us": {str(m): o for m, o in sorted(offsets.items())},
        "throughput": throughput,
        "delays": delays,
        "delay_overall": {
            "frames": len(all_raw),
            "raw_mean_ms": round(float(np.mean(all_raw)) / 1000.0, 3) if all_raw else None,
            "corrected_mean_ms": (
                round(float(np.mean(all_corr)) / 1000.0, 3) if all_corr else None
            ),
        },
        "skew": skew,
        "relay": relay,
        "clients": client_rows,
        "reconciliation": {
            "published_frames": published_frames,
            "delivered_frames": delivered_frames,
            "expected_deliveries": published_frames * fanout,
            "in_flight_at_end": published_frames * fanout - delivered_frames,
            "window_bits_total": sum(
                sum(t["windows_bits"]) for t in throughput.values()
            ),
            "delivered_bits_total": sum(8 * t["total_bytes"] for t in throughput.values()),
        },
        "delay_rows": delay_rows,
        "orchestrator_events": orch.events,
    }
    return MetricsReport(data)


def run_scenario(cfg: ScenarioConfig) -> MetricsReport:
    """Execute a scenario and return its metrics report.

    VIRTUAL mode is deterministic in (config, seed); REALTIME mode runs
    the same pipeline over asyncio TCP and is not reproducible.
    """
    if cfg.clock_mode == "virtual":
        return _VirtualRun(cfg).run()
    from voxmeet.harness.realtime import run_realtime

    return run_realtime(cfg)
