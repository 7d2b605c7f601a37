"""Simulated participant: capture/encode/publish loop plus stream playout.

A Participant is a single logical actor. The scenario runner drives it:
capture_tick() at cadence boundaries, on_media()/on_roster() for inbound
traffic. Timestamps use the participant's offset clock, modeling the
residual error of NTP-synchronized machines; simulation time stays in
true microseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from voxmeet import wire
from voxmeet.capture import (
    CameraModel,
    SceneConfig,
    back_project,
    default_camera,
    fuse,
    remove_background,
    synth_capture,
    transform_to_world,
)
from voxmeet.codec import CodecConfig, EncodedFrame, decode_frame, encode_frame
from voxmeet.errors import VoxmeetError
from voxmeet.wire import MsgType, WireMessage

MAX_CLOCK_OFFSET_US = 50_000


@dataclass
class ParticipantConfig:
    member_id: int
    scene: SceneConfig = field(default_factory=SceneConfig)
    cam: CameraModel = field(default_factory=default_camera)
    codec: CodecConfig = field(default_factory=CodecConfig)
    fps: float = 15.0
    clock_offset_us: int = 0
    capture_radius_m: float = 1.5
    position_hz: float = 10.0
    audio_bps: int = 0  # constant-bitrate MEDIA_AUDIO filler, 0 = off

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if abs(self.clock_offset_us) > MAX_CLOCK_OFFSET_US:
            raise ValueError(f"|clock_offset_us| must be <= {MAX_CLOCK_OFFSET_US}")

    def bg_window_mm(self) -> tuple[int, int]:
        """Depth pass band around the subject distance."""
        d = self.scene.camera_distance
        return max(1, int((d - 1.2) * 1000)), int((d + 1.2) * 1000)


@dataclass
class SourceStats:
    """Per-remote-source playout bookkeeping."""

    last_seq: int = 0
    frames: int = 0
    gaps: int = 0
    decode_errors: int = 0
    out_of_order: int = 0
    pairs: list = field(default_factory=list)  # (seq, capture_ts_us, render_ts_us)


class RenderSink:
    """Records what would reach the renderer and when.

    render_ts is the moment decode completes on the local (offset) clock;
    seq gaps are recorded, frames are never reordered.
    """

    def __init__(self):
        self.sources: dict[int, SourceStats] = {}
        self.self_view: list[tuple[int, int]] = []  # (seq, capture_ts_us)
        self.events: list[tuple[int, int, int]] = []  # (render_ts, source, capture_ts)

    def source(self, source_id: int) -> SourceStats:
        return self.sources.setdefault(source_id, SourceStats())

    def record(self, source_id: int, seq: int, capture_ts_us: int, render_ts_us: int):
        stats = self.source(source_id)
        stats.frames += 1
        if stats.last_seq and seq > stats.last_seq + 1:
            stats.gaps += seq - stats.last_seq - 1
        stats.last_seq = seq
        stats.pairs.append((seq, capture_ts_us, render_ts_us))
        self.events.append((render_ts_us, source_id, capture_ts_us))


class Participant:
    """Capture source, publisher, and playout endpoint for one member."""

    def __init__(self, cfg: ParticipantConfig):
        self.cfg = cfg
        self.sink = RenderSink()
        self.session_id: int | None = None
        self.seat: int | None = None
        self.seat_map: dict[int, int] = {}
        self.last_roster: dict[int, int] = {}
        self.published = 0
        self.published_bytes = 0
        self.encode_skips = 0
        self.cadence_misses = 0
        self._media_seq = 0
        self._seq: dict[MsgType, int] = {}
        self._next_due_us: int | None = None
        self._period_us = 1e6 / cfg.fps

    # --- clock -----------------------------------------------------------

    def clock(self, t_true_us: int) -> int:
        return t_true_us + self.cfg.clock_offset_us

    # --- session ----------------------------------------------------------

    def join_session(self, session_id: int, seat: int, roster: dict[int, int], t_true_us: int):
        self.session_id = session_id
        self.seat = seat
        self.last_roster = dict(roster)
        self.seat_map = {m: s for m, s in roster.items() if m != self.cfg.member_id}
        self._next_due_us = t_true_us

    @property
    def joined(self) -> bool:
        return self.session_id is not None

    @property
    def next_due_us(self) -> int | None:
        """Earliest whole microsecond at which capture_tick will fire."""
        if self._next_due_us is None:
            return None
        return int(math.ceil(self._next_due_us))

    # --- capture path -------------------------------------------------------

    def capture_tick(self, t_true_us: int) -> EncodedFrame | None:
        """Run one capture/encode pass if t crosses the cadence boundary.

        Returns the frame to publish (already mirrored into the self-view),
        or None when it is not due yet or encoding failed. Failures skip
        the frame rather than stalling the cadence.
        """
        if not self.joined:
            raise VoxmeetError("capture_tick before join")
        if self._next_due_us is None or t_true_us < self._next_due_us:
            return None
        self._next_due_us += self._period_us
        while self._next_due_us <= t_true_us:  # host stalled past a boundary
            self._next_due_us += self._period_us
            self.cadence_misses += 1

        capture_ts = self.clock(t_true_us)
        seq = self._media_seq + 1
        try:
            depth, color = synth_capture(self.cfg.scene, t_true_us, self.cfg.cam)
            depth = remove_background(depth, *self.cfg.bg_window_mm())
            frame = back_project(
                depth,
                color,
                self.cfg.cam,
                source_id=self.cfg.member_id,
                seq=seq,
                capture_ts_us=capture_ts,
            )
            frame = transform_to_world(frame, self.cfg.cam.extrinsic)
            frame = fuse([frame], self.cfg.capture_radius_m)
            enc = encode_frame(frame, self.cfg.codec)
        except VoxmeetError:
            self.encode_skips += 1
            return None
        self._media_seq = seq
        self.published += 1
        self.sink.self_view.append((seq, capture_ts))
        return enc

    # --- outbound messages ---------------------------------------------------

    def _next_seq(self, msg_type: MsgType) -> int:
        self._seq[msg_type] = self._seq.get(msg_type, 0) + 1
        return self._seq[msg_type]

    def media_message(self, enc: EncodedFrame, send_t_true_us: int) -> WireMessage:
        payload = enc.to_bytes()
        self.published_bytes += len(payload)
        return WireMessage(
            MsgType.MEDIA_PC,
            session_id=self.session_id,
            sender_id=self.cfg.member_id,
            seq=enc.seq,
            send_ts_us=self.clock(send_t_true_us),
            payload=payload,
        )

    def heartbeat_message(self, t_true_us: int) -> WireMessage:
        return WireMessage(
            MsgType.HEARTBEAT,
            session_id=self.session_id,
            sender_id=self.cfg.member_id,
            seq=self._next_seq(MsgType.HEARTBEAT),
            send_ts_us=self.clock(t_true_us),
        )

    def position_message(self, t_true_us: int) -> WireMessage:
        # Seated participants: a fixed round-table spot per seat.
        seat = self.seat or 0
        pos = (float(seat), 0.0, -float(seat))
        return WireMessage(
            MsgType.POSITION,
            session_id=self.session_id,
            sender_id=self.cfg.member_id,
            seq=self._next_seq(MsgType.POSITION),
            send_ts_us=self.clock(t_true_us),
            payload=wire.encode_position(pos, (0.0, 0.0, 0.0, 1.0)),
        )

    def audio_message(self, t_true_us: int, nbytes: int) -> WireMessage:
        return WireMessage(
            MsgType.MEDIA_AUDIO,
            session_id=self.session_id,
            sender_id=self.cfg.member_id,
            seq=self._next_seq(MsgType.MEDIA_AUDIO),
            send_ts_us=self.clock(t_true_us),
            payload=bytes(nbytes),
        )

    # --- inbound messages ------------------------------------------------------

    def on_media(self, msg: WireMessage, render_t_true_us):
        """Decode a remote frame; record its (capture, render) timestamp pair.

        render_t_true_us is the true time decode completes (an int in
        simulated runs, or a zero-arg callable sampled after the decode
        in realtime runs); the recorded render_ts runs on this
        participant's offset clock.
        """
        stats = self.sink.source(msg.sender_id)
        try:
            enc = EncodedFrame.from_bytes(msg.payload)
            if enc.source_id == self.cfg.member_id:
                stats.decode_errors += 1
                return
            if enc.seq <= stats.last_seq:
                stats.out_of_order += 1
                return
            decode_frame(enc)
        except VoxmeetError:
            stats.decode_errors += 1
            return
        if callable(render_t_true_us):
            render_t_true_us = render_t_true_us()
        self.sink.record(
            msg.sender_id, enc.seq, enc.capture_ts_us, self.clock(render_t_true_us)
        )

    def on_roster(self, msg: WireMessage):
        roster = wire.decode_roster(msg.payload)
        self.last_roster = roster
        self.seat_map = {m: s for m, s in roster.items() if m != self.cfg.member_id}
        # departed sources keep their sink stats: frozen, not deleted
