"""REALTIME mode: orchestrator and participants as asyncio actors over TCP.

The same Orchestrator and Participant objects as VIRTUAL mode, but
messages travel over real sockets and stage costs are actual compute.
Not reproducible; metrics aggregation happens after quiescence.
"""

from __future__ import annotations

import asyncio
import time
from dataclasses import replace

from voxmeet import wire
from voxmeet.capture import default_camera
from voxmeet.client import Participant, ParticipantConfig
from voxmeet.errors import ScenarioError
from voxmeet.harness.report import MetricsReport
from voxmeet.harness.service import ServiceTimes
from voxmeet.orchestrator import Orchestrator
from voxmeet.wire import MsgType, StreamDecoder, WireMessage

_READ_CHUNK = 256 * 1024


class OrchestratorServer:
    """TCP front end for an Orchestrator; one JSON log line per event."""

    def __init__(self, orch: Orchestrator, epoch_ns: int, host: str = "127.0.0.1", port: int = 0):
        self.orch = orch
        self.epoch_ns = epoch_ns
        self.host = host
        self.port = port
        self._writers: dict[int, asyncio.StreamWriter] = {}
        self._server: asyncio.Server | None = None
        self._tick_task: asyncio.Task | None = None

    def now_us(self) -> int:
        return (time.monotonic_ns() - self.epoch_ns) // 1000

    async def start(self):
        self._server = await asyncio.start_server(self._handle, self.host, self.port)
        self.port = self._server.sockets[0].getsockname()[1]
        self._tick_task = asyncio.create_task(self._tick_loop())

    async def stop(self):
        if self._tick_task:
            self._tick_task.cancel()
        if self._server:
            self._server.close()
            await self._server.wait_closed()
        for w in self._writers.values():
            w.close()

    def _deliver(self, member_id: int, msg: WireMessage):
        writer = self._writers.get(member_id)
        if writer is not None and not writer.is_closing():
            writer.write(wire.encode_message(msg))

    async def _tick_loop(self):
        while True:
            await asyncio.sleep(1.0)
            _, deliveries = self.orch.heartbeat_tick(self.now_us())
            for member_id, msg in deliveries:
                self._deliver(member_id, msg)

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        decoder = StreamDecoder()
        try:
            while True:
                data = await reader.read(_READ_CHUNK)
                if not data:
                    break
                for msg in decoder.feed(data):
                    if msg.msg_type == MsgType.HELLO:
                        self._writers[msg.sender_id] = writer
                    for member_id, out in self.orch.handle_message(msg, self.now_us()):
                        self._deliver(member_id, out)
                await writer.drain()
        finally:
            writer.close()


class _RealtimeClient:
    def __init__(self, participant: Participant, runner: "_RealtimeRun"):
        self.p = participant
        self.runner = runner
        self.reader: asyncio.StreamReader | None = None
        self.writer: asyncio.StreamWriter | None = None
        self.joined = asyncio.Event()
        self._tasks: list[asyncio.Task] = []

    def now_us(self) -> int:
        return (time.monotonic_ns() - self.runner.epoch_ns) // 1000

    def _send(self, msg: WireMessage):
        self.writer.write(wire.encode_message(msg))

    async def connect(self, host: str, port: int):
        self.reader, self.writer = await asyncio.open_connection(host, port)
        self._send(
            WireMessage(MsgType.HELLO, sender_id=self.p.cfg.member_id, seq=1,
                        send_ts_us=self.p.clock(self.now_us()))
        )
        await self.writer.drain()
        self._tasks.append(asyncio.create_task(self._reader_loop()))

    async def create_session(self, max_members: int) -> None:
        self._send(
            WireMessage(
                MsgType.CREATE,
                sender_id=self.p.cfg.member_id,
                seq=1,
                send_ts_us=self.p.clock(self.now_us()),
                payload=wire.encode_create(max_members),
            )
        )
        await self.writer.drain()

    async def join(self, session_id: int):
        self._send(
            WireMessage(
                MsgType.JOIN,
                session_id=session_id,
                sender_id=self.p.cfg.member_id,
                seq=1,
                send_ts_us=self.p.clock(self.now_us()),
            )
        )
        await self.writer.drain()

    async def _reader_loop(self):
        decoder = StreamDecoder()
        while True:
            data = await self.reader.read(_READ_CHUNK)
            if not data:
                break
            for msg in decoder.feed(data):
                self._dispatch(msg)

    def _dispatch(self, msg: WireMessage):
        t_recv = self.now_us()
        mid = self.p.cfg.member_id
        if msg.msg_type == MsgType.MEDIA_PC:
            self.runner.deliveries.append(
                (t_recv, msg.sender_id, mid, "media_pc", msg.wire_size(), msg.seq)
            )
            self.p.on_media(msg, self.now_us)  # render stamped after decode
        elif msg.msg_type == MsgType.MEDIA_AUDIO:
            self.runner.deliveries.append(
                (t_recv, msg.sender_id, mid, "media_audio", msg.wire_size(), msg.seq)
            )
        elif msg.msg_type == MsgType.CREATE_ACK:
            if not self.runner.session_id_future.done():
                self.runner.session_id_future.set_result(msg.session_id)
        elif msg.msg_type == MsgType.JOIN_ACK:
            seat, roster = wire.decode_join_ack(msg.payload)
            self.p.join_session(msg.session_id, seat, roster, t_recv)
            self.joined.set()
        elif msg.msg_type == MsgType.ROSTER:
            self.p.on_roster(msg)
        elif msg.msg_type == MsgType.ERROR:
            code, text = wire.decode_error(msg.payload)
            if not self.p.joined:
                self.runner.errors.append(f"member {mid}: {text}")
                self.joined.set()  # unblock the waiter; run() raises

    async def run_media(self, end_us: int):
        while True:
            due = self.p.next_due_us
            if due is None or due >= end_us:
                return
            now = self.now_us()
            if due > now:
                await asyncio.sleep((due - now) / 1e6)
            enc = self.p.capture_tick(max(due, self.now_us()))
            if enc is not None:
                self._send(self.p.media_message(enc, self.now_us()))
                await self.writer.drain()

    async def run_heartbeat(self, period_s: float, end_us: int):
        while self.now_us() < end_us:
            await asyncio.sleep(period_s)
            self._send(self.p.heartbeat_message(self.now_us()))
            await self.writer.drain()

    async def run_position(self, hz: float, end_us: int):
        while self.now_us() < end_us:
            await asyncio.sleep(1.0 / hz)
            self._send(self.p.position_message(self.now_us()))
            await self.writer.drain()

    def start_loops(self, cfg, end_us: int):
        self._tasks.append(asyncio.create_task(self.run_media(end_us)))
        if cfg.heartbeat_s > 0:
            self._tasks.append(asyncio.create_task(self.run_heartbeat(cfg.heartbeat_s, end_us)))
        if cfg.position_hz > 0:
            self._tasks.append(asyncio.create_task(self.run_position(cfg.position_hz, end_us)))

    async def close(self, session_id: int | None):
        for t in self._tasks:
            if t is not asyncio.current_task():
                t.cancel()
        if self.writer and not self.writer.is_closing():
            if session_id is not None and self.p.joined:
                self._send(
                    WireMessage(
                        MsgType.LEAVE,
                        session_id=session_id,
                        sender_id=self.p.cfg.member_id,
                        seq=1,
                        send_ts_us=self.p.clock(self.now_us()),
                    )
                )
                try:
                    await self.writer.drain()
                except (ConnectionError, asyncio.CancelledError):
                    pass
            self.writer.close()


class _RealtimeRun:
    def __init__(self, cfg):
        self.cfg = cfg
        self.epoch_ns = time.monotonic_ns()
        self.deliveries: list = []
        self.errors: list[str] = []
        self.session_id_future: asyncio.Future | None = None

    async def run(self) -> MetricsReport:
        cfg = self.cfg
        self.session_id_future = asyncio.get_running_loop().create_future()

        orch = Orchestrator()
        server = None
        if cfg.endpoint is None:
            server = OrchestratorServer(orch, self.epoch_ns)
            await server.start()
            host, port = server.host, server.port
        else:
            host, port = cfg.endpoint

        offsets = cfg.offsets()
        session_id = None
        clients: dict[int, _RealtimeClient] = {}
        for i in range(cfg.participants):
            member_id = i + 1
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
            clients[member_id] = _RealtimeClient(Participant(pcfg), self)

        try:
            for c in clients.values():
                await c.connect(host, port)
            await clients[1].create_session(cfg.participants)
            session_id = await asyncio.wait_for(self.session_id_future, timeout=5.0)
            for c in clients.values():
                await c.join(session_id)
            await asyncio.wait_for(
                asyncio.gather(*(c.joined.wait() for c in clients.values())), timeout=5.0
            )
            if self.errors:
                raise ScenarioError("; ".join(self.errors))

            end_us = clients[1].now_us() + int(cfg.duration_s * 1e6)
            for c in clients.values():
                c.start_loops(cfg, end_us)
            await asyncio.sleep(cfg.duration_s)
            await asyncio.sleep(0.5)  # drain in-flight frames
        except asyncio.TimeoutError as e:
            raise ScenarioError("orchestrator handshake timed out") from e
        finally:
            for c in clients.values():
                await c.close(session_id)
            if server is not None:
                await server.stop()

        from voxmeet.harness.scenario import build_report

        return build_report(
            cfg=cfg,
            service=ServiceTimes(),  # realtime: stage costs are actual compute
            offsets={i + 1: offsets[i] for i in range(cfg.participants)},
            clients={mid: c.p for mid, c in clients.items()},
            deliveries=sorted(self.deliveries),
            orch=orch,
            session_id=session_id,
        )


def run_realtime(cfg) -> MetricsReport:
    return asyncio.run(_RealtimeRun(cfg).run())


async def serve_forever(
    host: str = "127.0.0.1",
    port: int = wire.DEFAULT_PORT,
    max_members: int = 6,
    heartbeat_timeout_ms: int = 5_000,
    run_s: float | None = None,
    log=print,
):
    """Run a standalone orchestrator server, emitting JSON log lines.

    run_s limits the lifetime (used by tests); None serves until
    cancelled.
    """
    orch = Orchestrator(
        heartbeat_timeout_us=heartbeat_timeout_ms * 1000, max_members_cap=max_members
    )
    server = OrchestratorServer(orch, epoch_ns=time.monotonic_ns(), host=host, port=port)
    await server.start()
    log(f'{{"event": "listening", "host": "{host}", "port": {server.port}}}')
    emitted = 0
    deadline = None if run_s is None else time.monotonic() + run_s
    try:
        while deadline is None or time.monotonic() < deadline:
            await asyncio.sleep(0.5)
            for line in orch.log_lines()[emitted:]:
                log(line)
            emitted = len(orch.events)
    finally:
        orch.snapshot_stats(server.now_us())
        for line in orch.log_lines()[emitted:]:
            log(line)
        await server.stop()
    return server.port
