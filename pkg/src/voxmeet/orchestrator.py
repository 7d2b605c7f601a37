"""Session and stream management: admission, seating, relay, liveness.

The orchestrator is transport-agnostic: every operation returns the set
of (recipient_id, WireMessage) deliveries the transport should perform.
Media is forwarded verbatim (payload untouched) to every session member
except the sender; there is no transcoding, buffering, or pacing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from voxmeet import wire
from voxmeet.errors import (
    AlreadyJoined,
    ConfigError,
    NoSuchSession,
    NotAMember,
    SessionFull,
)
from voxmeet.wire import MsgType, WireMessage

ORCHESTRATOR_ID = 0
DEFAULT_HEARTBEAT_TIMEOUT_US = 5_000_000
MAX_MEMBERS_CAP = 6


@dataclass
class MemberState:
    member_id: int
    last_heartbeat_us: int = 0
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    orientation: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 1.0)
    media_seq_high: int = 0

    def touch(self, now_us: int):
        # last_heartbeat_us is monotone: late-arriving events never rewind it
        if now_us > self.last_heartbeat_us:
            self.last_heartbeat_us = now_us


@dataclass
class Session:
    session_id: int
    max_members: int
    created_ts_us: int
    members: dict[int, MemberState] = field(default_factory=dict)
    seat_assignments: dict[int, int] = field(default_factory=dict)

    def lowest_free_seat(self) -> int:
        taken = set(self.seat_assignments.values())
        return next(i for i in range(self.max_members) if i not in taken)


@dataclass
class RelayStats:
    frames_in: int = 0
    frames_out: int = 0
    bytes_in: int = 0
    bytes_out: int = 0
    drops: int = 0

    def as_dict(self) -> dict:
        return {
            "frames_in": self.frames_in,
            "frames_out": self.frames_out,
            "bytes_in": self.bytes_in,
            "bytes_out": self.bytes_out,
            "drops": self.drops,
        }


Delivery = tuple[int, WireMessage]


class Orchestrator:
    """Single relay instance serving any number of sessions."""

    def __init__(
        self,
        heartbeat_timeout_us: int = DEFAULT_HEARTBEAT_TIMEOUT_US,
        max_members_cap: int = MAX_MEMBERS_CAP,
    ):
        self.heartbeat_timeout_us = heartbeat_timeout_us
        self.max_members_cap = min(max_members_cap, MAX_MEMBERS_CAP)
        self.sessions: dict[int, Session] = {}
        self.stats: dict[tuple[int, int], RelayStats] = {}
        self.events: list[dict] = []
        self._next_session_id = 1
        self._seq: dict[MsgType, int] = {}

    # --- internals -----------------------------------------------------

    def _next_seq(self, msg_type: MsgType) -> int:
        self._seq[msg_type] = self._seq.get(msg_type, 0) + 1
        return self._seq[msg_type]

    def _log(self, event: str, now_us: int, **fields):
        self.events.append({"t_us": now_us, "event": event, **fields})

    def _make(
        self, msg_type: MsgType, session_id: int, payload: bytes, now_us: int
    ) -> WireMessage:
        return WireMessage(
            msg_type=msg_type,
            session_id=session_id,
            sender_id=ORCHESTRATOR_ID,
            seq=self._next_seq(msg_type),
            send_ts_us=now_us,
            payload=payload,
        )

    def _session(self, session_id: int) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise NoSuchSession(f"session {session_id} does not exist") from None

    def _roster_broadcast(
        self, session: Session, now_us: int, exclude: int | None = None
    ) -> list[Delivery]:
        payload = wire.encode_roster(session.seat_assignments)
        return [
            (mid, self._make(MsgType.ROSTER, session.session_id, payload, now_us))
            for mid in session.members
            if mid != exclude
        ]

    def _stat(self, session_id: int, sender_id: int) -> RelayStats:
        return self.stats.setdefault((session_id, sender_id), RelayStats())

    # --- session lifecycle ----------------------------------------------

    def create_session(self, max_members: int, now_us: int = 0) -> int:
        if not 2 <= max_members <= self.max_members_cap:
            raise ConfigError(f"max_members must be in [2, {self.max_members_cap}]")
        session_id = self._next_session_id
        self._next_session_id += 1
        self.sessions[session_id] = Session(
            session_id=session_id, max_members=max_members, created_ts_us=now_us
        )
        self._log("create", now_us, session_id=session_id, max_members=max_members)
        return session_id

    def join(self, session_id: int, member_id: int, now_us: int = 0):
        """Admit a member. Returns (seat, roster, deliveries): the roster
        snapshot for the JOIN_ACK plus ROSTER broadcasts to the others."""
        session = self._session(session_id)
        if member_id in session.members:
            raise AlreadyJoined(f"member {member_id} already in session {session_id}")
        if len(session.members) >= session.max_members:
            raise SessionFull(f"session {session_id} is full")
        seat = session.lowest_free_seat()
        session.members[member_id] = MemberState(member_id, last_heartbeat_us=now_us)
        session.seat_assignments[member_id] = seat
        self._log("join", now_us, session_id=session_id, member_id=member_id, seat=seat)
        deliveries = self._roster_broadcast(session, now_us, exclude=member_id)
        return seat, dict(session.seat_assignments), deliveries

    def leave(self, session_id: int, member_id: int, now_us: int = 0) -> list[Delivery]:
        session = self._session(session_id)
        if member_id not in session.members:
            raise NotAMember(f"member {member_id} not in session {session_id}")
        del session.members[member_id]
        del session.seat_assignments[member_id]
        self._log("leave", now_us, session_id=session_id, member_id=member_id)
        if not session.members:
            del self.sessions[session_id]
            self._log("destroy", now_us, session_id=session_id)
            return []
        return self._roster_broadcast(session, now_us)

    # --- relaying --------------------------------------------------------

    def route_media(self, msg: WireMessage, now_us: int | None = None) -> list[Delivery]:
        """Forward a media message verbatim to all other session members.

        now_us is the relay-clock arrival time used for liveness; it
        defaults to the sender's timestamp (adequate when clocks share an
        epoch, as in simulated runs).
        """
        session = self._session(msg.session_id)
        sender = session.members.get(msg.sender_id)
        if sender is None:
            self._stat(msg.session_id, msg.sender_id).drops += 1
            raise NotAMember(f"sender {msg.sender_id} not in session {msg.session_id}")
        sender.touch(msg.send_ts_us if now_us is None else now_us)
        if msg.msg_type == MsgType.MEDIA_PC and msg.seq > sender.media_seq_high:
            sender.media_seq_high = msg.seq
        recipients = [mid for mid in session.members if mid != msg.sender_id]
        stat = self._stat(msg.session_id, msg.sender_id)
        stat.frames_in += 1
        stat.bytes_in += msg.wire_size()
        stat.frames_out += len(recipients)
        stat.bytes_out += msg.wire_size() * len(recipients)
        return [(mid, msg) for mid in recipients]

    def route_position(self, msg: WireMessage, now_us: int | None = None) -> list[Delivery]:
        """As route_media, additionally storing the sender's pose."""
        session = self._session(msg.session_id)
        sender = session.members.get(msg.sender_id)
        if sender is None:
            self._stat(msg.session_id, msg.sender_id).drops += 1
            raise NotAMember(f"sender {msg.sender_id} not in session {msg.session_id}")
        pos, quat = wire.decode_position(msg.payload)
        sender.position = pos
        sender.orientation = quat
        sender.touch(msg.send_ts_us if now_us is None else now_us)
        return [(mid, msg) for mid in session.members if mid != msg.sender_id]

    def heartbeat(self, msg: WireMessage, now_us: int | None = None):
        session = self.sessions.get(msg.session_id)
        if session and msg.sender_id in session.members:
            session.members[msg.sender_id].touch(
                msg.send_ts_us if now_us is None else now_us
            )

    def heartbeat_tick(self, now_us: int):
        """Expire silent members. Returns (expired_ids, deliveries)."""
        expired: list[tuple[int, int]] = []
        for session in list(self.sessions.values()):
            for mid, state in list(session.members.items()):
                if now_us - state.last_heartbeat_us > self.heartbeat_timeout_us:
                    expired.append((session.session_id, mid))

        deliveries: list[Delivery] = []
        for session_id, mid in expired:
            session = self.sessions.get(session_id)
            if session is None:
                continue
            del session.members[mid]
            del session.seat_assignments[mid]
            self._log("expire", now_us, session_id=session_id, member_id=mid)
            if not session.members:
                del self.sessions[session_id]
                self._log("destroy", now_us, session_id=session_id)
                continue
            err = wire.encode_error(wire.ERR_PEER_TIMEOUT, f"member {mid} timed out")
            for other in session.members:
                deliveries.append(
                    (other, self._make(MsgType.ERROR, session_id, err, now_us))
                )
            deliveries.extend(self._roster_broadcast(session, now_us))
        return [mid for _, mid in expired], deliveries

    # --- wire-level entry point -------------------------------------------

    def handle_message(self, msg: WireMessage, now_us: int) -> list[Delivery]:
        """Dispatch one inbound message, converting errors to ERROR replies."""
        try:
            if msg.msg_type == MsgType.HELLO:
                return [(msg.sender_id, self._make(MsgType.HELLO_ACK, 0, b"", now_us))]
            if msg.msg_type == MsgType.CREATE:
                sid = self.create_session(wire.decode_create(msg.payload), now_us)
                return [(msg.sender_id, self._make(MsgType.CREATE_ACK, sid, b"", now_us))]
            if msg.msg_type == MsgType.JOIN:
                seat, roster, deliveries = self.join(
                    msg.session_id, msg.sender_id, now_us
                )
                ack = self._make(
                    MsgType.JOIN_ACK,
                    msg.session_id,
                    wire.encode_join_ack(seat, roster),
                    now_us,
                )
                return [(msg.sender_id, ack)] + deliveries
            if msg.msg_type == MsgType.LEAVE:
                return self.leave(msg.session_id, msg.sender_id, now_us)
            if msg.msg_type in (MsgType.MEDIA_PC, MsgType.MEDIA_AUDIO):
                return self.route_media(msg, now_us)
            if msg.msg_type == MsgType.POSITION:
                return self.route_position(msg, now_us)
            if msg.msg_type == MsgType.HEARTBEAT:
                self.heartbeat(msg, now_us)
                return []
        except (NoSuchSession, SessionFull, AlreadyJoined, NotAMember, ConfigError) as e:
            code = {
                NoSuchSession: wire.ERR_NO_SUCH_SESSION,
                SessionFull: wire.ERR_SESSION_FULL,
                AlreadyJoined: wire.ERR_ALREADY_JOINED,
                NotAMember: wire.ERR_NOT_A_MEMBER,
                ConfigError: wire.ERR_BAD_REQUEST,
            }[type(e)]
            self._log(
                "error", now_us, code=code, detail=str(e), sender_id=msg.sender_id
            )
            reply = self._make(
                MsgType.ERROR, msg.session_id, wire.encode_error(code, str(e)), now_us
            )
            return [(msg.sender_id, reply)]
        return []

    # --- reporting ---------------------------------------------------------

    def snapshot_stats(self, now_us: int):
        snapshot = {
            f"{sid}:{sender}": stat.as_dict()
            for (sid, sender), stat in sorted(self.stats.items())
        }
        self._log("relay_snapshot", now_us, stats=snapshot)
        return snapshot

    def log_lines(self) -> list[str]:
        """Structured log: one JSON object per event."""
        return [json.dumps(e, sort_keys=True) for e in self.events]
