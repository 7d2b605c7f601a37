"""Session admission, seating, relay fan-out, and liveness expiry."""

import json

import pytest

from voxmeet import wire
from voxmeet.errors import (
    AlreadyJoined,
    ConfigError,
    NoSuchSession,
    NotAMember,
    SessionFull,
)
from voxmeet.orchestrator import Orchestrator
from voxmeet.wire import MsgType, WireMessage


def media(session_id, sender_id, seq, payload=b"frame", ts=0):
    return WireMessage(
        MsgType.MEDIA_PC,
        session_id=session_id,
        sender_id=sender_id,
        seq=seq,
        send_ts_us=ts,
        payload=payload,
    )


def session_with(orch, members, max_members=6):
    sid = orch.create_session(max_members)
    for m in members:
        orch.join(sid, m)
    return sid


class TestCreate:
    def test_create_returns_valid_id(self):
        assert Orchestrator().create_session(4) > 0

    def test_max_one_rejected(self):
        with pytest.raises(ConfigError):
            Orchestrator().create_session(1)

    def test_max_seven_rejected(self):
        with pytest.raises(ConfigError):
            Orchestrator().create_session(7)

    def test_two_creates_distinct(self):
        orch = Orchestrator()
        assert orch.create_session(4) != orch.create_session(4)


class TestJoinLeave:
    def test_sequential_seating(self):
        orch = Orchestrator()
        sid = orch.create_session(4)
        seats = [orch.join(sid, m)[0] for m in (10, 11, 12, 13)]
        assert seats == [0, 1, 2, 3]

    def test_fifth_join_into_max_four(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2, 3, 4), max_members=4)
        with pytest.raises(SessionFull):
            orch.join(sid, 5)

    def test_seventh_join_into_max_six(self):
        orch = Orchestrator()
        sid = session_with(orch, range(1, 7), max_members=6)
        with pytest.raises(SessionFull):
            orch.join(sid, 7)

    def test_duplicate_join(self):
        orch = Orchestrator()
        sid = session_with(orch, (1,), max_members=4)
        with pytest.raises(AlreadyJoined):
            orch.join(sid, 1)

    def test_join_unknown_session(self):
        with pytest.raises(NoSuchSession):
            Orchestrator().join(99, 1)

    def test_freed_middle_seat_reused(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2, 3), max_members=4)
        orch.leave(sid, 2)
        seat, _, _ = orch.join(sid, 4)
        assert seat == 1

    def test_last_leave_destroys_session(self):
        orch = Orchestrator()
        sid = session_with(orch, (1,), max_members=2)
        orch.leave(sid, 1)
        with pytest.raises(NoSuchSession):
            orch.join(sid, 2)

    def test_double_leave(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2), max_members=2)
        orch.leave(sid, 1)
        with pytest.raises(NotAMember):
            orch.leave(sid, 1)

    def test_join_broadcasts_roster_to_others(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2))
        _, roster, deliveries = orch.join(sid, 3)
        assert roster == {1: 0, 2: 1, 3: 2}
        assert sorted(mid for mid, _ in deliveries) == [1, 2]
        for _, msg in deliveries:
            assert wire.decode_roster(msg.payload) == roster


class TestRouteMedia:
    def test_fan_out_excludes_sender(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2, 3, 4), max_members=4)
        deliveries = orch.route_media(media(sid, 1, seq=1))
        assert sorted(mid for mid, _ in deliveries) == [2, 3, 4]

    def test_two_member_session_single_recipient(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2), max_members=2)
        deliveries = orch.route_media(media(sid, 2, seq=1))
        assert [mid for mid, _ in deliveries] == [1]

    def test_payload_forwarded_verbatim(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2), max_members=2)
        msg = media(sid, 1, seq=1, payload=b"\x00\xff" * 100)
        [(_, out)] = orch.route_media(msg)
        assert out is msg  # same object: payload untouched

    def test_sequence_order_preserved_per_receiver(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2, 3), max_members=4)
        log = {2: [], 3: []}
        for seq in range(1, 101):
            for mid, msg in orch.route_media(media(sid, 1, seq=seq)):
                log[mid].append(msg.seq)
        for seqs in log.values():
            assert seqs == sorted(seqs) and len(set(seqs)) == 100

    def test_non_member_sender(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2), max_members=2)
        with pytest.raises(NotAMember):
            orch.route_media(media(sid, 99, seq=1))

    def test_unknown_session(self):
        with pytest.raises(NoSuchSession):
            Orchestrator().route_media(media(123, 1, seq=1))

    def test_no_cross_session_leakage(self):
        orch = Orchestrator()
        sid_a = session_with(orch, (1, 2), max_members=2)
        sid_b = session_with(orch, (3, 4), max_members=2)
        for mid, _ in orch.route_media(media(sid_a, 1, seq=1)):
            assert mid in (2,)
        for mid, _ in orch.route_media(media(sid_b, 3, seq=1)):
            assert mid in (4,)

    def test_relay_stats_fanout_identity(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2, 3, 4), max_members=4)
        for seq in range(1, 11):
            orch.route_media(media(sid, 1, seq=seq))
        stat = orch.stats[(sid, 1)]
        assert stat.frames_in == 10
        assert stat.frames_out == 10 * 3
        assert stat.bytes_out == stat.bytes_in * 3
        assert stat.drops == 0


class TestRoutePosition:
    def position(self, sid, sender, pos):
        return WireMessage(
            MsgType.POSITION,
            session_id=sid,
            sender_id=sender,
            seq=1,
            payload=wire.encode_position(pos, (0.0, 0.0, 0.0, 1.0)),
        )

    def test_fan_out_and_state_update(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2, 3), max_members=4)
        deliveries = orch.route_position(self.position(sid, 2, (1.0, 2.0, 3.0)))
        assert sorted(mid for mid, _ in deliveries) == [1, 3]
        assert orch.sessions[sid].members[2].position == (1.0, 2.0, 3.0)

    def test_stored_position_is_last_received(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2), max_members=2)
        orch.route_position(self.position(sid, 1, (1.0, 0.0, 0.0)))
        orch.route_position(self.position(sid, 1, (2.0, 0.0, 0.0)))
        assert orch.sessions[sid].members[1].position == (2.0, 0.0, 0.0)

    def test_non_member(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2), max_members=2)
        with pytest.raises(NotAMember):
            orch.route_position(self.position(sid, 9, (0.0, 0.0, 0.0)))


class TestHeartbeat:
    def test_fresh_members_not_expired(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2), max_members=2)
        for m in (1, 2):
            orch.heartbeat(
                WireMessage(MsgType.HEARTBEAT, session_id=sid, sender_id=m, send_ts_us=4_000_000)
            )
        expired, _ = orch.heartbeat_tick(5_000_000)
        assert expired == []

    def test_silent_member_expired(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2, 3), max_members=4)
        for m in (1, 2):
            orch.heartbeat(
                WireMessage(MsgType.HEARTBEAT, session_id=sid, sender_id=m, send_ts_us=6_000_000)
            )
        expired, deliveries = orch.heartbeat_tick(6_000_000)
        assert expired == [3]
        kinds = {(mid, msg.msg_type) for mid, msg in deliveries}
        # survivors get ERROR(PEER_TIMEOUT) and a fresh ROSTER
        assert (1, MsgType.ERROR) in kinds and (2, MsgType.ROSTER) in kinds
        errs = [m for _, m in deliveries if m.msg_type == MsgType.ERROR]
        assert all(wire.decode_error(m.payload)[0] == wire.ERR_PEER_TIMEOUT for m in errs)

    def test_expiry_then_rejoin(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2), max_members=2)
        orch.heartbeat(
            WireMessage(MsgType.HEARTBEAT, session_id=sid, sender_id=1, send_ts_us=9_000_000)
        )
        expired, _ = orch.heartbeat_tick(9_000_000)
        assert expired == [2]
        seat, _, _ = orch.join(sid, 2, now_us=9_100_000)
        assert seat == 1

    def test_media_counts_as_liveness(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2), max_members=2)
        orch.route_media(media(sid, 1, seq=1, ts=7_000_000))
        orch.route_media(media(sid, 2, seq=1, ts=7_000_000))
        expired, _ = orch.heartbeat_tick(7_000_000)
        assert expired == []


class TestHandleMessage:
    def test_create_join_flow(self):
        orch = Orchestrator()
        out = orch.handle_message(
            WireMessage(MsgType.CREATE, sender_id=1, payload=wire.encode_create(4)), 0
        )
        [(to, ack)] = out
        assert to == 1 and ack.msg_type == MsgType.CREATE_ACK
        sid = ack.session_id
        out = orch.handle_message(
            WireMessage(MsgType.JOIN, session_id=sid, sender_id=1), 0
        )
        assert out[0][1].msg_type == MsgType.JOIN_ACK
        seat, roster = wire.decode_join_ack(out[0][1].payload)
        assert seat == 0 and roster == {1: 0}

    def test_error_reply_for_unknown_session(self):
        orch = Orchestrator()
        out = orch.handle_message(
            WireMessage(MsgType.JOIN, session_id=42, sender_id=1), 0
        )
        [(to, err)] = out
        assert to == 1 and err.msg_type == MsgType.ERROR
        code, _ = wire.decode_error(err.payload)
        assert code == wire.ERR_NO_SUCH_SESSION

    def test_non_member_media_gets_error_reply(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2), max_members=2)
        out = orch.handle_message(media(sid, 77, seq=1), 0)
        [(to, err)] = out
        assert to == 77 and err.msg_type == MsgType.ERROR
        assert wire.decode_error(err.payload)[0] == wire.ERR_NOT_A_MEMBER

    def test_log_lines_are_json(self):
        orch = Orchestrator()
        sid = session_with(orch, (1, 2), max_members=2)
        orch.leave(sid, 1)
        orch.snapshot_stats(1_000)
        for line in orch.log_lines():
            assert isinstance(json.loads(line), dict)
