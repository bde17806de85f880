"""GTP vertex codec and client framing against scripted engines."""

import sys
from pathlib import Path

import pytest

from embodied import go, gtp
from embodied.gtp import (
    GtpEngineError, GtpSession, GtpTransportError, VertexParseError,
    format_vertex, gtp_connect, gtp_send, parse_vertex,
)

FAKE = [sys.executable, str(Path(__file__).parent / "fake_gtp_engine.py")]
BUILTIN = [sys.executable, "-m", "embodied.gtp_server"]


def test_parse_a1_is_origin():
    assert parse_vertex("A1", 9) == (0, 0)


def test_parse_pass():
    assert parse_vertex("pass", 9) == go.PASS
    assert parse_vertex("PASS", 9) == go.PASS


def test_parse_j9_skips_i_column():
    assert parse_vertex("J9", 9) == (8, 8)


def test_parse_out_of_range():
    with pytest.raises(VertexParseError):
        parse_vertex("J10", 9)
    with pytest.raises(VertexParseError):
        parse_vertex("Z3", 9)
    with pytest.raises(VertexParseError):
        parse_vertex("A0", 9)
    with pytest.raises(VertexParseError):
        parse_vertex("I5", 9)  # the letter I is never a valid column


def test_round_trip_all_vertices_sizes_5_to_19():
    for size in range(5, 20):
        for col in range(size):
            for row in range(size):
                text = format_vertex(col, row, size)
                assert "I" not in text
                assert parse_vertex(text, size) == (col, row)


def test_format_out_of_range():
    with pytest.raises(VertexParseError):
        format_vertex(7, 0, 7)


def test_success_response_empty_payload():
    with gtp_connect(FAKE) as session:
        assert gtp_send(session, "boardsize 7") == ""


def test_success_response_with_payload():
    with gtp_connect(FAKE) as session:
        assert gtp_send(session, "protocol_version") == "2"
        assert gtp_send(session, "genmove black") == "D4"


def test_failure_response_raises_engine_error():
    with gtp_connect(FAKE) as session:
        with pytest.raises(GtpEngineError, match="deliberate failure"):
            gtp_send(session, "fail")
        # engine errors do not poison the session
        assert gtp_send(session, "protocol_version") == "2"


def test_multiline_payload_terminated_by_blank_line():
    with gtp_connect(FAKE + ["multiline"]) as session:
        assert gtp_send(session, "list_commands") == "one\ntwo\nthree"


def test_malformed_response_is_transport_error():
    with gtp_connect(FAKE + ["garbage"]) as session:
        with pytest.raises(GtpTransportError, match="malformed"):
            gtp_send(session, "protocol_version")
        with pytest.raises(GtpTransportError, match="unusable"):
            gtp_send(session, "protocol_version")


def test_timeout_is_transport_error():
    session = GtpSession(FAKE + ["silent"], timeout=0.3)
    with pytest.raises(GtpTransportError, match="timeout"):
        session.send("protocol_version")
    session.close()


def test_engine_death_is_transport_error_and_session_unusable():
    session = gtp_connect(FAKE + ["die"])
    with pytest.raises(GtpTransportError):
        session.send("protocol_version")
    assert not session.alive
    with pytest.raises(GtpTransportError):
        session.send("protocol_version")
    session.close()


def test_engine_launch_failure():
    with pytest.raises(GtpTransportError, match="launch"):
        gtp_connect(["/nonexistent/engine-binary"])


def test_builtin_engine_full_session():
    with gtp_connect(BUILTIN) as session:
        assert session.send("protocol_version") == "2"
        session.send("boardsize 7")
        session.send("komi 5.5")
        session.send("clear_board")
        session.send("play black D4")
        reply = session.send("genmove white")
        move = gtp.parse_vertex(reply, 7)
        board = go.apply_move(go.new_board(7), (3, 3))
        assert move in go.legal_moves(board)
        with pytest.raises(GtpEngineError, match="unknown"):
            session.send("bogus_command")


def test_builtin_engine_genmoves_are_legal_through_a_game():
    with gtp_connect(BUILTIN) as session:
        session.send("boardsize 7")
        session.send("komi 5.5")
        session.send("clear_board")
        board = go.new_board(7)
        color = "black"
        for _ in range(40):
            if go.is_terminal(board):
                break
            reply = session.send(f"genmove {color}")
            move = gtp.parse_vertex(reply, 7)
            assert move in go.legal_moves(board), f"illegal engine move {reply}"
            board = go.apply_move(board, move)
            color = "white" if color == "black" else "black"
