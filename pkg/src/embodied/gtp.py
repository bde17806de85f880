"""Go Text Protocol v2: vertex codec and a client session over child-process pipes.

Requests are ``[id] command args\\n``; responses start with ``=`` (success)
or ``?`` (failure) followed by the echoed id, and are terminated by a
blank line. One command is in flight at a time.
"""

from __future__ import annotations

import os
import select
import shlex
import subprocess
import time
from typing import Union

from embodied.go import PASS, Vertex

# Column letters skip "I" by convention.
GTP_COLUMNS = "ABCDEFGHJKLMNOPQRST"

Move = Union[Vertex, str]

DEFAULT_TIMEOUT = 10.0


class VertexParseError(ValueError):
    pass


class GtpTransportError(RuntimeError):
    """Engine exit, malformed framing, or timeout; the session is unusable."""


class GtpEngineError(RuntimeError):
    """The engine answered with a ``?`` failure response."""


def parse_vertex(text: str, size: int) -> Move:
    t = text.strip().upper()
    if t == "PASS":
        return PASS
    if len(t) < 2 or t[0] not in GTP_COLUMNS[:size]:
        raise VertexParseError(f"bad vertex {text!r} for size {size}")
    col = GTP_COLUMNS.index(t[0])
    try:
        row = int(t[1:]) - 1
    except ValueError as e:
        raise VertexParseError(f"bad vertex {text!r}") from e
    if not 0 <= row < size or col >= size:
        raise VertexParseError(f"vertex {text!r} out of range for size {size}")
    return (col, row)


def format_vertex(col: int, row: int, size: int) -> str:
    if not (0 <= col < size and 0 <= row < size):
        raise VertexParseError(f"vertex ({col},{row}) out of range for size {size}")
    return f"{GTP_COLUMNS[col]}{row + 1}"


def format_move(move: Move, size: int) -> str:
    if move == PASS:
        return "pass"
    return format_vertex(move[0], move[1], size)


class GtpSession:
    """Serialized GTP exchange with an engine child process."""

    def __init__(self, engine_command: Union[str, list[str]],
                 timeout: float = DEFAULT_TIMEOUT):
        argv = shlex.split(engine_command) if isinstance(engine_command, str) \
            else list(engine_command)
        try:
            self._proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL)
        except OSError as e:
            raise GtpTransportError(f"failed to launch engine {argv!r}: {e}") from e
        self._timeout = timeout
        self._buf = b""
        self._next_id = 1
        self._dead = False

    def _fail(self, message: str) -> GtpTransportError:
        self._dead = True
        return GtpTransportError(message)

    def _read_line(self, deadline: float) -> str:
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise self._fail("timeout waiting for engine response")
            ready, _, _ = select.select([self._proc.stdout], [], [], remaining)
            if not ready:
                raise self._fail("timeout waiting for engine response")
            chunk = os.read(self._proc.stdout.fileno(), 4096)
            if not chunk:
                raise self._fail("engine closed its output stream")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode("utf-8", "replace").rstrip("\r")

    def send(self, command_text: str) -> str:
        """Send one command; returns the success payload, raises on ``?``."""
        if self._dead:
            raise GtpTransportError("session is unusable after a transport error")
        if self._proc.poll() is not None:
            raise self._fail("engine process has exited")
        cmd_id = self._next_id
        self._next_id += 1
        try:
            self._proc.stdin.write(f"{cmd_id} {command_text}\n".encode())
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise self._fail(f"engine pipe closed: {e}") from e

        deadline = time.monotonic() + self._timeout
        first = self._read_line(deadline)
        while first == "":
            first = self._read_line(deadline)
        if not first or first[0] not in "=?":
            raise self._fail(f"malformed response line {first!r}")
        status, rest = first[0], first[1:]
        echoed = ""
        i = 0
        while i < len(rest) and rest[i].isdigit():
            echoed += rest[i]
            i += 1
        if echoed and int(echoed) != cmd_id:
            raise self._fail(f"response id {echoed} does not match request {cmd_id}")
        lines = [rest[i:].strip()]
        while True:
            line = self._read_line(deadline)
            if line == "":
                break
            lines.append(line)
        payload = "\n".join(lines).strip()
        if status == "?":
            raise GtpEngineError(payload or "engine error")
        return payload

    @property
    def alive(self) -> bool:
        return not self._dead and self._proc.poll() is None

    def close(self):
        if self._proc.poll() is None:
            try:
                if not self._dead:
                    self._proc.stdin.write(b"quit\n")
                    self._proc.stdin.flush()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._dead = True

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def gtp_connect(engine_command: Union[str, list[str]],
                timeout: float = DEFAULT_TIMEOUT) -> GtpSession:
    return GtpSession(engine_command, timeout)


def gtp_send(session: GtpSession, command_text: str) -> str:
    return session.send(command_text)
