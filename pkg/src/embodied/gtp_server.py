"""Bundled GTP v2 engine: run with ``python -m embodied.gtp_server``.

Wraps the native Go rules with the greedy fallback policy, so the suite
can exercise the GTP client against a real child process without an
external Go program installed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from embodied import go, gtp
from embodied.go import BLACK, WHITE
from embodied.opponents import fallback_go_policy

KNOWN_COMMANDS = (
    "protocol_version", "name", "version", "known_command", "list_commands",
    "boardsize", "clear_board", "komi", "level", "play", "genmove", "quit",
)


class GtpServer:
    def __init__(self, epsilon: float = 0.0, seed: int = 0):
        self.size = 19
        self.komi = go.DEFAULT_KOMI
        self.board = go.new_board(7, self.komi)
        self.epsilon = epsilon
        self.rng = np.random.default_rng(seed)
        self._resize(7)

    def _resize(self, size: int):
        self.size = size
        self.board = go.new_board(size, self.komi)

    def handle(self, command: str, args: list[str]) -> str:
        if command == "protocol_version":
            return "2"
        if command == "name":
            return "embodied-fallback"
        if command == "version":
            return "1"
        if command == "known_command":
            return "true" if args and args[0] in KNOWN_COMMANDS else "false"
        if command == "list_commands":
            return "\n".join(KNOWN_COMMANDS)
        if command == "boardsize":
            self._resize(int(args[0]))
            return ""
        if command == "clear_board":
            self._resize(self.size)
            return ""
        if command == "komi":
            self.komi = float(args[0])
            self.board = go.new_board(self.size, self.komi)
            return ""
        if command == "level":
            return ""
        if command == "play":
            color = BLACK if args[0].lower().startswith("b") else WHITE
            move = gtp.parse_vertex(args[1], self.size)
            if color != self.board.to_move:
                # GTP allows out-of-turn placements; realign the mover.
                self.board = go.GoBoard(
                    self.board.size, self.board.cells, color,
                    self.board.position_history, self.board.consecutive_passes,
                    self.board.komi, self.board.digest)
            self.board = go.apply_move(self.board, move)
            return ""
        if command == "genmove":
            color = BLACK if args[0].lower().startswith("b") else WHITE
            if color != self.board.to_move:
                self.board = go.GoBoard(
                    self.board.size, self.board.cells, color,
                    self.board.position_history, self.board.consecutive_passes,
                    self.board.komi, self.board.digest)
            legal = go.legal_moves(self.board)
            if not legal:
                return "pass"
            if self.epsilon > 0 and self.rng.random() < self.epsilon:
                move = legal[self.rng.integers(len(legal))]
            else:
                move = fallback_go_policy(self.board)
            self.board = go.apply_move(self.board, move)
            return gtp.format_move(move, self.size)
        raise KeyError(command)


def serve(stdin=None, stdout=None, epsilon: float = 0.0, seed: int = 0):
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    server = GtpServer(epsilon=epsilon, seed=seed)
    for raw in stdin:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        cmd_id = ""
        if parts[0].isdigit():
            cmd_id = parts[0]
            parts = parts[1:]
        if not parts:
            continue
        command, args = parts[0], parts[1:]
        try:
            if command == "quit":
                stdout.write(f"={cmd_id}\n\n")
                stdout.flush()
                return
            payload = server.handle(command, args)
        except KeyError:
            stdout.write(f"?{cmd_id} unknown command\n\n")
        except (go.IllegalGoMove, gtp.VertexParseError, ValueError, IndexError) as e:
            stdout.write(f"?{cmd_id} {e}\n\n")
        else:
            sep = " " if payload else ""
            stdout.write(f"={cmd_id}{sep}{payload}\n\n")
        stdout.flush()


def main(argv=None):
    parser = argparse.ArgumentParser(description="Built-in GTP Go engine")
    parser.add_argument("--epsilon", type=float, default=0.0,
                        help="probability of a uniform random move per genmove")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    serve(epsilon=args.epsilon, seed=args.seed)


if __name__ == "__main__":
    main()
