"""Go rules tests, anchored by an independent brute-force scoring oracle."""

import numpy as np
import pytest

from embodied import go
from embodied.go import BLACK, EMPTY, PASS, WHITE


def board_from_rows(rows, to_move=BLACK, komi=5.5):
    """Rows top-to-bottom with '.', 'X' (black), 'O' (white)."""
    size = len(rows)
    cells = [EMPTY] * (size * size)
    for top_r, row in enumerate(rows):
        assert len(row) == size
        for col, ch in enumerate(row):
            r = size - 1 - top_r
            cells[r * size + col] = {".": EMPTY, "X": BLACK, "O": WHITE}[ch]
    return go.GoBoard(size, tuple(cells), to_move, frozenset({0}), 0, komi,
                      go._digest(size, tuple(cells)))


def brute_force_score(board, komi=None):
    """Per-point reachability oracle: BFS from every empty point separately."""
    komi = board.komi if komi is None else komi
    size = board.size
    total = 0.0
    for idx in range(size * size):
        v = board.cells[idx]
        if v == BLACK:
            total += 1
        elif v == WHITE:
            total -= 1
        else:
            reaches = set()
            seen = {idx}
            stack = [idx]
            while stack:
                cur = stack.pop()
                col, row = cur % size, cur // size
                for dc, dr in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    nc, nr = col + dc, row + dr
                    if not (0 <= nc < size and 0 <= nr < size):
                        continue
                    n = nr * size + nc
                    if board.cells[n] == EMPTY:
                        if n not in seen:
                            seen.add(n)
                            stack.append(n)
                    else:
                        reaches.add(board.cells[n])
            if reaches == {BLACK}:
                total += 1
            elif reaches == {WHITE}:
                total -= 1
    return total - komi


def random_position(rng, size=7, moves=30):
    """A legal position reached by random play (passes excluded)."""
    board = go.new_board(size)
    for _ in range(moves):
        placements = [m for m in go.legal_moves(board) if m != PASS]
        if not placements:
            break
        board = go.apply_move(board, placements[rng.integers(len(placements))])
    return board


def test_capture_single_stone():
    board = board_from_rows([
        ".......",
        ".......",
        ".......",
        "...X...",
        "..XOX..",
        ".......",
        ".......",
    ], to_move=BLACK)
    # White stone at (3, 2) has one liberty left at (3, 1); black fills it.
    assert board.cells[2 * 7 + 3] == WHITE
    after = go.apply_move(board, (3, 1))
    assert after.cells[2 * 7 + 3] == EMPTY
    assert after.cells[1 * 7 + 3] == BLACK


def test_suicide_is_legal_and_removes_own_group():
    board = board_from_rows([
        ".......",
        ".......",
        ".......",
        ".......",
        ".X.....",
        "X.X....",
        ".X.....",
    ], to_move=WHITE)
    # (1, 1) is fully surrounded by black; playing there is legal suicide.
    after = go.apply_move(board, (1, 1))
    assert after.cells[1 * 7 + 1] == EMPTY
    assert after.to_move == BLACK
    # rule sets without suicide can opt out
    with pytest.raises(go.IllegalGoMove, match="suicide"):
        go.apply_move(board, (1, 1), allow_suicide=False)
    assert (1, 1) not in go.legal_moves(board, allow_suicide=False)


def test_superko_forbids_ko_recapture():
    # Smallest ko: black walls (1,0),(0,1),(1,2), white walls (2,0),(3,1),(2,2).
    # Black throws in at (2,1); white captures it at (1,1); black recapturing
    # at (2,1) would recreate the pre-capture position exactly.
    board = go.new_board(5, komi=0)
    for move in [(1, 0), (2, 0), (0, 1), (3, 1), (1, 2), (2, 2), (2, 1), (1, 1)]:
        board = go.apply_move(board, move)
    assert board.cells[1 * 5 + 2] == EMPTY  # black throw-in was captured
    assert board.cells[1 * 5 + 1] == WHITE
    with pytest.raises(go.IllegalGoMove, match="superko"):
        go.apply_move(board, (2, 1))
    # The forbidden vertex is absent from the legal move set.
    assert (2, 1) not in go.legal_moves(board)


def test_two_passes_end_the_game():
    board = go.new_board(7)
    board = go.apply_move(board, PASS)
    assert not go.is_terminal(board)
    board = go.apply_move(board, PASS)
    assert go.is_terminal(board)
    with pytest.raises(ValueError):
        go.apply_move(board, (0, 0))


def test_pass_then_move_resets_pass_count():
    board = go.new_board(7)
    board = go.apply_move(board, PASS)
    board = go.apply_move(board, (3, 3))
    assert board.consecutive_passes == 0


def test_legal_moves_on_empty_7x7_is_50():
    board = go.new_board(7)
    moves = go.legal_moves(board)
    assert len(moves) == 50
    assert PASS in moves


def test_legal_moves_terminal_empty():
    board = go.new_board(7)
    board = go.apply_move(board, PASS)
    board = go.apply_move(board, PASS)
    assert go.legal_moves(board) == []


def test_legal_moves_match_trial_application():
    rng = np.random.default_rng(7)
    for _ in range(50):
        board = random_position(rng, moves=int(rng.integers(5, 60)))
        if go.is_terminal(board):
            continue
        legal = set(go.legal_moves(board))
        trial = {PASS}
        for row in range(board.size):
            for col in range(board.size):
                try:
                    go.apply_move(board, (col, row))
                except go.IllegalGoMove:
                    continue
                trial.add((col, row))
        assert legal == trial


def test_score_empty_board():
    assert go.tromp_taylor_score(go.new_board(7)) == -5.5


def test_score_single_black_stone():
    board = go.apply_move(go.new_board(7), (3, 3))
    # 1 stone + 48 empties reaching only black = 49; minus komi 5.5.
    assert go.tromp_taylor_score(board) == 43.5


def test_score_matches_brute_force_oracle():
    rng = np.random.default_rng(11)
    for _ in range(60):
        board = random_position(rng, moves=int(rng.integers(0, 70)))
        assert go.tromp_taylor_score(board) == brute_force_score(board)


def test_score_antisymmetric_under_color_swap():
    rng = np.random.default_rng(3)
    for _ in range(20):
        board = random_position(rng, moves=25)
        swapped_cells = tuple(
            {EMPTY: EMPTY, BLACK: WHITE, WHITE: BLACK}[v] for v in board.cells)
        swapped = go.GoBoard(board.size, swapped_cells, board.to_move,
                             frozenset({0}), 0, board.komi,
                             go._digest(board.size, swapped_cells))
        assert go.tromp_taylor_score(board, 0) == -go.tromp_taylor_score(swapped, 0)


def test_no_zero_liberty_groups_after_play():
    rng = np.random.default_rng(23)
    for _ in range(20):
        board = random_position(rng, moves=40)
        for idx, v in enumerate(board.cells):
            if v != EMPTY:
                _, libs = go._group(board.size, board.cells, idx)
                assert libs, f"group at {idx} has no liberties"


def test_position_history_grows_per_stone_move():
    rng = np.random.default_rng(5)
    board = go.new_board(7)
    for _ in range(20):
        placements = [m for m in go.legal_moves(board) if m != PASS]
        if not placements:
            break
        before = len(board.position_history)
        board = go.apply_move(board, placements[rng.integers(len(placements))])
        assert len(board.position_history) == before + 1


def test_zobrist_digests_match_full_board_tracking():
    # Digest-based superko must agree with exact position-set tracking.
    rng = np.random.default_rng(31)
    for _ in range(10):
        board = go.new_board(5, komi=0)
        seen_positions = {board.cells}
        for _ in range(80):
            if go.is_terminal(board):
                break
            placements = [m for m in go.legal_moves(board) if m != PASS]
            if not placements:
                break
            board = go.apply_move(board, placements[rng.integers(len(placements))])
            assert board.cells not in seen_positions, "superko missed a repeat"
            seen_positions.add(board.cells)


def test_sgf_export_minimal_properties():
    board = go.new_board(7)
    moves = [(BLACK, (3, 3)), (WHITE, (2, 2)), (BLACK, PASS)]
    sgf = go.to_sgf(7, 5.5, moves, result="B+3.5")
    assert sgf.startswith("(;GM[1]FF[4]SZ[7]KM[5.5]RE[B+3.5]")
    assert ";B[dd]" in sgf  # (3,3): col d, row 3 from bottom = row d from top
    assert ";W[ce]" in sgf
    assert ";B[]" in sgf
    assert sgf.endswith(")")


def test_board_size_below_5_rejected():
    with pytest.raises(ValueError):
        go.new_board(4)
