"""Sokoban rules, Boxoban parsing, and level generation."""

import numpy as np
import pytest

from embodied import sokoban
from embodied.sokoban import (
    CURRICULUM, Direction, IllegalMove, LevelParseError, apply_move,
    format_level, format_levels, generate_level, is_solved, legal_moves,
    level_spec, parse_level, parse_levels, pad_level,
)

SIMPLE = """\
#####
#@$.#
#   #
#####"""


def test_parse_player_box_target_row():
    state = parse_level(SIMPLE)
    assert state.player == (1, 1)
    assert state.boxes == frozenset({(1, 2)})
    assert state.targets == frozenset({(1, 3)})
    assert (0, 0) in state.walls and (3, 4) in state.walls


def test_parse_box_on_target_cell():
    state = parse_level("#####\n#@* #\n#####")
    assert state.boxes == frozenset({(1, 2)})
    assert state.targets == frozenset({(1, 2)})
    assert is_solved(state)


def test_parse_player_on_target():
    state = parse_level("#####\n#+$ #\n#####")
    assert state.player == (1, 1)
    assert state.targets == frozenset({(1, 1)})
    assert state.boxes == frozenset({(1, 2)})


def test_parse_two_players_is_error():
    with pytest.raises(LevelParseError) as err:
        parse_level("#####\n#@@.#\n##$##")
    assert "second player" in str(err.value)
    assert err.value.line == 2 and err.value.col == 3


def test_parse_unknown_character_names_position():
    with pytest.raises(LevelParseError) as err:
        parse_level("#####\n#@x.#\n#####")
    assert err.value.line == 2 and err.value.col == 3


def test_parse_non_rectangular():
    with pytest.raises(LevelParseError, match="non-rectangular"):
        parse_level("#####\n#@$.#\n####")


def test_parse_missing_player():
    with pytest.raises(LevelParseError, match="missing player"):
        parse_level("####\n#$.#\n####")


def test_parse_count_mismatch():
    with pytest.raises(LevelParseError, match="boxes but"):
        parse_level("#####\n#@$ #\n#####")


def test_move_into_empty_cell():
    state = parse_level("#####\n#@  #\n#   #\n#####")
    # no boxes/targets in this fixture is invalid; add a solved pair
    state = parse_level("#####\n#@ *#\n#   #\n#####")
    after = apply_move(state, Direction.EAST)
    assert after.player == (1, 2)
    assert after.walls == state.walls and after.targets == state.targets


def test_push_box_onto_target_solves():
    state = parse_level(SIMPLE)
    after = apply_move(state, Direction.EAST)
    assert after.player == (1, 2)
    assert after.boxes == frozenset({(1, 3)})
    assert is_solved(after)


def test_push_blocked_by_wall_is_illegal():
    state = parse_level("#####\n#@$##\n#  .#\n#####")
    with pytest.raises(IllegalMove):
        apply_move(state, Direction.EAST)


def test_push_blocked_by_second_box_is_illegal():
    state = parse_level("######\n#@$$.#\n#   .#\n######")
    with pytest.raises(IllegalMove):
        apply_move(state, Direction.EAST)


def test_move_into_wall_is_illegal():
    state = parse_level(SIMPLE)
    with pytest.raises(IllegalMove):
        apply_move(state, Direction.NORTH)


def test_zero_box_level_is_vacuously_solved():
    state = sokoban.SokobanState(
        3, 3, frozenset({(r, c) for r in range(3) for c in range(3)
                         if r in (0, 2) or c in (0, 2)}),
        frozenset(), frozenset(), (1, 1)).validate()
    assert is_solved(state)


def test_walls_targets_and_box_count_invariant_under_random_play():
    rng = np.random.default_rng(0)
    state = generate_level(5, level_spec(3))
    walls, targets, nboxes = state.walls, state.targets, len(state.boxes)
    for _ in range(300):
        moves = legal_moves(state)
        if not moves:
            break
        state = apply_move(state, moves[rng.integers(len(moves))])
        assert state.walls == walls
        assert state.targets == targets
        assert len(state.boxes) == nboxes


def test_plain_moves_are_invertible():
    state = parse_level("#####\n#@ *#\n#   #\n#####")
    rng = np.random.default_rng(4)
    for _ in range(50):
        moves = legal_moves(state)
        after = apply_move(state, moves[rng.integers(len(moves))])
        if after.boxes == state.boxes:
            undone = apply_move(
                after, {d.delta: d.opposite for d in Direction}[
                    (after.player[0] - state.player[0],
                     after.player[1] - state.player[1])])
            assert undone == state
        state = after


def test_corner_push_is_not_invertible():
    corner = parse_level("#####\n#@ .#\n#$  #\n#   #\n#####")
    pushed = apply_move(corner, Direction.SOUTH)  # box into the (3,1) corner
    assert pushed.boxes == frozenset({(3, 1)})
    # The opposite move walks the player back but cannot pull the box out,
    # and no push of a cornered box is legal at all.
    walked_back = apply_move(pushed, Direction.NORTH)
    assert walked_back.boxes != corner.boxes
    for d in Direction:
        try:
            after = apply_move(pushed, d)
        except IllegalMove:
            continue
        assert after.boxes == pushed.boxes


def test_format_parse_round_trip():
    state = generate_level(2, level_spec(4))
    assert parse_level(format_level(state)) == state


def test_levels_file_blocks():
    levels = [generate_level(s, level_spec(1)) for s in (1, 2)]
    text = format_levels(levels)
    assert text.startswith("; 0")
    parsed = parse_levels(text)
    assert parsed == levels


def test_pad_level_to_ten():
    state = parse_level(SIMPLE)
    padded = pad_level(state, 10)
    assert padded.width == padded.height == 10
    assert padded.player == state.player
    assert all((r, c) in padded.walls
               for r in range(10) for c in range(10)
               if r >= state.height or c >= state.width)


def test_curriculum_table():
    rows = [(s.grid_size, s.num_boxes, s.training_ratio) for s in CURRICULUM]
    assert rows == [(5, 1, 0.25), (7, 1, 0.25), (7, 2, 0.2), (8, 3, 0.2),
                    (10, 4, 0.1)]
    assert abs(sum(s.training_ratio for s in CURRICULUM) - 1.0) < 1e-12


def test_generate_level_is_deterministic_and_sized():
    a = generate_level(42, level_spec(1))
    b = generate_level(42, level_spec(1))
    assert a == b
    assert a.width == a.height == 5
    assert len(a.boxes) == 1
    assert not is_solved(a)


def test_generate_difficulty_5_shape():
    state = generate_level(7, level_spec(5))
    assert state.width == state.height == 10
    assert len(state.boxes) == 4


def test_generated_levels_are_solver_verified():
    from embodied.solver import solve_sokoban
    for difficulty in (1, 2, 3):
        for seed in range(5):
            state = generate_level(seed, level_spec(difficulty))
            plan = solve_sokoban(state)
            assert plan is not None
            for move in plan:
                state = apply_move(state, move)
            assert is_solved(state)
