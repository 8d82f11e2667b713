import math

import pytest
from hypothesis import given, strategies as st

from wsansim.navigation import (
    ActorState,
    MalformedReport,
    Report,
    ReportKind,
    TargetMap,
    actor_tick,
    choose_destination,
    nearest_target,
    step_move,
)
from wsansim.world import SegmentCoord as C

coords = st.builds(C, st.integers(0, 199), st.integers(0, 199))


def scan_nearest(cells, origin, width=20, height=20):
    """Grid scan in x-major order keeping the first strict minimum."""
    best = None
    for x in range(width):
        for y in range(height):
            if (x, y) in cells:
                d = math.dist((x, y), origin)
                if best is None or d < best[0]:
                    best = (d, (x, y))
    return None if best is None else best[1]


def enumerate_moves(pos, dest, v_max=2, width=200, height=200):
    out = []
    for dx in range(-v_max, v_max + 1):
        for dy in range(-v_max, v_max + 1):
            p = (pos[0] + dx, pos[1] + dy)
            if dx * dx + dy * dy <= v_max**2 and 0 <= p[0] < width and 0 <= p[1] < height:
                out.append((math.dist(p, dest), dx, dy, p))
    return out


def actor(pos, cells=(), default=(25, 25)):
    pos = C(*pos)
    return ActorState(0, pos, pos, C(*default), TargetMap(200, 200, cells))


def target(seg):
    return Report(ReportKind.TARGET_AT, C(*seg), C(*seg), 0, 0)


def test_target_map_count_tracks_entries():
    tm = TargetMap(10, 10)
    tm.set((1, 1), 1)
    tm.set((1, 1), 1)
    tm.set((2, 3), 1)
    assert tm.count == 2 and tm[(2, 3)] == 1 and tm[(0, 0)] == 0
    tm.set((1, 1), 0)
    tm.set((5, 5), 0)
    assert tm.count == 1


def test_target_map_bounds():
    with pytest.raises(MalformedReport):
        TargetMap(10, 10).set((10, 0), 1)


def test_nearest_target_examples():
    assert nearest_target(TargetMap(20, 20), (0, 0)) is None
    assert nearest_target(TargetMap(20, 20, [(3, 3), (10, 10)]), (0, 0)) == (3, 3)


def test_nearest_target_tie_breaks_on_smaller_x():
    cells = {(2, 0), (0, 2)}
    assert scan_nearest(cells, (0, 0)) == (0, 2)
    assert nearest_target(TargetMap(20, 20, cells), (0, 0)) == (0, 2)


@given(st.sets(st.tuples(st.integers(0, 19), st.integers(0, 19)), max_size=12),
       st.tuples(st.integers(0, 19), st.integers(0, 19)))
def test_nearest_target_matches_scan(cells, origin):
    assert nearest_target(TargetMap(20, 20, cells), origin) == scan_nearest(cells, origin)


def test_choose_destination():
    assert choose_destination(actor((0, 0))) == (25, 25)
    assert choose_destination(actor((0, 0), [(100, 100)])) == (100, 100)


def test_step_move_diagonal_example():
    cands = enumerate_moves((10, 10), (30, 30))
    assert len(cands) == 13
    assert min(cands)[3] == (11, 11)
    assert math.dist((11, 11), (30, 30)) < math.dist((12, 10), (30, 30))
    assert step_move(C(10, 10), C(30, 30), 2) == (11, 11)


def test_step_move_examples():
    assert step_move(C(7, 9), C(7, 9), 2) == (7, 9)
    assert min(enumerate_moves((0, 0), (0, 5)))[3] == (0, 2)
    assert step_move(C(0, 0), C(0, 5), 2) == (0, 2)


def test_step_move_clips_to_grid():
    assert step_move(C(0, 0), C(0, 0), 2, 1, 1) == (0, 0)
    assert step_move(C(199, 199), C(199, 150), 2) == (199, 197)


@given(coords, coords)
def test_step_move_oracle_bound_and_progress(pos, dest):
    got = step_move(pos, dest, 2)
    assert got == min(enumerate_moves(pos, dest))[3]
    assert math.dist(got, pos) <= 2
    if pos != dest:
        assert math.dist(got, dest) < math.dist(pos, dest)


@given(coords, coords)
def test_static_destination_reached(pos, dest):
    start, steps = pos, 0
    while pos != dest:
        pos = step_move(pos, dest, 2)
        steps += 1
        assert steps <= 200
    assert steps >= math.ceil(math.dist(start, dest) / 2)


def test_actor_tick_fixed_point_at_default():
    a = actor((25, 25))
    nxt = actor_tick(a, [])
    assert nxt.pos == (25, 25) and nxt.dest == (25, 25)


def test_actor_tick_heads_to_reported_target():
    assert min(enumerate_moves((48, 48), (50, 50)))[3] == (49, 49)
    nxt = actor_tick(actor((48, 48)), [target((50, 50))])
    assert nxt.dest == (50, 50) and nxt.pos == (49, 49)
    assert nxt.tm[(50, 50)] == 1


def test_actor_tick_last_report_wins():
    seg = C(60, 60)
    elim = Report(ReportKind.ELIMINATED_AT, seg, seg, 0, 0)
    nxt = actor_tick(actor((25, 25)), [target(seg), elim])
    assert nxt.tm[seg] == 0 and nxt.dest == (25, 25)


def test_actor_tick_is_pure():
    a = actor((30, 30), [(40, 40)])
    before = a.tm.copy()
    first = actor_tick(a, [target((31, 31))])
    second = actor_tick(a, [target((31, 31))])
    assert a.tm == before and a.pos == (30, 30)
    assert first == second


def test_actor_tick_rejects_out_of_grid_report():
    with pytest.raises(MalformedReport):
        actor_tick(actor((0, 0)), [target((200, 3))])
