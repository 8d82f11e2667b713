"""Actor side: target maps, destination choice and the one-step move."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

from .world import SegmentCoord, disc_offsets


class MalformedReport(ValueError):
    pass


class ReportKind(Enum):
    TARGET_AT = "target"
    ELIMINATED_AT = "eliminated"


@dataclass(frozen=True)
class Report:
    kind: ReportKind
    segment: SegmentCoord
    from_sensor: SegmentCoord
    to_actor: int
    step: int


class TargetMap:
    """Binary occupancy map of the segments an actor believes hold a target.

    Stored sparsely as the set of 1-entries; the grid size is kept for bounds
    checks. ``count`` is the number of 1-entries.
    """

    __slots__ = ("width", "height", "_cells")

    def __init__(self, width: int, height: int, cells: Iterable[Sequence[int]] = ()):
        self.width = width
        self.height = height
        self._cells: set[SegmentCoord] = set()
        for c in cells:
            self.set(c, 1)

    def __getitem__(self, seg: Sequence[int]) -> int:
        return 1 if (seg[0], seg[1]) in self._cells else 0

    def __iter__(self) -> Iterator[SegmentCoord]:
        return iter(self._cells)

    def __len__(self) -> int:
        return len(self._cells)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TargetMap):
            return NotImplemented
        return (self.width, self.height, self._cells) == (other.width, other.height, other._cells)

    def __repr__(self) -> str:
        return f"TargetMap({self.width}x{self.height}, {sorted(self._cells)})"

    @property
    def count(self) -> int:
        return len(self._cells)

    def set(self, seg: Sequence[int], value: int) -> None:
        if not (0 <= seg[0] < self.width and 0 <= seg[1] < self.height):
            raise MalformedReport(f"segment {tuple(seg)} outside {self.width}x{self.height} grid")
        if value:
            self._cells.add(SegmentCoord(seg[0], seg[1]))
        else:
            self._cells.discard(SegmentCoord(seg[0], seg[1]))

    def copy(self) -> TargetMap:
        tm = TargetMap(self.width, self.height)
        tm._cells = set(self._cells)
        return tm


@dataclass
class ActorState:
    id: int
    pos: SegmentCoord
    dest: SegmentCoord
    default: SegmentCoord
    tm: TargetMap = field(repr=False)


def nearest_target(tm: Iterable[SegmentCoord], origin: Sequence[int]) -> Optional[SegmentCoord]:
    """Closest 1-entry to ``origin``; ties go to smaller x, then smaller y."""
    ox, oy = origin[0], origin[1]
    best = None
    best_key = None
    for c in tm:
        dx = c[0] - ox
        dy = c[1] - oy
        key = (dx * dx + dy * dy, c[0], c[1])
        if best_key is None or key < best_key:
            best_key = key
            best = c
    return best


def choose_destination(actor: ActorState) -> SegmentCoord:
    target = nearest_target(actor.tm, actor.pos)
    return actor.default if target is None else target


def step_move(
    pos: SegmentCoord, dest: SegmentCoord, v_max: int, width: int = 200, height: int = 200
) -> SegmentCoord:
    """In-grid segment within ``v_max`` of ``pos`` that lies closest to ``dest``.

    Candidates are scanned in (dx, dy) order and only a strictly better one
    replaces the incumbent, so ties resolve to the smaller dx, then dy.
    """
    px, py = pos
    tx, ty = dest
    best = None
    best_d2 = -1
    for dx, dy in disc_offsets(v_max):
        x = px + dx
        y = py + dy
        if not (0 <= x < width and 0 <= y < height):
            continue
        d2 = (x - tx) * (x - tx) + (y - ty) * (y - ty)
        if best is None or d2 < best_d2:
            best, best_d2 = (x, y), d2
    return SegmentCoord(*best)


def apply_reports(tm: TargetMap, reports: Iterable[Report]) -> None:
    for r in reports:
        tm.set(r.segment, 1 if r.kind is ReportKind.TARGET_AT else 0)


def actor_tick(
    actor: ActorState,
    received_reports: Iterable[Report],
    v_max: int = 2,
    width: int = 200,
    height: int = 200,
) -> ActorState:
    """Apply this step's reports, pick a destination and move one step.

    Returns a new state; the input actor and its target map are untouched.
    """
    tm = actor.tm.copy()
    apply_reports(tm, received_reports)
    nxt = replace(actor, tm=tm)
    nxt.dest = choose_destination(nxt)
    nxt.pos = step_move(actor.pos, nxt.dest, v_max, width, height)
    return nxt
