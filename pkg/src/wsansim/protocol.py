"""Sensor side: report state machine, actor selection and suppression rules."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Collection, Mapping, Optional

from .navigation import Report, ReportKind, nearest_target, step_move
from .world import SegmentCoord, euclid, euclid2

__all__ = [
    "ActorStatusView",
    "ActorList",
    "Method",
    "Phase",
    "Report",
    "ReportKind",
    "Selection",
    "SensorReportState",
    "SuppressionPolicy",
    "UNREPORTED",
    "das_suppress",
    "select_actor",
    "sensor_tick",
    "sts_suppress",
    "sts_threshold",
]


class Selection(Enum):
    NEAREST = "nearest"
    MIN_LOAD = "min_load"


class Method(Enum):
    TS = "TS"
    STS = "STS"
    DAS = "DAS"


class Phase(Enum):
    UNREPORTED = 0
    REPORTED = 1
    PENDING_ELIM = 2


@dataclass(frozen=True)
class SensorReportState:
    phase: Phase = Phase.UNREPORTED
    actor: Optional[int] = None

    def __post_init__(self) -> None:
        if (self.phase is Phase.UNREPORTED) != (self.actor is None):
            raise ValueError(f"{self.phase.name} with actor {self.actor!r}")


UNREPORTED = SensorReportState()


@dataclass(frozen=True)
class ActorStatusView:
    """What a sensor hears from one actor during the broadcast phase.

    ``tm`` is a read-only snapshot (any collection of 1-entry segments).
    ``default`` is the actor's home segment, known to sensors from deployment.
    """

    actor_id: int
    pos: SegmentCoord
    dest: SegmentCoord
    tm: Collection[SegmentCoord]
    default: SegmentCoord


ActorList = Mapping[int, ActorStatusView]


@dataclass(frozen=True)
class SuppressionPolicy:
    method: Method = Method.TS
    selection: Selection = Selection.NEAREST
    alpha: float = 0.0
    d_das: int = 0

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.d_das < 0:
            raise ValueError(f"d_DAS must be >= 0, got {self.d_das}")

    @classmethod
    def ts(cls, selection: Selection = Selection.NEAREST) -> SuppressionPolicy:
        return cls(Method.TS, selection)

    @classmethod
    def sts(cls, alpha: float, selection: Selection = Selection.NEAREST) -> SuppressionPolicy:
        return cls(Method.STS, selection, alpha=alpha)

    @classmethod
    def das(cls, d_das: int, selection: Selection = Selection.NEAREST) -> SuppressionPolicy:
        return cls(Method.DAS, selection, d_das=d_das)


def select_actor(al: ActorList, sensor: SegmentCoord, selection: Selection) -> Optional[int]:
    if not al:
        return None
    if selection is Selection.NEAREST:
        key = lambda v: (euclid2(v.pos, sensor), v.actor_id)  # noqa: E731
    else:
        key = lambda v: (len(v.tm), v.actor_id)  # noqa: E731
    return min(al.values(), key=key).actor_id


def sts_threshold(actor_pos: SegmentCoord, sensor: SegmentCoord, alpha: float) -> float:
    return alpha * euclid(actor_pos, sensor)


def sts_suppress(view: ActorStatusView, sensor: SegmentCoord, alpha: float) -> bool:
    """True if the actor already knows a target within ``alpha * dist(actor, sensor)``."""
    d_sts = sts_threshold(view.pos, sensor, alpha)
    return any(euclid(c, sensor) <= d_sts for c in view.tm)


def das_suppress(
    view: ActorStatusView,
    sensor: SegmentCoord,
    d_das: int,
    v_max: int,
    width: int = 200,
    height: int = 200,
) -> bool:
    """True if reporting ``sensor`` would not change the actor's next segment.

    Only considered when the actor is strictly farther than ``d_das``.
    Replays the actor's own destination choice and move with and without the
    extra 1-entry.
    """
    if euclid2(view.pos, sensor) <= d_das * d_das:
        return False
    known = nearest_target(view.tm, view.pos)
    dest_without = view.default if known is None else known
    if known is None:
        dest_with = sensor
    else:
        dest_with = nearest_target((known, sensor), view.pos)
    if dest_with == dest_without:
        return True
    return step_move(view.pos, dest_without, v_max, width, height) == step_move(
        view.pos, dest_with, v_max, width, height
    )


def _suppressed(
    policy: SuppressionPolicy,
    view: ActorStatusView,
    sensor: SegmentCoord,
    v_max: int,
    width: int,
    height: int,
) -> bool:
    if policy.method is Method.STS:
        return sts_suppress(view, sensor, policy.alpha)
    if policy.method is Method.DAS:
        return das_suppress(view, sensor, policy.d_das, v_max, width, height)
    return False


def sensor_tick(
    state: SensorReportState,
    target_present: bool,
    al: ActorList,
    sensor: SegmentCoord,
    policy: SuppressionPolicy,
    step: int = 0,
    v_max: int = 2,
    width: int = 200,
    height: int = 200,
) -> tuple[SensorReportState, Optional[Report]]:
    """One step of the sensor at ``sensor``; emits at most one report."""
    phase = state.phase

    if phase is Phase.UNREPORTED:
        if not target_present:
            return state, None
        chosen = select_actor(al, sensor, policy.selection)
        if chosen is None or _suppressed(policy, al[chosen], sensor, v_max, width, height):
            return state, None
        report = Report(ReportKind.TARGET_AT, sensor, sensor, chosen, step)
        return SensorReportState(Phase.REPORTED, chosen), report

    if phase is Phase.REPORTED:
        if target_present:
            return state, None
        state = SensorReportState(Phase.PENDING_ELIM, state.actor)

    owner = al.get(state.actor)
    if owner is None:
        return state, None
    if sensor in owner.tm:
        report = Report(ReportKind.ELIMINATED_AT, sensor, sensor, state.actor, step)
        return UNREPORTED, report
    return UNREPORTED, None
