"""Step scheduler, capture handling and communication-cost accounting.

Each step runs five phases in a fixed order:

1. capture   actors eliminate every target on their own segment and clear
             that segment in their target map
2. broadcast every actor's (pos, dest, TM) becomes visible to the sensors
             within ``actor_range``
3. sensor    sensors with something to do run their state machine in
             ascending (x, y) order; each report is charged one transfer and
             ``hop_cost`` hops
4. move      actors apply their report batch, choose a destination, move
5. spawn     ``spawn_rate`` new targets appear

A run stops right after the capture phase that brings the elimination count
to the quota.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np

from .navigation import ActorState, Report, TargetMap, actor_tick
from .protocol import (
    UNREPORTED,
    ActorStatusView,
    Phase,
    SensorReportState,
    SuppressionPolicy,
    sensor_tick,
)
from .world import (
    SegmentCoord,
    Target,
    WorldConfig,
    chebyshev,
    default_positions,
    make_rng,
    spawn_targets,
)

DEFAULT_MAX_STEPS = 10**6


class NonTermination(RuntimeError):
    pass


@dataclass
class RunMetrics:
    transfers: int = 0
    hops: int = 0
    capture_times: list[int] = field(default_factory=list)
    steps_elapsed: int = 0
    spawned: int = 0

    @property
    def eliminated(self) -> int:
        return len(self.capture_times)

    @property
    def mean_capture_time(self) -> float:
        return statistics.fmean(self.capture_times) if self.capture_times else math.nan


@dataclass
class SimulationState:
    cfg: WorldConfig
    policy: SuppressionPolicy
    actors: list[ActorState]
    rng: np.random.Generator
    step: int = 0
    # outstanding targets by id, and the ids present on each occupied segment
    targets: dict[int, Target] = field(default_factory=dict)
    occupancy: dict[SegmentCoord, list[int]] = field(default_factory=dict)
    # sparse sensor grid: segments absent from the dict are UNREPORTED
    sensors: dict[SegmentCoord, SensorReportState] = field(default_factory=dict)
    metrics: RunMetrics = field(default_factory=RunMetrics)
    eliminated_count: int = 0
    next_target_id: int = 0
    finished: bool = False

    def sensor_state(self, seg: SegmentCoord) -> SensorReportState:
        return self.sensors.get(seg, UNREPORTED)


def hop_cost(sensor: SegmentCoord, actor_pos: SegmentCoord) -> int:
    """Shortest relay path over Moore-neighbour sensor links, at least one hop."""
    return max(1, chebyshev(sensor, actor_pos))


def initial_state(
    cfg: WorldConfig, policy: SuppressionPolicy, seed: Optional[int] = None
) -> SimulationState:
    homes = default_positions(cfg)
    actors = [
        ActorState(i, home, home, home, TargetMap(cfg.width, cfg.height))
        for i, home in enumerate(homes)
    ]
    rng = make_rng(cfg.rng_seed if seed is None else seed)
    return SimulationState(cfg, policy, actors, rng)


def _trace(out: Optional[TextIO], step: int, event: str, **fields) -> None:
    if out is not None:
        body = " ".join(f"{k}={v}" for k, v in fields.items())
        out.write(f"{step} {event} {body}\n")


def _capture(state: SimulationState, trace: Optional[TextIO]) -> None:
    for actor in state.actors:
        ids = state.occupancy.pop(actor.pos, None)
        if ids:
            for tid in ids:
                target = state.targets.pop(tid)
                target.capture_step = state.step
                ttc = state.step - target.spawn_step
                state.metrics.capture_times.append(ttc)
                state.eliminated_count += 1
                _trace(trace, state.step, "capture", actor=actor.id, target=tid,
                       x=actor.pos.x, y=actor.pos.y, ttc=ttc)
        actor.tm.set(actor.pos, 0)


def _broadcast(state: SimulationState) -> list[ActorStatusView]:
    return [
        ActorStatusView(a.id, a.pos, a.dest, frozenset(a.tm), a.default) for a in state.actors
    ]


def _sense(
    state: SimulationState, views: list[ActorStatusView], trace: Optional[TextIO]
) -> list[Report]:
    cfg = state.cfg
    r2 = cfg.actor_range * cfg.actor_range
    active = sorted(set(state.occupancy) | set(state.sensors))
    if not active:
        return []
    seg_xy = np.array(active)
    actor_xy = np.array([v.pos for v in views])
    delta = seg_xy[:, None, :] - actor_xy[None, :, :]
    in_range = (delta * delta).sum(axis=2) <= r2
    reports = []
    for seg, row in zip(active, in_range.tolist()):
        sx, sy = seg
        al = {v.actor_id: v for v, hit in zip(views, row) if hit}
        new, report = sensor_tick(
            state.sensor_state(seg), seg in state.occupancy, al, seg, state.policy,
            state.step, cfg.v_max, cfg.width, cfg.height,
        )
        if new.phase is Phase.UNREPORTED:
            state.sensors.pop(seg, None)
        else:
            state.sensors[seg] = new
        if report is not None:
            hops = hop_cost(seg, al[report.to_actor].pos)
            state.metrics.transfers += 1
            state.metrics.hops += hops
            reports.append(report)
            _trace(trace, state.step, "report", kind=report.kind.value, x=sx, y=sy,
                   actor=report.to_actor, hops=hops)
    return reports


def _move(state: SimulationState, reports: list[Report]) -> None:
    cfg = state.cfg
    batches: dict[int, list[Report]] = {}
    for r in reports:
        batches.setdefault(r.to_actor, []).append(r)
    state.actors = [
        actor_tick(a, batches.get(a.id, ()), cfg.v_max, cfg.width, cfg.height)
        for a in state.actors
    ]


def _spawn(state: SimulationState) -> None:
    cfg = state.cfg
    new = spawn_targets(state.rng, cfg.spawn_rate, state.step, cfg.width, cfg.height,
                        state.next_target_id)
    state.next_target_id += len(new)
    state.metrics.spawned += len(new)
    for t in new:
        state.targets[t.id] = t
        state.occupancy.setdefault(t.pos, []).append(t.id)


def simulation_step(state: SimulationState, trace: Optional[TextIO] = None) -> SimulationState:
    if state.finished or state.eliminated_count >= state.cfg.elimination_quota:
        raise ValueError("simulation already reached its elimination quota")
    _capture(state, trace)
    if state.eliminated_count >= state.cfg.elimination_quota:
        state.finished = True
    else:
        views = _broadcast(state)
        reports = _sense(state, views, trace)
        _move(state, reports)
        _spawn(state)
    state.step += 1
    state.metrics.steps_elapsed = state.step
    return state


def run(
    cfg: WorldConfig,
    policy: SuppressionPolicy,
    seed: Optional[int] = None,
    max_steps: int = DEFAULT_MAX_STEPS,
    trace: Optional[TextIO] = None,
) -> RunMetrics:
    state = initial_state(cfg, policy, seed)
    while state.eliminated_count < cfg.elimination_quota:
        if state.step >= max_steps:
            raise NonTermination(
                f"no termination after {state.step} steps: {state.eliminated_count}/"
                f"{cfg.elimination_quota} eliminated, {len(state.targets)} outstanding, "
                f"{len(state.sensors)} sensors holding reports"
            )
        simulation_step(state, trace)
    return state.metrics
