"""Exit-criteria checks shared by the test suite and ``wsansim verify``.

Every check returns a :class:`CheckResult`; nothing here raises on a failed
criterion so that a report can list all outcomes.
"""

from __future__ import annotations

import math
import random
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from .engine import RunMetrics, SimulationState, initial_state, simulation_step
from .harness import BEST_SETTINGS, aggregate, CellResult, emit_csv, policy_for
from .navigation import ActorState, Report, ReportKind, TargetMap, actor_tick, step_move
from .protocol import ActorStatusView, SuppressionPolicy, das_suppress
from .world import SegmentCoord, WorldConfig, default_positions, range_cell_count

DESK = WorldConfig(width=50, height=50, actor_count=4, elimination_quota=300)
PAPER = WorldConfig()
PAPER_RANGE_COUNT = 4293


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


class InvariantViolation(AssertionError):
    pass


def check_state(state: SimulationState) -> None:
    m = state.metrics
    captured = len(m.capture_times)
    if m.spawned != captured + len(state.targets):
        raise InvariantViolation(
            f"step {state.step}: spawned {m.spawned} != captured {captured} + "
            f"outstanding {len(state.targets)}"
        )
    if captured != state.eliminated_count:
        raise InvariantViolation(f"step {state.step}: eliminated_count drifted")
    if m.hops < m.transfers:
        raise InvariantViolation(f"step {state.step}: hops {m.hops} < transfers {m.transfers}")
    if m.capture_times and min(m.capture_times) < 1:
        raise InvariantViolation(f"step {state.step}: capture time below 1")


def checked_run(cfg: WorldConfig, policy: SuppressionPolicy, seed: int) -> RunMetrics:
    """Like ``engine.run`` but verifies conservation and metric sanity after every step."""
    state = initial_state(cfg, policy, seed)
    prev = (0, 0, 0)
    while state.eliminated_count < cfg.elimination_quota:
        simulation_step(state)
        check_state(state)
        now = (state.metrics.transfers, state.metrics.hops, state.eliminated_count)
        if any(b < a for a, b in zip(prev, now)):
            raise InvariantViolation(f"step {state.step}: metrics decreased")
        prev = now
    return state.metrics


def degenerate_equivalence(seeds=range(5), cfg: WorldConfig = DESK) -> CheckResult:
    bad = []
    for seed in seeds:
        ts = checked_run(cfg, policy_for("TS-1"), seed)
        if checked_run(cfg, policy_for("STS-1", 0.0), seed) != ts:
            bad.append(f"STS-1(0) seed {seed}")
        if checked_run(cfg, policy_for("DAS-1", 38), seed) != ts:
            bad.append(f"DAS-1(38) seed {seed}")
    n = len(list(seeds))
    return CheckResult(
        "degenerate-parameter equivalence",
        not bad,
        f"{n} seeds, mismatches: {bad}" if bad else f"{n} seeds, STS(0)=TS and DAS(38)=TS",
    )


def determinism(cfg: WorldConfig = DESK) -> CheckResult:
    cases = [("TS-1", None, 3), ("STS-2", 0.7, 11), ("DAS-1", 15, 7), ("DAS-2", 0, 5)]
    bad = []
    with tempfile.TemporaryDirectory() as tmp:
        for algorithm, param, seed in cases:
            blobs = []
            for k in range(2):
                metrics = checked_run(cfg, policy_for(algorithm, param), seed)
                rows = aggregate([CellResult(algorithm, param, seed, metrics)])
                path = emit_csv(rows, Path(tmp) / f"{algorithm}-{k}.csv")
                blobs.append(path.read_bytes())
            if blobs[0] != blobs[1]:
                bad.append(algorithm)
    return CheckResult(
        "determinism (byte-identical CSV)", not bad,
        f"{len(cases)} cases" + (f", differing: {bad}" if bad else ""),
    )


def geometry() -> CheckResult:
    r = PAPER.actor_range
    brute = 0
    for dx in range(-r, r + 1):
        for dy in range(-r, r + 1):
            if dx * dx + dy * dy <= r * r:
                brute += 1
    homes = default_positions(PAPER)
    worst2 = 0
    for x in range(PAPER.width):
        for y in range(PAPER.height):
            worst2 = max(worst2, min((x - h.x) ** 2 + (y - h.y) ** 2 for h in homes))
    ok = brute == range_cell_count(r) == PAPER_RANGE_COUNT and worst2 <= r * r
    return CheckResult(
        "geometry oracle",
        ok,
        f"cells in range {brute} (constant {range_cell_count(r)}, paper {PAPER_RANGE_COUNT}); "
        f"max-min distance to defaults {math.sqrt(worst2):.4f} <= {r}",
    )


def _brute_move(pos, dest, v_max, width, height):
    cands = []
    for dx in range(-v_max, v_max + 1):
        for dy in range(-v_max, v_max + 1):
            x, y = pos[0] + dx, pos[1] + dy
            if dx * dx + dy * dy <= v_max * v_max and 0 <= x < width and 0 <= y < height:
                cands.append(((x - dest[0]) ** 2 + (y - dest[1]) ** 2, dx, dy, (x, y)))
    return min(cands)[3]


def navigation(n: int = 1000, seed: int = 2015, width: int = 200, height: int = 200) -> CheckResult:
    rnd = random.Random(seed)
    disagree = stalls = 0
    for _ in range(n):
        pos = (rnd.randrange(width), rnd.randrange(height))
        if rnd.random() < 0.5:
            dest = (rnd.randrange(width), rnd.randrange(height))
        else:  # nearby destinations exercise ties and short moves
            dest = (min(width - 1, max(0, pos[0] + rnd.randint(-4, 4))),
                    min(height - 1, max(0, pos[1] + rnd.randint(-4, 4))))
        got = step_move(SegmentCoord(*pos), SegmentCoord(*dest), 2, width, height)
        if tuple(got) != _brute_move(pos, dest, 2, width, height):
            disagree += 1
        if pos != dest and math.dist(got, dest) >= math.dist(pos, dest):
            stalls += 1
        if math.dist(got, pos) > 2:
            disagree += 1
    return CheckResult(
        "navigation oracle", disagree == 0 and stalls == 0,
        f"{n} instances, {disagree} disagreements, {stalls} strict-progress failures",
    )


def random_das_scenario(rnd: random.Random, width: int = 200, height: int = 200, r: int = 37):
    """Actor view plus an in-range sensor segment not already in its target map."""
    pos = SegmentCoord(rnd.randrange(width), rnd.randrange(height))
    home = SegmentCoord(rnd.randrange(width), rnd.randrange(height))
    cells = set()
    for _ in range(rnd.choice([0, 1, 2, 5, 20])):
        cells.add(SegmentCoord(rnd.randrange(width), rnd.randrange(height)))
    cells.discard(pos)
    while True:
        dx, dy = rnd.randint(-r, r), rnd.randint(-r, r)
        sensor = SegmentCoord(pos.x + dx, pos.y + dy)
        if dx * dx + dy * dy <= r * r and 0 <= sensor.x < width and 0 <= sensor.y < height \
                and sensor not in cells:
            break
    tm = TargetMap(width, height, cells)
    actor = ActorState(0, pos, pos, home, tm)
    view = ActorStatusView(0, pos, pos, frozenset(cells), home)
    return actor, view, sensor


def das_consistency(n: int = 1000, seed: int = 77) -> CheckResult:
    rnd = random.Random(seed)
    suppressed = wrong = tried = 0
    while suppressed < n:
        tried += 1
        actor, view, sensor = random_das_scenario(rnd)
        d_das = rnd.choice([0, 5, 10, 15, 20])
        if not das_suppress(view, sensor, d_das, 2):
            continue
        suppressed += 1
        report = Report(ReportKind.TARGET_AT, sensor, sensor, 0, 0)
        if actor_tick(actor, [], 2).pos != actor_tick(actor, [report], 2).pos:
            wrong += 1
    return CheckResult(
        "DAS consistency oracle", wrong == 0,
        f"{n} suppressed scenarios (of {tried} drawn), {wrong} changed the next move",
    )


@dataclass
class PaperScaleResult:
    means: dict[str, tuple[float, float]]  # algorithm -> (mean ttc, mean hops)
    checks: list[CheckResult]


def paper_scale(
    seeds=range(20),
    cfg: WorldConfig = PAPER,
    progress: Optional[Callable[[str], None]] = None,
) -> PaperScaleResult:
    cells = []
    for algorithm, param in BEST_SETTINGS.items():
        for seed in seeds:
            metrics = checked_run(cfg, policy_for(algorithm, param), seed)
            cells.append(CellResult(algorithm, param, seed, metrics))
            if progress:
                progress(f"{algorithm} seed {seed}: ttc {metrics.mean_capture_time:.2f} "
                         f"hops {metrics.hops}")
    rows = {r.algorithm: r for r in aggregate(cells)}
    means = {a: (r.ttc.mean, r.hops.mean) for a, r in rows.items()}

    def lt(a, b, idx):
        return means[a][idx] < means[b][idx]

    def show(a, idx):
        return f"{a}={means[a][idx]:.2f}"

    checks = [
        CheckResult("paper scale (a): ttc DAS-1(15) < TS-1", lt("DAS-1", "TS-1", 0),
                    f"{show('DAS-1', 0)} vs {show('TS-1', 0)}"),
        CheckResult("paper scale (b): hops STS-1(0.9) < TS-1", lt("STS-1", "TS-1", 1),
                    f"{show('STS-1', 1)} vs {show('TS-1', 1)}"),
    ]
    for base in ("TS", "STS", "DAS"):
        one, two = f"{base}-1", f"{base}-2"
        checks.append(CheckResult(
            f"paper scale (c): {one} beats {two} on hops and ttc",
            lt(one, two, 0) and lt(one, two, 1),
            f"ttc {show(one, 0)} vs {show(two, 0)}; hops {show(one, 1)} vs {show(two, 1)}",
        ))
    return PaperScaleResult(means, checks)


def run_all(paper: bool = True, progress: Optional[Callable[[str], None]] = None) -> list[CheckResult]:
    results = [geometry(), navigation(), das_consistency()]
    violations = []
    simulated = [degenerate_equivalence, determinism]
    if paper:
        simulated.append(lambda: paper_scale(progress=progress).checks)
    for check in simulated:
        try:
            out = check()
        except InvariantViolation as exc:
            violations.append(str(exc))
            continue
        results.extend(out if isinstance(out, list) else [out])
    results.append(CheckResult(
        "conservation and metric sanity", not violations,
        "; ".join(violations) if violations else "checked after every simulated step",
    ))
    return results
