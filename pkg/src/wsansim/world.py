"""Grid geometry, deployment layout and target spawning."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence

import numpy as np


class InvalidConfig(ValueError):
    pass


class NonSquareActorCount(InvalidConfig):
    """No k-by-k lattice fits; supply an explicit layout via ``WorldConfig.layout``."""


class SegmentCoord(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class WorldConfig:
    width: int = 200
    height: int = 200
    actor_count: int = 16
    actor_range: int = 37
    v_max: int = 2
    spawn_rate: int = 3
    elimination_quota: int = 2700
    rng_seed: int = 0
    # explicit default positions; None means the square lattice
    layout: Optional[tuple[SegmentCoord, ...]] = None

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise InvalidConfig(f"grid must be at least 1x1, got {self.width}x{self.height}")
        if self.actor_count < 1:
            raise InvalidConfig("actor_count must be >= 1")
        if self.actor_range < 1:
            raise InvalidConfig("actor_range must be >= 1")
        if self.v_max < 1:
            raise InvalidConfig("v_max must be >= 1")
        if self.spawn_rate < 0:
            raise InvalidConfig("spawn_rate must be >= 0")
        if self.elimination_quota < 0:
            raise InvalidConfig("elimination_quota must be >= 0")
        if self.layout is not None:
            if len(self.layout) != self.actor_count:
                raise InvalidConfig(
                    f"layout has {len(self.layout)} positions for {self.actor_count} actors"
                )
            for p in self.layout:
                if not self.contains(p):
                    raise InvalidConfig(f"layout position {tuple(p)} outside grid")
            object.__setattr__(self, "layout", tuple(SegmentCoord(*p) for p in self.layout))

    def contains(self, p: Sequence[int]) -> bool:
        return 0 <= p[0] < self.width and 0 <= p[1] < self.height


@dataclass
class Target:
    id: int
    pos: SegmentCoord
    spawn_step: int
    capture_step: Optional[int] = None


def euclid(a: Sequence[int], b: Sequence[int]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def euclid2(a: Sequence[int], b: Sequence[int]) -> int:
    """Squared Euclidean distance; exact, so used wherever ties matter."""
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return dx * dx + dy * dy


def chebyshev(a: Sequence[int], b: Sequence[int]) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


@lru_cache(maxsize=None)
def disc_offsets(radius: int) -> tuple[tuple[int, int], ...]:
    """Integer offsets (dx, dy) with dx^2 + dy^2 <= radius^2, sorted by (dx, dy)."""
    r2 = radius * radius
    return tuple(
        (dx, dy)
        for dx in range(-radius, radius + 1)
        for dy in range(-radius, radius + 1)
        if dx * dx + dy * dy <= r2
    )


def range_cell_count(radius: int) -> int:
    """Number of segments an interior actor reaches directly (4293 for radius 37)."""
    return len(disc_offsets(radius))


def default_positions(cfg: WorldConfig) -> tuple[SegmentCoord, ...]:
    """Home segments of the actors, indexed by actor id.

    Without an explicit ``cfg.layout`` the actors sit on a k-by-k lattice at
    the centres of equal blocks; actor id ``j * k + i`` is in column ``i``,
    row ``j``.
    """
    if cfg.layout is not None:
        return cfg.layout
    k = math.isqrt(cfg.actor_count)
    if k * k != cfg.actor_count or cfg.width % k or cfg.height % k:
        raise NonSquareActorCount(
            f"{cfg.actor_count} actors do not tile a {cfg.width}x{cfg.height} grid as a square lattice"
        )
    bw, bh = cfg.width // k, cfg.height // k
    return tuple(
        SegmentCoord(bw // 2 + i * bw, bh // 2 + j * bh) for j in range(k) for i in range(k)
    )


def coverage_radius(cfg: WorldConfig, defaults: Sequence[SegmentCoord]) -> float:
    """Largest distance from any segment to its closest default position."""
    xs = np.arange(cfg.width)[:, None, None]
    ys = np.arange(cfg.height)[None, :, None]
    dx = xs - np.array([p.x for p in defaults])[None, None, :]
    dy = ys - np.array([p.y for p in defaults])[None, None, :]
    return math.sqrt(int((dx * dx + dy * dy).min(axis=2).max()))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def spawn_targets(
    rng: np.random.Generator,
    count: int,
    step: int,
    width: int = 200,
    height: int = 200,
    first_id: int = 0,
) -> list[Target]:
    # exactly two draws per target, x then y
    out = []
    for k in range(count):
        x = int(rng.integers(width))
        y = int(rng.integers(height))
        out.append(Target(first_id + k, SegmentCoord(x, y), step))
    return out
