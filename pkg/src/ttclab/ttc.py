"""Discrete-frame time-to-collision simulation over translating masks.

At frame n each mask is shifted by ``round(n * v)`` (componentwise, half away
from zero, computed fresh per frame so rounding never accumulates) and the
first frame with any shared world cell gives TTC = n / frame_rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NoCollisionWithinHorizon
from .masks import BinaryMask, overlap, translate


def round_half_away(x: float) -> int:
    """Symmetric rounding: 2.5 -> 3, -2.5 -> -3."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def frame_displacement(n: int, velocity) -> tuple[int, int]:
    """(drow, dcol) after n frames at (vx, vy) pixels/frame."""
    vx, vy = float(velocity[0]), float(velocity[1])
    return (round_half_away(n * vy), round_half_away(n * vx))


@dataclass
class TtcQuery:
    """Two positioned masks plus kinematics; velocities are (vx, vy) px/frame."""

    m1: BinaryMask
    m2: BinaryMask
    v1: tuple[float, float]
    v2: tuple[float, float]
    frame_rate: float
    horizon_frames: int

    def __post_init__(self):
        if self.frame_rate <= 0:
            raise ValueError("frame_rate must be positive")
        if self.horizon_frames < 0:
            raise ValueError("horizon_frames must be >= 0")
        if self.m1.popcount == 0 or self.m2.popcount == 0:
            raise ValueError("masks must be nonempty")


@dataclass
class TtcResult:
    collided: bool
    ttc_seconds: float | None = None
    first_overlap_frame: int | None = None

    def __post_init__(self):
        if self.collided:
            assert self.ttc_seconds is not None and self.first_overlap_frame is not None
        else:
            assert self.ttc_seconds is None and self.first_overlap_frame is None


def simulate_ttc(query: TtcQuery) -> TtcResult:
    """Minimal n in [0, horizon] with overlapping translated masks.

    Raises NoCollisionWithinHorizon when the horizon passes without overlap;
    callers that need a row for every scenario catch it and record a
    non-collided TtcResult.
    """
    for n in range(query.horizon_frames + 1):
        a = translate(query.m1, frame_displacement(n, query.v1))
        b = translate(query.m2, frame_displacement(n, query.v2))
        if overlap(a, b):
            return TtcResult(
                collided=True,
                ttc_seconds=n / query.frame_rate,
                first_overlap_frame=n,
            )
    raise NoCollisionWithinHorizon(query.horizon_frames)


def scenario_ttc(scenario, masks: tuple[BinaryMask, BinaryMask], horizon_s: float) -> TtcResult:
    """simulate_ttc wired to a scenario's kinematics.

    `masks` are the two segmented objects already positioned in the scenario
    world frame (agent first). The horizon converts as ceil(horizon_s * Δf).
    """
    query = TtcQuery(
        m1=masks[0],
        m2=masks[1],
        v1=tuple(scenario.v_agent),
        v2=tuple(scenario.v_patient),
        frame_rate=scenario.frame_rate,
        horizon_frames=int(math.ceil(horizon_s * scenario.frame_rate)),
    )
    return simulate_ttc(query)
