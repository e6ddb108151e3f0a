"""Construction of the Cantor Dirac comb at stage S.

The comb places a delta at both ends of every segment of the stage S-1
(polyadic) Cantor set on [0, L].  N = 2 is the ordinary Cantor set; N > 2
uses the minimum-lacunarity layout: each segment is split into N equal
pieces separated by N-1 equal gaps of width (segment length)/rho.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CdcSpec:
    N: int
    rho: float
    L: float
    S: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        if int(self.S) != self.S or self.S < 1:
            raise ValueError(f"S must be an integer >= 1, got {self.S}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if not self.rho > self.N - 1:
            raise ValueError(f"rho must exceed N-1 = {self.N - 1}, got {self.rho}")

    @property
    def shrink(self) -> float:
        """Fraction of a segment kept at each iteration, 1 - (N-1)/rho."""
        return 1.0 - (self.N - 1) / self.rho

    @property
    def rho_plus(self) -> float:
        return 1.0 + 1.0 / self.rho

    @property
    def rho_minus(self) -> float:
        return 1.0 - 1.0 / self.rho

    @property
    def delta_count(self) -> int:
        return 2 * self.N ** (self.S - 1)


@dataclass(frozen=True)
class SuperPeriodicLayout:
    """Hierarchy of repetition counts N_q and spacings r_q, innermost first."""

    counts: tuple[int, ...]
    distances: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(n) for n in self.counts))
        object.__setattr__(self, "distances", tuple(float(r) for r in self.distances))
        if len(self.counts) != len(self.distances) or not self.counts:
            raise ValueError("counts and distances must be non-empty and equally long")
        if any(n < 1 for n in self.counts):
            raise ValueError("every count must be >= 1")
        if any(not r > 0 for r in self.distances):
            raise ValueError("every distance must be positive")

    @property
    def order(self) -> int:
        return len(self.counts)

    @property
    def extent(self) -> float:
        """Distance from the first to the last delta."""
        return float(sum((n - 1) * r for n, r in zip(self.counts, self.distances)))

    def truncated(self, order: int) -> "SuperPeriodicLayout":
        return SuperPeriodicLayout(self.counts[:order], self.distances[:order])

    def expand(self) -> np.ndarray:
        """Delta positions by iterated translation, unit cell at the origin."""
        pos = np.zeros(1)
        for n, r in zip(self.counts, self.distances):
            pos = (pos[None, :] + r * np.arange(n)[:, None]).ravel()
        return np.sort(pos)


def segment_length(spec: CdcSpec, stage: int) -> float:
    """Length b of each Cantor segment after ``stage`` iterations."""
    if stage < 0:
        raise ValueError("stage must be >= 0")
    return spec.L / spec.N ** stage * spec.shrink ** stage


def layout(spec: CdcSpec) -> SuperPeriodicLayout:
    N, S, L = spec.N, spec.S, spec.L
    counts = [2] + [N] * (S - 1)
    distances = [L / N ** (S - 1) * spec.shrink ** (S - 1)]
    for q in range(2, S + 1):
        distances.append(L * spec.rho_plus / N ** (S - q + 1) * spec.shrink ** (S - q))
    return SuperPeriodicLayout(tuple(counts), tuple(distances))


def _cantor_segments(spec: CdcSpec, stage: int) -> list[tuple[float, float]]:
    segs = [(0.0, spec.L)]
    for _ in range(stage):
        nxt = []
        for a, b in segs:
            width = b - a
            piece = width * spec.shrink / spec.N
            gap = width / spec.rho
            for j in range(spec.N):
                lo = a + j * (piece + gap)
                nxt.append((lo, lo + piece))
        segs = nxt
    return segs


def delta_positions(spec: CdcSpec) -> np.ndarray:
    """Boundaries of every segment of the stage S-1 Cantor set, ascending."""
    segs = _cantor_segments(spec, spec.S - 1)
    return np.array([x for seg in segs for x in seg])


def critical_rho(N: int) -> float:
    """rho at which the stage-2 comb is equally spaced."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return float(2 * N - 1)


def geometry_dump(spec: CdcSpec) -> dict:
    lay = layout(spec)
    return {
        "N": spec.N,
        "rho": spec.rho,
        "L": spec.L,
        "S": spec.S,
        "counts": list(lay.counts),
        "distances": list(lay.distances),
        "positions": delta_positions(spec).tolist(),
    }
