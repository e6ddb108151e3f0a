"""Brute-force transmission by multiplying one transfer matrix per delta.

Deliberately independent of the Chebyshev closed form in :mod:`.spp`; it only
uses the single-delta matrix and the position shift from :mod:`.numerics`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import (TransferMatrix2, WaveContext, delta_transfer_matrix,
                       propagation_phase_shift)

_RESCALE_AT = 1e100


@dataclass(frozen=True)
class CombRealization:
    positions: tuple[float, ...]
    strength: float

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 1 or pos.size == 0:
            raise ValueError("positions must be a non-empty 1-D sequence")
        if np.any(np.diff(pos) <= 0):
            raise ValueError("positions must be strictly increasing")
        object.__setattr__(self, "positions", tuple(pos.tolist()))

    def mirrored(self) -> "CombRealization":
        pos = np.asarray(self.positions)
        return CombRealization(tuple(np.sort(pos[-1] - pos)), self.strength)


def oracle_product(comb: CombRealization, k):
    """Ordered product of shifted delta matrices.

    Returns ``(matrix, log_scale)``; the true product is matrix * exp(log_scale).
    Rescaling keeps entries finite deep inside forbidden bands.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise ValueError("wavenumber k must be positive")
    base = delta_transfer_matrix(WaveContext(k, comb.strength))
    total = TransferMatrix2.identity(k.shape)
    log_scale = np.zeros(k.shape)
    for x in comb.positions:
        total = total @ propagation_phase_shift(base, x, k)
        big = total.max_abs()
        if np.any(big > _RESCALE_AT):
            f = np.where(big > _RESCALE_AT, big, 1.0)
            total = total.scaled(1.0 / f)
            log_scale = log_scale + np.log(f)
    return total, log_scale


def oracle_transmission(comb: CombRealization, k):
    mat, log_scale = oracle_product(comb, k)
    return np.exp(-2.0 * (np.log(np.abs(mat.m22)) + log_scale))


def oracle_sub_trace(comb: CombRealization, k, spacing: float):
    """Half-trace of the comb treated as a unit cell repeated at ``spacing``.

    This is the Bloch argument Gamma of the periodic extension; for a single
    delta it reduces to cos(k r) + zeta sin(k r).
    """
    mat, log_scale = oracle_product(comb, k)
    k = np.asarray(k, dtype=float)
    half = 0.5 * (mat.m11 * np.exp(-1j * k * spacing) + mat.m22 * np.exp(1j * k * spacing))
    return (half * np.exp(log_scale)).real
