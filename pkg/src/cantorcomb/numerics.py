"""Core numerics: delta-potential transfer matrices and Chebyshev/Laue helpers.

Units are fixed to m = hbar = 1, so the dimensionless delta strength is
zeta = V / k and the energy is E = k**2 / 2.  Every function here accepts
scalars or numpy arrays for ``k`` / ``x`` and broadcasts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# |x| - 1 band inside which U_n is taken from its Taylor series about x = +-1.
CROSSOVER = 1e-8


@dataclass(frozen=True)
class WaveContext:
    """Wavenumber ``k`` and delta strength ``V`` (m = hbar = 1)."""

    k: float | np.ndarray
    V: float

    def __post_init__(self):
        if np.any(np.asarray(self.k) <= 0):
            raise ValueError("wavenumber k must be positive")

    @property
    def zeta(self):
        return self.V / np.asarray(self.k, dtype=float)

    @property
    def tau(self):
        return -np.arctan(self.zeta)

    @property
    def energy(self):
        return 0.5 * np.asarray(self.k, dtype=float) ** 2


@dataclass(frozen=True)
class TransferMatrix2:
    """2x2 complex transfer matrix; entries may be arrays broadcast over k."""

    m11: complex | np.ndarray
    m12: complex | np.ndarray
    m21: complex | np.ndarray
    m22: complex | np.ndarray

    def __matmul__(self, other: "TransferMatrix2") -> "TransferMatrix2":
        return TransferMatrix2(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )

    def scaled(self, factor) -> "TransferMatrix2":
        return TransferMatrix2(self.m11 * factor, self.m12 * factor,
                               self.m21 * factor, self.m22 * factor)

    def det(self):
        return self.m11 * self.m22 - self.m12 * self.m21

    def max_abs(self):
        return np.maximum.reduce([np.abs(self.m11), np.abs(self.m12),
                                  np.abs(self.m21), np.abs(self.m22)])

    def transmission(self):
        return 1.0 / np.abs(self.m22) ** 2

    def to_array(self) -> np.ndarray:
        """Stacked as (..., 2, 2), the layout numpy.matmul expects."""
        m = np.array(np.broadcast_arrays(self.m11, self.m12, self.m21, self.m22))
        return np.moveaxis(m, 0, -1).reshape(m.shape[1:] + (2, 2))

    @classmethod
    def identity(cls, shape=()) -> "TransferMatrix2":
        one = np.ones(shape, dtype=complex)
        zero = np.zeros(shape, dtype=complex)
        return cls(one, zero, zero.copy(), one.copy())


@dataclass(frozen=True)
class ChebyshevArg:
    """Chebyshev argument Gamma together with gamma = arccos(Gamma).

    ``gamma_low`` is real on [-1, 1] and complex outside (principal branch of
    the complex arccos), so sin(N*gamma)/sin(gamma) stays valid everywhere.
    """

    gamma_cap: float | np.ndarray

    @property
    def gamma_low(self):
        return np.arccos(np.asarray(self.gamma_cap, dtype=complex))


def delta_transfer_matrix(ctx: WaveContext) -> TransferMatrix2:
    """Transfer matrix of V*delta(x) at the origin: [[1+i z, i z], [-i z, 1-i z]]."""
    z = ctx.zeta
    return TransferMatrix2(1 + 1j * z, 1j * z, -1j * z, 1 - 1j * z)


def propagation_phase_shift(mat: TransferMatrix2, x0, k) -> TransferMatrix2:
    """Move a scatterer from the origin to ``x0``.

    Diagonal entries are unchanged; m12 picks up exp(-2ikx0) and m21
    exp(+2ikx0).  This orientation is the one for which an ascending-position
    product reproduces the Dirac comb closed form.
    """
    phase = np.exp(2j * np.asarray(k, dtype=float) * x0)
    return TransferMatrix2(mat.m11, mat.m12 / phase, mat.m21 * phase, mat.m22)


def chebyshev_u_recurrence(n: int, x):
    """U_n(x) from U_{n+1} = 2x U_n - U_{n-1}; U_{-1} = 0."""
    x = np.asarray(x)
    prev = np.zeros_like(x, dtype=np.result_type(x, float))
    if n < 0:
        return prev
    cur = np.ones_like(prev)
    for _ in range(n):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def _u_near_one(n, eps):
    # Taylor series of U_n about x = 1, through second order in eps = x - 1.
    c1 = n * (n + 2) / 3.0
    c2 = (n - 1) * n * (n + 2) * (n + 3) / 30.0
    return (n + 1) * (1.0 + eps * (c1 + eps * c2))


def chebyshev_u(n: int, x):
    """Chebyshev polynomial of the second kind U_n(x) for real x.

    Uses sin((n+1)g)/sin(g) with g = arccos x inside (-1, 1), the sinh form
    outside, and a series about x = +-1 within CROSSOVER of the endpoints.
    ``n = -1`` returns 0 by the usual convention.
    """
    if n < -1:
        raise ValueError("n must be >= -1")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if n == -1:
        out = np.zeros_like(x)
        return out[0] if scalar else out
    out = np.empty_like(x)
    ax = np.abs(x)
    sign = np.where(x < 0, (-1.0) ** n, 1.0)

    near = np.abs(ax - 1.0) <= CROSSOVER
    inside = (ax < 1.0) & ~near
    outside = (ax > 1.0) & ~near

    if inside.any():
        g = np.arccos(x[inside])
        out[inside] = np.sin((n + 1) * g) / np.sin(g)
    if outside.any():
        # U_n(-x) = (-1)^n U_n(x); evaluate on |x| > 1 with arccosh.
        g = np.arccosh(ax[outside])
        with np.errstate(over="ignore"):  # deep in a gap U_n may overflow to inf
            out[outside] = sign[outside] * np.sinh((n + 1) * g) / np.sinh(g)
    if near.any():
        out[near] = sign[near] * _u_near_one(n, ax[near] - 1.0)
    return out[0] if scalar else out


def laue(N: int, gamma):
    """Laue function sin^2(N g) / sin^2(g), with the limit N^2 where sin g -> 0."""
    if N < 1:
        raise ValueError("N must be >= 1")
    gamma = np.asarray(gamma, dtype=float)
    s = np.sin(gamma)
    small = np.abs(s) < 1e-12
    safe = np.where(small, 1.0, s)
    val = np.sin(N * gamma) ** 2 / safe ** 2
    # Near sin g = 0 the Chebyshev form is exact and well conditioned.
    if np.any(small):
        val = np.where(small, chebyshev_u(N - 1, np.cos(gamma)) ** 2, val)
    return val[()] if val.ndim == 0 else val
