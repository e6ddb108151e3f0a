"""Spectrum analytics on top of the closed-form engine."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .geometry import CdcSpec
from .spectrum import Axis, SpectrumGrid
from .spp import SppSpec, gamma_sequence, reflection, transmission, u_factors

RESONANCE_FLOOR = 1 - 1e-8
ORDER_THRESHOLD = 1e-6
PEAK_THRESHOLD = 0.99


class AmbiguousResonanceError(ValueError):
    """A window meant to hold one resonance holds none or several."""


@dataclass(frozen=True)
class Resonance:
    k_star: float
    order_attribution: int
    refinement_width: float
    tangent: bool = False

    def to_dict(self) -> dict:
        return {"k_star": self.k_star, "order": self.order_attribution,
                "width": self.refinement_width, "tangent": self.tangent}


@dataclass(frozen=True)
class BandRegion:
    k_lo: float
    k_hi: float
    kind: str  # "allowed" | "forbidden"


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    k_range: tuple[float, float]
    r_squared: float
    envelope_k: np.ndarray
    envelope_R: np.ndarray


def default_grid_n(spec: SppSpec, k_lo: float, k_hi: float) -> int:
    """About 20 samples per oscillation of a comb spanning the full extent."""
    extent = max(spec.layout.extent, spec.layout.distances[0])
    return max(2, math.ceil(20 * (k_hi - k_lo) * extent / math.pi))


def _check_window(k_lo, k_hi):
    if not 0 < k_lo < k_hi:
        raise ValueError(f"need 0 < k_lo < k_hi, got [{k_lo}, {k_hi}]")


def attribute_order(spec: SppSpec, k: float, fallback: int = 0) -> int:
    """Smallest order s whose partial product prod_{p<=s} U vanishes at k.

    Very sharp resonances can leave the partial product above the threshold
    even at machine-precision brackets; ``fallback`` is returned then.
    """
    partial = np.cumprod(np.abs(u_factors(spec, np.array([k]))[:, 0]))
    hits = np.nonzero(partial < ORDER_THRESHOLD)[0]
    return int(hits[0]) + 1 if hits.size else fallback


def _bisect(f, a, b, fa, tol):
    """Vectorised bisection of the brackets [a_i, b_i] with f(a_i) = fa_i.

    Each bracket stops once it is narrower than ``tol`` or cannot be split in
    floating point.  Returns midpoints and final widths.
    """
    a, b, fa = (np.array(v, dtype=float) for v in (a, b, fa))
    active = np.ones(a.shape, dtype=bool)
    while True:
        m = 0.5 * (a + b)
        active &= (b - a > tol) & (m > a) & (m < b)
        if not active.any():
            break
        fm = f(m[active])
        idx = np.nonzero(active)[0]
        hit = fm == 0.0
        a[idx[hit]] = b[idx[hit]] = m[idx[hit]]
        left = ~hit & (np.sign(fm) == np.sign(fa[idx]))
        a[idx[left]], fa[idx[left]] = m[idx[left]], fm[left]
        right = ~hit & ~left
        b[idx[right]] = m[idx[right]]
    return 0.5 * (a + b), b - a


def find_resonances(spec: SppSpec, k_lo: float, k_hi: float, grid_n: int | None = None,
                    tol: float = 1e-15) -> list[Resonance]:
    """Unit-transmission wavenumbers of ``spec`` inside [k_lo, k_hi].

    Zeros of D(k) = zeta * prod_q U_{N_q-1}(Gamma_q) are bracketed by sign
    changes on a uniform grid and bisected to width ``tol`` (or to floating-point
    resolution, whichever comes first).  Each factor is
    scanned on its own so two roots from different orders falling in one grid
    cell are not lost.  Grid maxima with T >= 1 - 1e-8 that bracket no sign
    change are reported with ``tangent=True``.
    """
    _check_window(k_lo, k_hi)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if grid_n is None:
        grid_n = default_grid_n(spec, k_lo, k_hi)
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")

    ks = np.linspace(k_lo, k_hi, grid_n)
    factors = u_factors(spec, ks)
    roots = []
    for q in range(spec.order):
        sub = spec.truncated(q + 1)

        def f(k, sub=sub, q=q):
            return u_factors(sub, k)[q]

        vals = factors[q]
        roots += [(ks[i], 0.0, q + 1) for i in np.nonzero(vals == 0.0)[0]]
        cross = np.nonzero(vals[:-1] * vals[1:] < 0)[0]
        if cross.size:
            mids, widths = _bisect(f, ks[cross], ks[cross + 1], vals[cross], tol)
            roots += [(m, w, q + 1) for m, w in zip(mids, widths)]

    roots.sort()
    merged = []
    for k, w, q in roots:
        k, w = float(k), float(w)
        if merged and k - merged[-1][0] <= max(4 * tol, 1e-10):
            continue
        merged.append((k, w, q))

    found = []
    for k, w, q in merged:
        if transmission(spec, k) >= RESONANCE_FLOOR:
            found.append(Resonance(float(k), attribute_order(spec, k, q), float(w)))

    t = transmission(spec, ks)
    step = ks[1] - ks[0]
    for i in range(1, grid_n - 1):
        if t[i] >= RESONANCE_FLOOR and t[i] >= t[i - 1] and t[i] >= t[i + 1]:
            if all(abs(r.k_star - ks[i]) > step for r in found):
                found.append(Resonance(float(ks[i]), attribute_order(spec, ks[i], spec.order),
                                       float(step), tangent=True))
    return sorted(found, key=lambda r: r.k_star)


def count_band_peaks(spec: SppSpec, k_lo: float, k_hi: float, grid_n: int,
                     threshold: float = PEAK_THRESHOLD, refine: bool = True) -> int:
    """Number of transmission peaks reaching ``threshold`` inside the window.

    Peaks are strict local maxima of T on the grid.  With ``refine`` each one is
    polished by a bounded maximisation between its grid neighbours before the
    threshold is applied, so narrow peaks are judged by their true height.  The
    grid must still separate adjacent peaks by a few samples.
    """
    _check_window(k_lo, k_hi)
    if grid_n < 3:
        raise ValueError("grid_n must be >= 3")
    ks = np.linspace(k_lo, k_hi, grid_n)
    t = transmission(spec, ks)
    count = 0
    for i in range(1, grid_n - 1):
        if not (t[i] > t[i - 1] and t[i] > t[i + 1]):
            continue
        peak = t[i]
        if refine and peak < threshold:
            res = minimize_scalar(lambda k: -transmission(spec, k),
                                  bounds=(ks[i - 1], ks[i + 1]), method="bounded",
                                  options={"xatol": 1e-13})
            peak = max(peak, -res.fun)
        if peak >= threshold:
            count += 1
    return count


def classify_gamma_regions(spec: SppSpec, k_lo: float, k_hi: float,
                           grid_n: int) -> list[BandRegion]:
    """Split [k_lo, k_hi] into allowed (|Gamma_S| <= 1) and forbidden runs."""
    _check_window(k_lo, k_hi)
    ks = np.linspace(k_lo, k_hi, grid_n)
    excess = np.abs(gamma_sequence(spec, ks)[-1]) - 1.0
    forbidden = excess > 0
    regions = []
    start = k_lo
    for i in range(grid_n - 1):
        if forbidden[i] != forbidden[i + 1]:
            # Linear interpolation of |Gamma_S| - 1 between the two samples.
            a, b = excess[i], excess[i + 1]
            edge = ks[i] + (ks[i + 1] - ks[i]) * a / (a - b)
            regions.append(BandRegion(start, float(edge),
                                      "forbidden" if forbidden[i] else "allowed"))
            start = float(edge)
    regions.append(BandRegion(start, k_hi, "forbidden" if forbidden[-1] else "allowed"))
    return regions


def central_resonance(spec: SppSpec, k_window: tuple[float, float], **kw) -> Resonance:
    """The single lowest-order resonance in the window."""
    found = [r for r in find_resonances(spec, *k_window, **kw) if not r.tangent]
    if not found:
        raise AmbiguousResonanceError(f"no resonance in {k_window}")
    low = min(r.order_attribution for r in found)
    central = [r for r in found if r.order_attribution == low]
    if len(central) != 1:
        raise AmbiguousResonanceError(
            f"{len(central)} order-{low} resonances in {k_window}: "
            + ", ".join(f"{r.k_star:.7f}" for r in central))
    return central[0]


def resonance_shift(spec_a: SppSpec, spec_b: SppSpec, k_window: tuple[float, float],
                    **kw) -> float:
    """k*_b - k*_a of the central resonances; negative means a redshift."""
    return (central_resonance(spec_b, k_window, **kw).k_star
            - central_resonance(spec_a, k_window, **kw).k_star)


def scaling_fit(spec: SppSpec, k_lo: float, k_hi: float, samples: int = 200_000,
                bins_per_decade: int = 10) -> ScalingFit:
    """Fit log10 R against log10 k on the upper envelope of R.

    R is sampled on a log grid and reduced to its maximum in each of the
    log-spaced bins; R passes through zero at every resonance, so raw samples
    would not give a usable fit.
    """
    _check_window(k_lo, k_hi)
    if spec.V == 0:
        raise ValueError("V = 0 gives R identically zero; nothing to fit")
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    regime = 10 * max(abs(spec.V), 1 / spec.layout.distances[0])
    if k_lo < regime:
        raise ValueError(f"k_lo = {k_lo} is below the large-k regime bound {regime:.6g}")

    k = np.geomspace(k_lo, k_hi, samples)
    r = reflection(spec, k)
    n_bins = max(2, math.ceil(bins_per_decade * math.log10(k_hi / k_lo)))
    edges = np.geomspace(k_lo, k_hi, n_bins + 1)
    idx = np.clip(np.searchsorted(edges, k, side="right") - 1, 0, n_bins - 1)
    env_k, env_r = [], []
    for b in range(n_bins):
        sel = np.nonzero(idx == b)[0]
        if sel.size == 0:
            continue
        j = sel[np.argmax(r[sel])]
        if r[j] > 0:
            env_k.append(k[j])
            env_r.append(r[j])
    x, y = np.log10(env_k), np.log10(env_r)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(float(slope), float(intercept), (k_lo, k_hi), float(r2),
                      np.array(env_k), np.array(env_r))


def density_grid(base: CdcSpec, V: float, rho_lo: float, rho_hi: float, rho_n: int,
                 k_lo: float, k_hi: float, k_n: int, k_scale: str = "linear",
                 threads: int = 1) -> SpectrumGrid:
    """T(rho_i, k_j) for the comb ``base`` with rho swept, row-major in rho."""
    if not rho_lo > base.N - 1:
        raise ValueError(f"rho_lo must exceed N-1 = {base.N - 1}")
    _check_window(k_lo, k_hi)
    rho_axis = Axis("rho", rho_lo, rho_hi, rho_n)
    k_axis = Axis("k", k_lo, k_hi, k_n, k_scale)
    ks = k_axis.values()

    def row(rho):
        spec = SppSpec.from_cdc(CdcSpec(base.N, float(rho), base.L, base.S), V)
        return transmission(spec, ks)

    rhos = rho_axis.values()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, rhos))
    else:
        rows = [row(rho) for rho in rhos]
    meta = {"N": base.N, "L": base.L, "S": base.S, "V": V}
    return SpectrumGrid([rho_axis, k_axis], np.array(rows), meta)
