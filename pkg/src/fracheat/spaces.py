"""Discrete anisotropic Bessel-potential, Besov and Hoelder norms.

Also provides smooth nested cutoff families, synthetic rough fields with a
prescribed critical regularity, and the refinement scan that turns
"the norm stays bounded under refinement" into a number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _fft
from .quantize import AnisoGrid, GridFunction, next_pow2, theta
from .symbols import _smoothstep, japanese


def _check_d(u: GridFunction, d):
    if not isinstance(u.grid, AnisoGrid):
        raise TypeError("norms are defined for GridFunctions on an AnisoGrid")
    if d is not None and not math.isclose(float(d), u.grid.d, rel_tol=1e-12):
        raise ValueError(f"anisotropy {d} does not match the grid's d = {u.grid.d}")


def lp_norm(values, cell: float, p: float) -> float:
    a = np.abs(values)
    if np.isinf(p):
        return float(a.max())
    return float((cell * np.sum(a**p)) ** (1.0 / p))


def hp_norm(u: GridFunction, s: float, p: float = 2.0, d=None) -> float:
    """Discrete norm of H_p^{(s,s/d)}: the cell-weighted L_p norm of Theta^s u.

    For p = 2 the value is computed through Parseval (identical up to
    roundoff, without the inverse transform).
    """
    _check_d(u, d)
    if not p > 1:
        raise ValueError("p must exceed 1")
    g = u.grid
    if p == 2:
        uh = _fft.fftn(u.values)
        w = np.abs(uh) ** 2 * g.bracket_lattice ** (2.0 * s) if s else np.abs(uh) ** 2
        return float(np.sqrt(g.cell * w.sum() / g.size))
    return lp_norm(theta(s, u).values, g.cell, p)


def hp_norms(u: GridFunction, s_values, p: float = 2.0) -> np.ndarray:
    """hp_norm for many s at once (one forward transform)."""
    g = u.grid
    uh = _fft.fftn(u.values)
    if p == 2:
        a2 = np.abs(uh) ** 2
        logb = np.log(g.bracket_lattice)
        return np.array([np.sqrt(g.cell * np.sum(a2 * np.exp(2.0 * s * logb)) / g.size) for s in s_values])
    out = []
    for s in s_values:
        v = _fft.ifftn(uh * g.bracket_lattice**s)
        out.append(lp_norm(v, g.cell, p))
    return np.array(out)


def mixed_norm_sq(u: GridFunction, s: float) -> float:
    """||u||^2 of L_2(t; H^s(x)) plus ||u||^2 of H^{s/d}(t; L_2(x)) via split multipliers."""
    g = u.grid
    XI, TAU = g.lattice
    a2 = np.abs(_fft.fftn(u.values)) ** 2
    wx = japanese(XI) ** (2.0 * s)
    wt = (1.0 + TAU**2) ** (s / g.d)
    return float(g.cell * np.sum(a2 * (wx + wt)) / g.size)


def _periodic_offsets(N):
    k = np.arange(1, N)
    return k, np.minimum(k, N - k)


def besov_norm(u: GridFunction, s: float, p: float = 2.0, d=None, reduce: bool = False,
               kernel_floor: float = 1e-12) -> float:
    """Difference-quotient norm of B_p^{(s,s/d)} for 0 < s < 1.

    ``(||u||_p^p + sum_h |h|^{-n-ps} ||u(.+h,.) - u||_p^p dh
                 + sum_del |del|^{-1-ps/d} ||u(.,.+del) - u||_p^p ddel)^{1/p}``
    with lattice offsets up to half a period (periodic distance).  Offsets
    whose kernel weight relative to the nearest offset falls below
    ``kernel_floor`` are skipped.  For other s pass ``reduce=True`` to use
    ``||u||_{B^{s}} = ||Theta^r u||_{B^{s-r}}`` with s - r in (0, 1).
    """
    _check_d(u, d)
    if not 0 < s < 1:
        if not reduce:
            raise ValueError("besov_norm needs 0 < s < 1 (or reduce=True)")
        r = math.floor(s)
        s0 = s - r
        if s0 == 0:
            r, s0 = r - 0.5, 0.5
        return besov_norm(theta(r, u), s0, p, d, reduce=False, kernel_floor=kernel_floor)
    g = u.grid
    v = u.values
    n = g.n
    total = g.cell * np.sum(np.abs(v) ** p)
    # spatial differences
    if n == 1:
        offs = [((k,), dist * g.dx) for k, dist in zip(*_periodic_offsets(g.Nx))]
    else:
        offs = []
        for k1 in range(g.Nx):
            for k2 in range(g.Nx):
                if k1 == 0 and k2 == 0:
                    continue
                d1, d2 = min(k1, g.Nx - k1), min(k2, g.Nx - k2)
                offs.append(((k1, k2), g.dx * math.hypot(d1, d2)))
    ex = n + p * s
    wmin = g.dx ** (-ex)
    for shift, dist in offs:
        w = dist ** (-ex)
        if w < kernel_floor * wmin:
            continue
        diff = np.roll(v, shift=tuple(-k for k in shift), axis=tuple(range(n))) - v
        total += g.dx**n * w * g.cell * np.sum(np.abs(diff) ** p)
    ext = 1.0 + p * s / g.d
    wmin = g.dt ** (-ext)
    for m, dist in zip(*_periodic_offsets(g.Nt)):
        w = (dist * g.dt) ** (-ext)
        if w < kernel_floor * wmin:
            continue
        diff = np.roll(v, -m, axis=n) - v
        total += g.dt * w * g.cell * np.sum(np.abs(diff) ** p)
    return float(total ** (1.0 / p))


def _holder_offsets(u: GridFunction):
    """(distances, max |difference|) for spatial and temporal lattice offsets."""
    g = u.grid
    v = u.values
    n = g.n
    dx, mx = [], []
    if n == 1:
        for k in range(1, g.Nx // 2 + 1):
            dx.append(k * g.dx)
            mx.append(np.abs(np.roll(v, -k, axis=0) - v).max())
    else:
        for k1 in range(g.Nx // 2 + 1):
            for k2 in range(-(g.Nx // 2) + 1, g.Nx // 2 + 1):
                if k1 == 0 and k2 <= 0:
                    continue
                dx.append(g.dx * math.hypot(k1, k2))
                mx.append(np.abs(np.roll(v, (-k1, -k2), axis=(0, 1)) - v).max())
    dt, mt = [], []
    for m in range(1, g.Nt // 2 + 1):
        dt.append(m * g.dt)
        mt.append(np.abs(np.roll(v, -m, axis=n) - v).max())
    return float(np.max(np.abs(v))), np.array(dx), np.array(mx), np.array(dt), np.array(mt)


def _holder_from_offsets(offs, s, d):
    sup, dx, mx, dt, mt = offs
    return {"sup": sup, "spatial": float(np.max(mx / dx**s)), "temporal": float(np.max(mt / dt ** (s / d)))}


def holder_parts(u: GridFunction, s: float, d=None) -> dict:
    """Sup norm, spatial and temporal Hoelder seminorms of (A.14) type."""
    _check_d(u, d)
    if not 0 < s <= 1:
        raise ValueError("holder_norm needs 0 < s <= 1")
    return _holder_from_offsets(_holder_offsets(u), s, u.grid.d)


def holder_norm(u: GridFunction, s: float, d=None) -> float:
    """Anisotropic Hoelder norm: sup + spatial seminorm + temporal seminorm (exponent s/d)."""
    parts = holder_parts(u, s, d)
    return parts["sup"] + parts["spatial"] + parts["temporal"]


def holder_quotients(u: GridFunction, s_values) -> np.ndarray:
    """The Hoelder-norm expression for every exponent in ``s_values``.

    Exponents above 1 are allowed here: they are not norms of a function
    space but still separate the growth rates used by refinement scans.
    """
    offs = _holder_offsets(u)
    out = []
    for s in s_values:
        q = _holder_from_offsets(offs, s, u.grid.d)
        out.append(q["sup"] + q["spatial"] + q["temporal"])
    return np.array(out)


def local_norm(u: GridFunction, psi, s: float, p: float = 2.0, d=None, method: str = "hp") -> float:
    """Norm of the pointwise product psi * u (psi an array or an evaluator psi(X, T))."""
    w = psi_values(psi, u.grid)
    v = u.with_values(w * u.values)
    return _norm_by_method(v, s, p, d, method)


def psi_values(psi, grid):
    if callable(psi):
        X, T = grid.coords
        return np.asarray(psi(X, T), dtype=float)
    return np.asarray(psi, dtype=float)


def _norm_by_method(u, s, p, d, method):
    if method == "hp":
        return hp_norm(u, s, p, d)
    if method == "besov":
        return besov_norm(u, s, p, d, reduce=True)
    if method == "holder":
        return holder_norm(u, s, d)
    raise ValueError(f"unknown norm method {method!r}")


# ---------------------------------------------------------------- cutoffs

_STEP_SLOPE = None


def smoothstep_max_slope() -> float:
    """max of the derivative of the C-infinity transition on [0, 1]."""
    global _STEP_SLOPE
    if _STEP_SLOPE is None:
        t = np.linspace(0.0, 1.0, 20001)
        _STEP_SLOPE = float(np.max(np.gradient(_smoothstep(t), t)))
    return _STEP_SLOPE


@dataclass(frozen=True)
class CutoffFamily:
    """Nested C-infinity cutoffs psi_j(x,t) = phi_j(x) rho_j(t), 1 <= j <= depth.

    With w = 1/(depth+1), psi_j equals 1 where |x-x0| <= rx(1 - j w) and
    |t-t0| <= rt(1 - j w) and vanishes outside rx(1 - (j-1) w),
    rt(1 - (j-1) w).  Hence psi_{j+1} psi_j = psi_{j+1}, and all
    transitions have the same width.
    """

    center_x: tuple
    center_t: float
    rx: float
    rt: float
    depth: int = 3

    def _factor(self, dist, r, j):
        if not 1 <= j <= self.depth:
            raise ValueError(f"cutoff index must lie in 1..{self.depth}")
        w = 1.0 / (self.depth + 1)
        inner, outer = r * (1 - j * w), r * (1 - (j - 1) * w)
        return 1.0 - _smoothstep((dist - inner) / (outer - inner))

    def phi(self, j: int, X):
        X = np.asarray(X, dtype=float)
        c = np.asarray(self.center_x, dtype=float).reshape((-1,) + (1,) * (X.ndim - 1))
        dist = np.sqrt(np.sum((X - c) ** 2, axis=0))
        return self._factor(dist, self.rx, j)

    def rho(self, j: int, T):
        return self._factor(np.abs(np.asarray(T, dtype=float) - self.center_t), self.rt, j)

    def psi(self, j: int) -> Callable:
        if not 1 <= j <= self.depth:
            raise ValueError(f"cutoff index must lie in 1..{self.depth}")
        return lambda X, T: self.phi(j, X) * self.rho(j, T)

    def gradient_bound(self, j: int) -> dict:
        """Sup of |d_x psi_j| and |d_t psi_j| (transition slope over its width)."""
        sl = smoothstep_max_slope()
        w = 1.0 / (self.depth + 1)
        return {"x": sl / (self.rx * w), "t": sl / (self.rt * w)}

    def fits(self, grid: AnisoGrid) -> bool:
        """True when supp psi_1 lies inside the grid's fundamental cell."""
        cx = np.asarray(self.center_x, dtype=float)
        ok_x = np.all(cx - self.rx >= 0) and np.all(cx + self.rx <= grid.Lx)
        ok_t = self.center_t - self.rt >= 0 and self.center_t + self.rt <= grid.Lt
        return bool(ok_x and ok_t)


# ---------------------------------------------------------------- rough fields

_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix(z):
    z = (z + np.uint64(0x9E3779B97F4A7C15)) & _M64
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _M64
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _M64
    return z ^ (z >> np.uint64(31))


def lattice_phases(indices, seed: int) -> np.ndarray:
    """Deterministic phases theta(k) with theta(-k) = -theta(k).

    ``indices`` is an integer array shaped (n+1, ...).  The phase of a
    lattice point depends only on its integer index and the seed, so fields
    sampled on nested grids share their common modes.
    """
    idx = np.asarray(indices, dtype=np.int64)
    sgn = np.zeros(idx.shape[1:], dtype=np.int64)
    for c in idx:
        sgn = np.where(sgn == 0, np.sign(c), sgn)
    canon = idx * sgn
    with np.errstate(over="ignore"):
        h = np.full(idx.shape[1:], np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15) & _M64, dtype=np.uint64)
        for c in canon:
            h = _splitmix(h ^ c.astype(np.int64).view(np.uint64))
    frac = (h >> np.uint64(11)).astype(np.float64) / float(1 << 53)
    return sgn * 2.0 * np.pi * frac


@dataclass(frozen=True)
class BetaProfile:
    """Real field with Fourier transform {xi,tau}^(-beta) e^{i theta} on {xi,tau} <= K.

    Sums over the lattice approximate the continuous integrals, so the
    critical regularity in H_2 is beta - (n + d)/2.
    """

    beta: float
    seed: int = 0
    amplitude: float = 1.0

    def critical_s(self, n: int, d: float) -> float:
        return self.beta - (n + d) / 2.0

    def spectrum(self, grid: AnisoGrid, K=None) -> np.ndarray:
        """Continuous-transform values F on the lattice (DFT order)."""
        K = grid.reach if K is None else K
        XI, TAU = grid.lattice
        kap = grid.bracket_lattice
        idx = [np.rint(XI[i] * grid.Lx / (2 * np.pi)) for i in range(grid.n)]
        idx.append(np.rint(TAU * grid.Lt / (2 * np.pi)))
        ph = lattice_phases(np.stack(idx), self.seed)
        F = np.where(kap <= K, self.amplitude * kap ** (-self.beta), 0.0) * np.exp(1j * ph)
        return F

    def sample(self, grid: AnisoGrid, K=None) -> GridFunction:
        F = self.spectrum(grid, K)
        vals = _fft.ifftn(F).real * (grid.size / grid.volume)
        return GridFunction(grid, vals)


def scan_grids(d: float, levels: int = 3, Nx0: int = 32, n: int = 1, Lx: float = 2 * np.pi,
               Lt: float = 2 * np.pi):
    """Refinement ladder with fixed periods: Nx doubles, Nt keeps the balance.

    Periods are shared so every level samples the same continuous lattice
    and profiles restricted to each level's reach are nested.
    """
    out = []
    for ell in range(levels):
        Nx = Nx0 * 2**ell
        out.append(AnisoGrid.balanced(Nx, d, n=n, Lx=Lx, Lt=Lt))
    return out


# ---------------------------------------------------------------- scans

@dataclass
class NormScan:
    """Norms over an s-grid at several refinement levels."""

    s_grid: np.ndarray
    norms: np.ndarray  # shape (len(s_grid), levels)
    level_reach: list
    critical_s: float
    raw_crossing: float
    method_tag: str
    p: float
    growth_factor: float
    refinement_ratio: float
    growth: np.ndarray
    flags: list = field(default_factory=list)

    @property
    def boundary(self) -> str:
        for f in ("top", "bottom"):
            if f in self.flags:
                return f
        return ""

    def rows(self):
        for i, s in enumerate(self.s_grid):
            for ell in range(self.norms.shape[1]):
                yield (float(s), ell, float(self.norms[i, ell]))

    def summary(self) -> dict:
        return {
            "critical_s": float(self.critical_s),
            "raw_crossing": float(self.raw_crossing),
            "method": self.method_tag,
            "p": self.p,
            "growth_factor": self.growth_factor,
            "refinement_ratio": self.refinement_ratio,
            "level_reach": [float(r) for r in self.level_reach],
            "flags": list(self.flags),
            "s_range": [float(self.s_grid[0]), float(self.s_grid[-1])],
        }


def regularity_scan(fields, p: float = 2.0, d=None, s_grid=None, levels=None, method: str = "hp",
                    growth_factor: float = 1.5, ratio=None, bias_correct: bool = True) -> NormScan:
    """Estimate the critical regularity of a field from refinement growth.

    ``fields`` is a sequence of GridFunctions ordered from coarse to fine,
    or a callable ``level -> GridFunction`` together with ``levels``.
    The raw threshold is the smallest s where the norm grows by more than
    ``growth_factor`` between the two finest levels (linear interpolation).
    Beyond the critical value the norm grows like rho^(s - s_c) for a
    refinement ratio rho, so the raw threshold overshoots by
    log(growth_factor)/log(rho); with ``bias_correct`` that offset is
    removed.
    """
    if callable(fields):
        if levels is None:
            raise ValueError("levels required when fields is a callable")
        fields = [fields(ell) for ell in range(levels)]
    fields = list(fields)
    if len(fields) < 2:
        raise ValueError("need at least two refinement levels")
    for f in fields:
        _check_d(f, d)
    if s_grid is None:
        s_grid = np.round(np.arange(-0.5, 4.0 + 1e-9, 0.05), 10)
    s_grid = np.asarray(s_grid, dtype=float)
    if method == "hp":
        norms = np.stack([hp_norms(f, s_grid, p) for f in fields], axis=1)
    elif method == "besov":
        norms = np.array([[besov_norm(f, s, p, reduce=True) for f in fields] for s in s_grid])
    elif method == "holder":
        if np.any(s_grid <= 0):
            raise ValueError("Hoelder scans need positive exponents")
        norms = np.stack([holder_quotients(f, s_grid) for f in fields], axis=1)
    else:
        raise ValueError(f"unknown method {method!r}")
    flags = []
    if method == "hp" and np.any(np.diff(norms, axis=0) < -1e-12 * np.abs(norms[1:])):
        flags.append("non-monotone")
    reach = [f.grid.reach for f in fields]
    rho = ratio if ratio is not None else reach[-1] / reach[-2]
    with np.errstate(divide="ignore", invalid="ignore"):
        growth = norms[:, -1] / norms[:, -2]
    over = np.nonzero(~(growth <= growth_factor))[0]
    if len(over) == 0:
        raw = crit = float(s_grid[-1])
        flags.append("top")
    elif over[0] == 0:
        raw = crit = float(s_grid[0])
        flags.append("bottom")
    else:
        i = over[0]
        g0, g1 = growth[i - 1], growth[i]
        frac = (growth_factor - g0) / (g1 - g0) if np.isfinite(g1) and g1 != g0 else 0.0
        raw = float(s_grid[i - 1] + frac * (s_grid[i] - s_grid[i - 1]))
        crit = raw - math.log(growth_factor) / math.log(rho) if bias_correct else raw
        if np.any(growth[i:] <= growth_factor):
            flags.append("growth-nonmonotone")
    return NormScan(s_grid, norms, reach, float(crit), float(raw), method, float(p), growth_factor,
                    float(rho), growth, flags)


def holder_embedding_check(fields, s_hp: float, p: float, eps: float = 0.1, growth_factor: float = 1.5) -> dict:
    """Refinement stability of the Hoelder norm at exponent s_hp - n/p - eps.

    Returns the exponent used, the norms per level and whether the growth
    between the two finest levels stays within ``growth_factor``.
    """
    fields = list(fields)
    n = fields[0].grid.n
    e = s_hp - n / p - eps
    if not e > 0:
        return {"exponent": e, "applicable": False, "stable": None}
    e = min(e, 1.0)
    norms = [holder_norm(f, e) for f in fields]
    g = norms[-1] / norms[-2]
    return {"exponent": e, "applicable": True, "norms": norms, "growth": g, "stable": bool(g <= growth_factor)}
