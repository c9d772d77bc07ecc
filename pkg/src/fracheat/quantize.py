"""Discrete quantization of symbols on periodic space-time lattices.

Functions on ``R^n x R`` are represented on a torus with periods ``L_x``
(each spatial axis) and ``L_t``.  The frequency lattice is
``xi_k = 2 pi k / L_x`` and ``tau_m = 2 pi m / L_t`` with signed indexing,
so Fourier multipliers are applied exactly by the DFT.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _fft
from .symbols import SymbolSpec, bracket, partial, product_regularity, Multiindex


def _is_pow2(k: int) -> bool:
    return k >= 1 and (k & (k - 1)) == 0


def next_pow2(x: float) -> int:
    """Smallest power of two >= x (at least 1)."""
    return 1 << max(0, math.ceil(math.log2(max(x, 1.0))))


@dataclass(frozen=True)
class AnisoGrid:
    """Periodic space-time grid with anisotropy weight ``d``."""

    n: int
    Lx: float
    Nx: int
    Lt: float
    Nt: int
    d: float

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError("only n = 1 or 2 spatial dimensions are supported")
        if not (_is_pow2(self.Nx) and _is_pow2(self.Nt)):
            raise ValueError(f"grid counts must be powers of two (Nx={self.Nx}, Nt={self.Nt})")
        if not (self.Lx > 0 and self.Lt > 0):
            raise ValueError("periods must be positive")
        if not self.d > 0:
            raise ValueError("anisotropy d must be positive")

    # -- construction -------------------------------------------------
    @classmethod
    def balanced(cls, Nx, d, n=1, Lx=2 * np.pi, Nt=None, Lt=None):
        """Grid whose largest |tau|^(1/d) matches the largest <xi>.

        Give either ``Nt`` (the temporal period is then derived) or ``Lt``
        (the smallest power-of-two ``Nt`` reaching the balance is chosen).
        """
        xi_max = (Nx // 2 - 1) * 2 * np.pi / Lx
        target = (1.0 + xi_max**2) ** (d / 2.0)
        if Nt is not None and Lt is not None:
            raise ValueError("give Nt or Lt, not both")
        if Nt is not None:
            Lt = np.pi * Nt / target
        else:
            Lt = 2 * np.pi if Lt is None else Lt
            Nt = next_pow2(target * Lt / np.pi + 2.0)
        return cls(n, float(Lx), int(Nx), float(Lt), int(Nt), float(d))

    def refine(self) -> "AnisoGrid":
        """Double both counts, keeping the periods."""
        return AnisoGrid(self.n, self.Lx, 2 * self.Nx, self.Lt, 2 * self.Nt, self.d)

    # -- geometry -----------------------------------------------------
    @property
    def shape(self):
        return (self.Nx,) * self.n + (self.Nt,)

    @property
    def size(self) -> int:
        return self.Nx**self.n * self.Nt

    @property
    def dx(self) -> float:
        return self.Lx / self.Nx

    @property
    def dt(self) -> float:
        return self.Lt / self.Nt

    @property
    def cell(self) -> float:
        return self.dx**self.n * self.dt

    @property
    def volume(self) -> float:
        return self.Lx**self.n * self.Lt

    @cached_property
    def x1d(self):
        return self.dx * np.arange(self.Nx)

    @cached_property
    def t1d(self):
        return self.dt * np.arange(self.Nt)

    @cached_property
    def xi1d(self):
        return 2 * np.pi * np.fft.fftfreq(self.Nx, d=self.dx)

    @cached_property
    def tau1d(self):
        return 2 * np.pi * np.fft.fftfreq(self.Nt, d=self.dt)

    def _mesh(self, spatial, temporal):
        axes = [spatial] * self.n + [temporal]
        grids = np.meshgrid(*axes, indexing="ij")
        S = np.stack(grids[:-1])
        S.flags.writeable = False
        T = grids[-1]
        T.flags.writeable = False
        return S, T

    @cached_property
    def coords(self):
        """``(X, T)`` with ``X`` shaped (n, *shape)."""
        return self._mesh(self.x1d, self.t1d)

    @cached_property
    def lattice(self):
        """``(XI, TAU)`` frequency lattice in DFT order."""
        return self._mesh(self.xi1d, self.tau1d)

    @cached_property
    def bracket_lattice(self):
        XI, TAU = self.lattice
        b = bracket(XI, TAU, self.d)
        b.flags.writeable = False
        return b

    @property
    def xi_max(self) -> float:
        """Largest resolved positive spatial frequency."""
        return (self.Nx // 2 - 1) * 2 * np.pi / self.Lx

    @property
    def tau_max(self) -> float:
        return (self.Nt // 2 - 1) * 2 * np.pi / self.Lt

    @property
    def reach(self) -> float:
        """Largest K such that the ball {xi,tau} <= K lies inside the lattice box."""
        return float(min(np.sqrt(1.0 + self.xi_max**2), self.tau_max ** (1.0 / self.d)))

    def describe(self) -> dict:
        return {"type": "AnisoGrid", "n": self.n, "Lx": self.Lx, "Nx": self.Nx,
                "Lt": self.Lt, "Nt": self.Nt, "d": self.d}


@dataclass(frozen=True)
class LineGrid:
    """Uniform grid on [-R, R) representing the real line (with decay)."""

    R: float
    N: int

    def __post_init__(self):
        if not _is_pow2(self.N):
            raise ValueError("N must be a power of two")
        if not self.R > 0:
            raise ValueError("R must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.N

    @property
    def shape(self):
        return (self.N,)

    @property
    def size(self) -> int:
        return self.N

    @property
    def cell(self) -> float:
        return self.h

    @cached_property
    def x(self):
        v = -self.R + self.h * np.arange(self.N)
        v.flags.writeable = False
        return v

    @cached_property
    def xi(self):
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    def describe(self) -> dict:
        return {"type": "LineGrid", "R": self.R, "N": self.N}


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on an :class:`AnisoGrid` or :class:`LineGrid`."""

    grid: object
    values: np.ndarray
    domain_tag: str = "spacetime"

    def __post_init__(self):
        v = np.asarray(self.values)
        if not np.iscomplexobj(v):
            v = v.astype(float, copy=False)
        if v.shape != tuple(self.grid.shape):
            raise ValueError(f"value shape {v.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("GridFunction values must be finite")
        tag = "line" if isinstance(self.grid, LineGrid) else "spacetime"
        if self.domain_tag not in ("spacetime", "line"):
            raise ValueError("domain_tag must be 'spacetime' or 'line'")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "domain_tag", tag)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values, self.domain_tag)

    def norm(self, p: float = 2.0) -> float:
        """Discrete L_p norm with cell weights."""
        a = np.abs(self.values)
        if np.isinf(p):
            return float(a.max())
        return float((self.grid.cell * np.sum(a**p)) ** (1.0 / p))

    def __add__(self, other):
        return self.with_values(self.values + _vals(other))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other))

    def __mul__(self, other):
        return self.with_values(self.values * _vals(other))

    __rmul__ = __mul__


def _vals(o):
    return o.values if isinstance(o, GridFunction) else o


def relative_l2(u, v) -> float:
    """||u - v|| / ||v|| for grid functions or arrays."""
    a, b = np.asarray(_vals(u)), np.asarray(_vals(v))
    return float(np.linalg.norm((a - b).ravel()) / np.linalg.norm(b.ravel()))


# ---------------------------------------------------------------- multipliers

def _require_aniso(u):
    if not isinstance(u.grid, AnisoGrid):
        raise TypeError("operation needs a GridFunction on an AnisoGrid")


def symbol_on_lattice(h: SymbolSpec, grid: AnisoGrid) -> np.ndarray:
    """Evaluate an x-independent symbol on the grid's frequency lattice."""
    XI, TAU = grid.lattice
    vals = h(np.zeros_like(XI), XI, TAU)
    return np.broadcast_to(vals, grid.shape)


def multiply_spectrum(mult: np.ndarray, u: GridFunction) -> GridFunction:
    """inverse-DFT(mult * DFT(u)) for a precomputed lattice multiplier."""
    return u.with_values(_fft.ifftn(mult * _fft.fftn(u.values)))


def apply_multiplier(h: SymbolSpec, u: GridFunction) -> GridFunction:
    """Apply an x-independent symbol as an exact lattice Fourier multiplier."""
    _require_aniso(u)
    if h.x_dependent:
        raise ValueError("apply_multiplier needs an x-independent symbol; use apply_xdep")
    return multiply_spectrum(symbol_on_lattice(h, u.grid), u)


def theta(s: float, u: GridFunction) -> GridFunction:
    """Order-reducing operator with symbol {xi,tau}^s."""
    _require_aniso(u)
    if s == 0:
        return u.with_values(u.values.astype(complex))
    return multiply_spectrum(u.grid.bracket_lattice**s, u)


def multiplier_sup(h: SymbolSpec, grid: AnisoGrid, s: float = 0.0) -> float:
    """Lattice sup of |{xi,tau}^(s-m) h {xi,tau}^(-s)| = |h| {xi,tau}^(-m)."""
    b = grid.bracket_lattice
    return float(np.max(np.abs(symbol_on_lattice(h, grid)) * b ** (s - h.order) * b ** (-s)))


DEFAULT_XDEP_BUDGET = 1 << 17


class SymbolTable:
    """Values h(x_j, xi, tau) of an x-dependent symbol at every spatial node.

    Tabulating once makes repeated quantized applications on one grid cheap;
    memory is (spatial points)^2 * Nt complex numbers.
    """

    def __init__(self, h: SymbolSpec, grid: "AnisoGrid", budget: int = DEFAULT_XDEP_BUDGET, chunk: int = 16):
        if grid.size > budget:
            raise ValueError(f"grid has {grid.size} points, above the direct-summation budget {budget}")
        n, Nx, Nt = grid.n, grid.Nx, grid.Nt
        P = Nx**n
        XI, TAU = grid.lattice
        self.grid = grid
        self.xs = np.stack(np.meshgrid(*([grid.x1d] * n), indexing="ij")).reshape(n, P)
        ks = np.stack(np.meshgrid(*([grid.xi1d] * n), indexing="ij")).reshape(n, P)
        self.phase = np.exp(1j * (self.xs.T @ ks))  # (points, freqs)
        xi_f = XI.reshape(n, P, Nt)
        tau_f = TAU.reshape(P, Nt)
        vals = np.empty((P, P, Nt), dtype=complex)
        for start in range(0, P, chunk):
            sl = slice(start, min(start + chunk, P))
            xc = self.xs[:, sl][:, :, None, None]
            vals[sl] = np.broadcast_to(h(xc, xi_f[:, None], tau_f[None]), (xc.shape[1], P, Nt))
        self.values = vals

    def apply(self, u: GridFunction) -> GridFunction:
        g = self.grid
        if u.grid != g:
            raise ValueError("grid mismatch")
        P, Nt = self.values.shape[1], g.Nt
        uh = _fft.fftn(u.values).reshape(P, Nt)
        F = _fft.ifft(self.values * uh[None], axis=-1) * Nt  # sum over tau
        out = np.einsum("jk,jkl->jl", self.phase, F) / g.size
        return u.with_values(out.reshape(g.shape))


def apply_xdep(h, u: GridFunction, budget: int = DEFAULT_XDEP_BUDGET, chunk: int = 16) -> GridFunction:
    """Kohn-Nirenberg quantization by direct summation over the lattice.

    ``(Hu)(x, t) = N^-1 sum_{xi,tau} exp(i(x.xi + t tau)) h(x, xi, tau) u^(xi, tau)``.
    The tau-sum is an inverse DFT (exact); the xi-sum is carried out
    explicitly for every spatial point, so the cost is quadratic in the
    number of spatial points.  Grids with more than ``budget`` points are
    rejected.  ``h`` may be a :class:`SymbolSpec` or a prebuilt
    :class:`SymbolTable`.
    """
    _require_aniso(u)
    table = h if isinstance(h, SymbolTable) else SymbolTable(h, u.grid, budget, chunk)
    return table.apply(u)


def restrict_spectrum(u: GridFunction, grid: AnisoGrid, radius=None) -> GridFunction:
    """Band-limit ``u`` to the lattice of a coarser grid with the same periods.

    Coefficients at common lattice points are kept (Nyquist rows of the
    coarse grid are dropped so real fields stay real), everything else is
    discarded.  This gives the resolution-``grid`` version of a field that
    was formed on a finer grid, free of the aliasing a coarse-grid product
    would introduce.  With ``radius`` only coefficients with
    {xi,tau} <= radius are kept.
    """
    _require_aniso(u)
    g = u.grid
    if (g.n, g.d) != (grid.n, grid.d) or not (math.isclose(g.Lx, grid.Lx) and math.isclose(g.Lt, grid.Lt)):
        raise ValueError("grids must share dimension, anisotropy and periods")
    if grid.Nx > g.Nx or grid.Nt > g.Nt:
        raise ValueError("target grid must not be finer")
    uh = _fft.fftn(u.values)

    def sel(Nc, Nf):
        k = np.fft.fftfreq(Nc, 1.0 / Nc).astype(int)
        keep = np.abs(k) < Nc // 2
        return np.mod(k, Nf), keep

    ix, kx = sel(grid.Nx, g.Nx)
    it, kt = sel(grid.Nt, g.Nt)
    sub = uh[np.ix_(*([ix] * g.n), it)]
    mask = np.ix_(*([kx] * g.n), kt)
    out = np.zeros(grid.shape, dtype=complex)
    out[mask] = sub[mask]
    if radius is not None:
        out[grid.bracket_lattice > radius] = 0.0
    vals = _fft.ifftn(out) * (grid.size / g.size)
    if not np.iscomplexobj(u.values):
        vals = vals.real
    return GridFunction(grid, vals, u.domain_tag)


def leibniz_truncated(h: SymbolSpec, h2: SymbolSpec, J: int) -> SymbolSpec:
    """Truncated Leibniz product sum_{|alpha|<J} (1/alpha!) D_xi^alpha h d_x^alpha h2.

    ``D = -i d``.  Derivatives come from the finite-difference engine of
    :mod:`fracheat.symbols` (or the analytic derivatives if supplied).
    """
    if not 1 <= J <= 3:
        raise ValueError("Leibniz depth J must satisfy 1 <= J <= 3")
    if not math.isclose(h.d, h2.d):
        raise ValueError("symbols must share the anisotropy")
    n = h.n
    alphas = [al for al in _alpha_list(n, J - 1)]

    def ev(x, xi, tau):
        x = np.broadcast_to(x, np.broadcast(x, xi).shape).astype(float)
        xi = np.broadcast_to(xi, x.shape).astype(float)
        tau = np.broadcast_to(tau, x.shape[1:]).astype(float)
        total = 0.0
        for al in alphas:
            k = sum(al)
            coef = (-1j) ** k / math.prod(math.factorial(a) for a in al)
            if k and not h2.x_dependent:
                continue
            dh, _ = partial(h, x, xi, tau, Multiindex(al, (0,) * n, 0))
            dh2, _ = partial(h2, x, xi, tau, Multiindex((0,) * n, al, 0))
            total = total + coef * dh * dh2
        return total

    m, nu = product_regularity(h.order, h.regularity, h2.order, h2.regularity)
    return SymbolSpec(ev, m, nu, h.anisotropy, h.x_dependent or h2.x_dependent, n,
                      name=f"({h.name})#{J}({h2.name})")


def _alpha_list(n, kmax):
    import itertools

    out = []
    for al in itertools.product(range(kmax + 1), repeat=n):
        if sum(al) <= kmax:
            out.append(tuple(al))
    return sorted(out, key=sum)


# ---------------------------------------------------------------- 1D flat model

def xi_pm(t: float, sign: str, u: GridFunction, tol: float = 1e-8) -> GridFunction:
    """Apply (1 + i xi)^t (sign '+') or (1 - i xi)^t (sign '-') on a LineGrid.

    Principal branch; the real part 1 keeps the argument off the cut.
    Warns when the input does not decay at the ends of the grid, since the
    periodic DFT would then wrap the tails around.
    """
    if not isinstance(u.grid, LineGrid):
        raise TypeError("xi_pm needs a GridFunction on a LineGrid")
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    v = u.values
    peak = np.max(np.abs(v))
    if peak > 0 and max(abs(v[0]), abs(v[-1])) > tol * peak:
        warnings.warn("input does not decay at the LineGrid boundary; wrap-around contamination likely",
                      RuntimeWarning, stacklevel=2)
    if t == 0:
        return u.with_values(v.copy())
    g = u.grid
    sgn = 1.0 if sign == "+" else -1.0
    if np.isrealobj(v):
        xi = 2 * np.pi * np.fft.rfftfreq(g.N, d=g.h)
        mult = (1.0 + sgn * 1j * xi) ** t
        out = _fft.irfft(mult * _fft.rfft(v), g.N)
    else:
        mult = (1.0 + sgn * 1j * g.xi) ** t
        out = _fft.ifft(mult * _fft.fft(v))
    return u.with_values(out)


def poisson_k0(phi: float, grid: LineGrid) -> GridFunction:
    """phi * e^{-x} on x > 0, zero on x < 0 (jump sampled at its midpoint value)."""
    x = grid.x
    vals = np.where(x > 0, phi * np.exp(-np.where(x > 0, x, 0.0)), 0.0)
    vals = np.where(x == 0, 0.5 * phi, vals)
    return GridFunction(grid, vals, "line")


def support_leakage(u: GridFunction, band: float = 0.05) -> float:
    """Relative L2 mass of ``u`` on x < -band * R."""
    g = u.grid
    a = np.abs(u.values) ** 2
    tot = a.sum()
    if tot == 0:
        return 0.0
    return float(a[g.x < -band * g.R].sum() / tot)
