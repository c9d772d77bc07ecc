"""Restricted fractional Laplacian on (-1, 1) with exterior Dirichlet condition.

Two discretizations on the nodes x_i = -1 + i h, h = 2/(N+1):

``galerkin``
    P1 finite elements with the exact energy
    Q(u) = c/2 int int (u(x) - u(y))^2 / |x - y|^{1+2a} dx dy of the
    piecewise-linear interpolant (zero outside the interval).  The stiffness
    matrix S is Toeplitz and the nodal operator is A = S/h (lumped mass).
    A is an M-matrix only for a above roughly 0.243.
``collocation``
    Nodal quadrature of the singular integral with the interpolant
    integrated exactly against the kernel.  Off-diagonal weights are
    positive for every a in (0, 1), so A is always an M-matrix.

``auto`` (the default) takes the Galerkin matrix whenever it is an M-matrix
and falls back to collocation otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special
from scipy.linalg import toeplitz

SCHEMES = ("auto", "galerkin", "collocation")


def _check_a(a: float) -> float:
    a = float(a)
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0,1)")
    return a


def c1a(a: float) -> float:
    """Normalizing constant of the one-dimensional kernel: 4^a Gamma(1/2+a) / (sqrt(pi) |Gamma(-a)|)."""
    a = _check_a(a)
    return 4.0**a * special.gamma(0.5 + a) / (math.sqrt(math.pi) * abs(special.gamma(-a)))


def getoor_constant(a: float) -> float:
    """K with (-Delta)^a (1 - x^2)_+^a = K on (-1, 1)."""
    a = _check_a(a)
    return 4.0**a * special.gamma(a + 1.0) * special.gamma(a + 0.5) / special.gamma(0.5)


def getoor_solution(x, a: float) -> np.ndarray:
    """Exact solution of (-Delta)^a u = 1 on (-1, 1), u = 0 outside."""
    x = np.asarray(x, dtype=float)
    return np.clip(1.0 - x * x, 0.0, None) ** a / getoor_constant(a)


@dataclass(frozen=True)
class IntervalDomain:
    """Uniform interior nodes of (-1, 1)."""

    N: int

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("need at least two interior nodes")

    @property
    def h(self) -> float:
        return 2.0 / (self.N + 1)

    @property
    def x(self) -> np.ndarray:
        return -1.0 + self.h * np.arange(1, self.N + 1)

    @property
    def dist(self) -> np.ndarray:
        """Distance of each node to the boundary."""
        return 1.0 - np.abs(self.x)


# ---------------------------------------------------------------- stencils

def _expm1_power(k, eta):
    """(|k|^eta - 1)/eta, with the limit log|k| at eta = 0; 0 * that at k = 0 handled by callers."""
    k = np.abs(np.asarray(k, dtype=float))
    with np.errstate(divide="ignore"):
        L = np.log(np.where(k > 0, k, 1.0))
    if eta == 0.0:
        return L
    return np.expm1(eta * L) / eta


def galerkin_stencil(a: float, N: int) -> np.ndarray:
    """t_k, k = 0..N-1, of the P1 energy sum_{ij} t_{i-j} u_i u_j for h = 1.

    t_k = sin(pi a)/pi Gamma(2a) / ((1+eta)(2+eta)) delta^4 [k^2 E(k)],
    E(k) = (|k|^eta - 1)/eta, eta = 1 - 2a, delta^4 the centred fourth
    difference.  The expm1 form stays accurate through a = 1/2.  For other
    h the stencil scales like h^(1-2a).
    """
    a = _check_a(a)
    eta = 1.0 - 2.0 * a
    k = np.arange(-2, N + 2, dtype=float)
    g = np.where(k == 0, 0.0, k * k * _expm1_power(k, eta))
    d4 = g[:-4] - 4 * g[1:-3] + 6 * g[2:-2] - 4 * g[3:-1] + g[4:]
    C = math.sin(math.pi * a) / math.pi * special.gamma(2 * a) / ((1 + eta) * (2 + eta))
    return C * d4


def _G(z, a):
    eta = 1.0 - 2.0 * a
    return -_expm1_power(z, eta) / (2.0 * a)


def collocation_stencil(a: float, N: int):
    """(diagonal, omega_1..omega_N) of the collocation matrix for h = 1, without c_{1,a}.

    omega_k = delta^2 G(k) for k >= 2 with G'' = z^(-1-2a); the near weight
    and the diagonal collect the exactly integrated interpolant on the
    nearest cells and the exterior.
    """
    a = _check_a(a)
    k = np.arange(1, N + 1, dtype=float)
    w = np.empty(N)
    w[1:] = _G(k[1:] + 1, a) - 2 * _G(k[1:], a) + _G(k[1:] - 1, a)
    w[0] = 1.0 / (2.0 * a) + _G(2.0, a) - _G(1.0, a) + 1.0 / (2.0 - 2.0 * a)
    diag = 1.0 / a + 1.0 / (1.0 - a)
    return diag, w


# ---------------------------------------------------------------- model

@dataclass
class FracDirichletModel:
    """Nodal operator A approximating the restricted fractional Laplacian."""

    a: float
    domain: IntervalDomain
    A: np.ndarray
    scheme: str
    kernel_scale: float = 1.0
    info: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.domain.N

    @property
    def h(self) -> float:
        return self.domain.h

    @property
    def x(self) -> np.ndarray:
        return self.domain.x

    @cached_property
    def eig(self):
        """Eigenvalues (ascending) and orthonormal eigenvectors of the symmetric A."""
        lam, V = np.linalg.eigh(self.A)
        return lam, V

    @property
    def lambda_min(self) -> float:
        return float(self.eig[0][0])

    def propagator(self, t: float) -> np.ndarray:
        lam, V = self.eig
        return (V * np.exp(-t * lam)) @ V.T

    def describe(self) -> dict:
        return {"a": self.a, "N": self.N, "h": self.h, "scheme": self.scheme,
                "kernel_scale": self.kernel_scale, **self.info}


def _galerkin_matrix(a, N):
    h = 2.0 / (N + 1)
    S = toeplitz(galerkin_stencil(a, N)) * h ** (1.0 - 2.0 * a)
    return S / h


def _collocation_matrix(a, N):
    h = 2.0 / (N + 1)
    diag, w = collocation_stencil(a, N)
    col = np.r_[diag, -w[: N - 1]]
    return c1a(a) * h ** (-2.0 * a) * toeplitz(col)


MIN_NODES = 16


def assemble_restricted_fraclap(a: float, domain, scheme: str = "auto", kernel_scale: float = 1.0) -> FracDirichletModel:
    """Assemble A on the interior nodes of ``domain`` (an IntervalDomain or a node count).

    ``kernel_scale`` multiplies the kernel (and hence A).  The matrix is
    symmetrized after assembly; a relative asymmetry above 1e-8 before
    symmetrization is treated as an assembly error.  The returned model
    records whether A is an M-matrix (nonpositive off-diagonal entries,
    nonnegative row sums).
    """
    a = _check_a(a)
    domain = domain if isinstance(domain, IntervalDomain) else IntervalDomain(int(domain))
    N = domain.N
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    if not kernel_scale > 0:
        raise ValueError("kernel_scale must be positive")
    if N < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} interior nodes")
    if scheme in ("auto", "galerkin"):
        A = _galerkin_matrix(a, N)
        chosen = "galerkin"
        if scheme == "auto" and not _is_m_matrix(A):
            chosen = "collocation"
            A = _collocation_matrix(a, N)
    else:
        chosen = "collocation"
        A = _collocation_matrix(a, N)
    A = kernel_scale * A
    asym = float(np.max(np.abs(A - A.T)) / np.max(np.abs(A)))
    if asym > 1e-8:
        raise RuntimeError(f"assembled matrix is not symmetric (relative defect {asym:.2e})")
    A = 0.5 * (A + A.T)
    off = A[~np.eye(N, dtype=bool)]
    info = {
        "m_matrix": _is_m_matrix(A),
        "max_offdiag": float(off.max()),
        "min_row_sum": float(A.sum(axis=1).min()),
        "asymmetry": asym,
        "requested_scheme": scheme,
    }
    return FracDirichletModel(a, domain, A, chosen, float(kernel_scale), info)


def _is_m_matrix(A) -> bool:
    off = A - np.diag(np.diag(A))
    return bool(off.max() <= 0.0 and A.sum(axis=1).min() >= -1e-12 * np.abs(A).max())


# ---------------------------------------------------------------- energies

def quadratic_form(model: FracDirichletModel, u, v=None) -> float:
    """Q_h(u, v) = h u^T A v (equal to the P1 energy for the Galerkin scheme)."""
    u = np.asarray(u, dtype=float)
    v = u if v is None else np.asarray(v, dtype=float)
    return float(model.h * u @ (model.A @ v))


def _interp_diff_sq(vals: np.ndarray, h: float, z: np.ndarray) -> np.ndarray:
    """g(z) = int (w(x+z) - w(x))^2 dx for the P1 interpolant w of ``vals`` (zero outside)."""
    N = len(vals)
    out = np.empty(len(z))
    for q, zz in enumerate(z):
        m = int(math.floor(zz / h))
        th = zz / h - m
        if th > 1 - 1e-14:
            m, th = m + 1, 0.0
        pad = m + 3
        V = np.zeros(N + 2 + 2 * pad)
        V[pad + 1: pad + 1 + N] = vals  # node i (0..N+1) at index pad + i
        i = np.arange(-m - 2, N + 2) + pad
        v = lambda j: V[np.clip(j, 0, len(V) - 1)] * ((j >= 0) & (j < len(V)))  # noqa: E731
        D0 = (1 - th) * v(i + m) + th * v(i + m + 1) - v(i)
        Dm = v(i + m + 1) - (th * v(i) + (1 - th) * v(i + 1))
        D1 = (1 - th) * v(i + m + 1) + th * v(i + m + 2) - v(i + 1)
        seg1 = (1 - th) * h * (D0 * D0 + D0 * Dm + Dm * Dm) / 3.0
        seg2 = th * h * (Dm * Dm + Dm * D1 + D1 * D1) / 3.0
        out[q] = float(np.sum(seg1 + seg2))
    return out


def quadratic_form_direct(a: float, domain: IntervalDomain, u, kernel_scale: float = 1.0, nodes: int = 12) -> float:
    """Energy c/2 int int (w(x)-w(y))^2 |x-y|^(-1-2a) dx dy of the P1 interpolant w.

    Computed independently of any stencil: the double integral is written
    as c int_0^inf z^(-1-2a) g(z) dz with g(z) = ||w(.+z) - w||^2.  g is a
    cubic on each interval [m h, (m+1) h]; the first interval is integrated
    with Gauss-Jacobi nodes for the weight z^(1-2a), the others with
    Gauss-Legendre, and the tail z >= 2 in closed form.
    """
    a = _check_a(a)
    u = np.asarray(u, dtype=float)
    h = domain.h
    nn = np.r_[0.0, u, 0.0]
    l2 = float(np.sum(h * (nn[:-1] ** 2 + nn[:-1] * nn[1:] + nn[1:] ** 2) / 3.0))
    # first cell: g(z) = z^2 (c2 + c3 z), integrand z^(1-2a) (c2 + c3 z)
    xj, wj = special.roots_jacobi(nodes, 0.0, 1.0 - 2.0 * a)  # weight (1+s)^(1-2a) on [-1,1]
    zj = 0.5 * h * (xj + 1.0)
    gj = _interp_diff_sq(u, h, zj)
    total = float(np.sum(wj * gj / zj**2)) * (0.5 * h) ** (2.0 - 2.0 * a)
    xl, wl = np.polynomial.legendre.leggauss(nodes)
    M = domain.N + 1
    for m in range(1, M):
        z = h * (m + 0.5 * (xl + 1.0))
        total += 0.5 * h * float(np.sum(wl * z ** (-1.0 - 2.0 * a) * _interp_diff_sq(u, h, z)))
    Z = M * h
    total += 2.0 * l2 * Z ** (-2.0 * a) / (2.0 * a)
    return kernel_scale * c1a(a) * total


# ---------------------------------------------------------------- steady problem

def _nodal(f, model: FracDirichletModel, t=None) -> np.ndarray:
    if callable(f):
        v = f(model.x) if t is None else f(model.x, t)
        return np.broadcast_to(np.asarray(v, dtype=float), (model.N,)).copy()
    return np.broadcast_to(np.asarray(f, dtype=float), (model.N,)).copy()


def steady_solve(model: FracDirichletModel, f=1.0) -> np.ndarray:
    """Nodal solution of A u = f (f a constant, nodal array or callable of x)."""
    return np.linalg.solve(model.A, _nodal(f, model))


# ---------------------------------------------------------------- heat equation

HEAT_SCHEMES = ("implicit-euler", "crank-nicolson", "exponential")
MAX_STEPS = 1_000_000


@dataclass
class HeatRun:
    """States u(t_m), m = 0..M, of d_t u + A u = f."""

    times: np.ndarray
    states: np.ndarray  # (M+1, N)
    scheme: str
    model: FracDirichletModel

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def norms(self, p: float = 2.0) -> np.ndarray:
        h = self.model.h
        if math.isinf(p):
            return np.abs(self.states).max(axis=1)
        return (h * np.sum(np.abs(self.states) ** p, axis=1)) ** (1.0 / p)


def heat_solve(model: FracDirichletModel, f=0.0, T: float = 1.0, M: int = 100, u0=None,
               scheme: str = "implicit-euler") -> HeatRun:
    """Time stepping for d_t u + A u = f on (0, T] with M uniform steps.

    ``f`` is a constant, a nodal array, an array of shape (M, N) holding the
    forcing on each step, or a callable f(x, t).  Implicit Euler uses
    f(t_m), Crank-Nicolson the average of f(t_{m-1}) and f(t_m), and the
    exponential scheme (exact for forcing constant on each step) f at the
    step midpoint.  All schemes work in the eigenbasis of A.
    """
    if scheme not in HEAT_SCHEMES:
        raise ValueError(f"scheme must be one of {HEAT_SCHEMES}")
    if not (isinstance(M, (int, np.integer)) and 1 <= M <= MAX_STEPS):
        raise ValueError(f"number of steps must be an integer in [1, {MAX_STEPS}]")
    if not T > 0:
        raise ValueError("T must be positive")
    N = model.N
    lam, V = model.eig
    dt = T / M
    times = np.linspace(0.0, T, M + 1)
    u = np.zeros(N) if u0 is None else _nodal(u0, model)
    per_step = isinstance(f, np.ndarray) and f.ndim == 2
    if per_step and f.shape != (M, N):
        raise ValueError(f"per-step forcing must have shape {(M, N)}")

    def force(m):
        """Transformed forcing used on step m (1-based)."""
        if per_step:
            return V.T @ f[m - 1]
        if callable(f):
            if scheme == "implicit-euler":
                return V.T @ _nodal(f, model, times[m])
            if scheme == "crank-nicolson":
                return V.T @ (0.5 * (_nodal(f, model, times[m - 1]) + _nodal(f, model, times[m])))
            return V.T @ _nodal(f, model, times[m] - 0.5 * dt)
        return fconst

    fconst = None if (per_step or callable(f)) else V.T @ _nodal(f, model)
    if scheme == "implicit-euler":
        amp = 1.0 / (1.0 + dt * lam)
        gain = dt * amp
    elif scheme == "crank-nicolson":
        amp = (1.0 - 0.5 * dt * lam) / (1.0 + 0.5 * dt * lam)
        gain = dt / (1.0 + 0.5 * dt * lam)
    else:
        amp = np.exp(-dt * lam)
        gain = -np.expm1(-dt * lam) / lam
    uh = V.T @ u
    states = np.empty((M + 1, N))
    states[0] = u
    for m in range(1, M + 1):
        uh = amp * uh + gain * force(m)
        states[m] = V @ uh
    return HeatRun(times, states, scheme, model)


def decay_rate_check(model: FracDirichletModel, T: float = None, M: int = 200, seed: int = 0, rtol: float = 1e-2) -> dict:
    """Fitted late-time decay rate of ||u(t)||_2 for f = 0 against lambda_min."""
    rng = np.random.default_rng(seed)
    lam = model.eig[0]
    T = T if T is not None else 8.0 / lam[0]
    run = heat_solve(model, 0.0, T, M, u0=np.abs(rng.standard_normal(model.N)) + 0.5, scheme="exponential")
    nrm = run.norms(2)
    late = run.times >= 0.5 * T
    rate = -float(np.polyfit(run.times[late], np.log(nrm[late]), 1)[0])
    rel = abs(rate - lam[0]) / lam[0]
    return {"rate": rate, "lambda_min": float(lam[0]), "rel_error": rel, "pass": bool(rel <= rtol)}


# ---------------------------------------------------------------- boundary exponent

@dataclass
class ExponentFit:
    exponent: float
    coefficient: float
    linear: float
    window: tuple
    nodes: int
    residual: float
    side: str
    model: str

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "coefficient": self.coefficient,
            "linear": self.linear,
            "window": list(self.window),
            "nodes": self.nodes,
            "residual": self.residual,
            "side": self.side,
            "model": self.model,
        }


def boundary_exponent_fit(u, domain: IntervalDomain, side: str = "right", dmin_factor: float = 4.0,
                          dmax: float = 0.2, model: str = "power-linear") -> ExponentFit:
    """Least-squares fit of log u = alpha log dist + log C (+ c1 dist).

    Only nodes with dmin_factor * h <= dist <= dmax on the chosen side are
    used, which excludes the nodes nearest the endpoint where the discrete
    solution is polluted.  ``model="power"`` drops the linear correction.
    """
    u = np.asarray(u, dtype=float)
    x, dist, h = domain.x, domain.dist, domain.h
    sel = (dist >= dmin_factor * h - 1e-12) & (dist <= dmax + 1e-12)
    sel &= (x > 0) if side == "right" else (x < 0)
    if sel.sum() < 4:
        raise ValueError("too few nodes in the fitting window")
    if np.any(u[sel] <= 0):
        raise ValueError("solution changes sign in the fitting window")
    dd = dist[sel]
    cols = [np.log(dd), np.ones_like(dd)]
    if model == "power-linear":
        cols.append(dd)
    elif model != "power":
        raise ValueError("model must be 'power' or 'power-linear'")
    B = np.stack(cols, axis=1)
    y = np.log(u[sel])
    coef, *_ = np.linalg.lstsq(B, y, rcond=None)
    resid = float(np.sqrt(np.mean((B @ coef - y) ** 2)))
    return ExponentFit(float(coef[0]), float(math.exp(coef[1])), float(coef[2]) if len(coef) > 2 else 0.0,
                       (float(dd.min()), float(dd.max())), int(sel.sum()), resid, side, model)


# ---------------------------------------------------------------- Markov and contraction

def markov_check(model: FracDirichletModel, u) -> dict:
    """Compare Q(clip(u, 0, 1)) with Q(u)."""
    u = np.asarray(u, dtype=float)
    qu = quadratic_form(model, u)
    qc = quadratic_form(model, np.clip(u, 0.0, 1.0))
    return {"Q": qu, "Q_clipped": qc, "pass": bool(qc <= qu * (1 + 1e-12) + 1e-14)}


def markov_trials(model: FracDirichletModel, trials: int = 100, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    res = [markov_check(model, rng.uniform(-2.0, 2.0, model.N)) for _ in range(trials)]
    worst = max(r["Q_clipped"] / r["Q"] for r in res)
    passed = sum(r["pass"] for r in res)
    return {"trials": trials, "passed_trials": passed, "worst_ratio": worst, "pass": passed == trials}


def semigroup_contraction_check(model: FracDirichletModel, p: float = 2.0, trials: int = 20, times=None,
                                seed: int = 0, rtol: float = 1e-12) -> dict:
    """max over random u_0 and t of ||e^{-tA} u_0||_p / ||u_0||_p."""
    rng = np.random.default_rng(seed)
    times = np.logspace(-4, 0, 9) if times is None else np.asarray(times, dtype=float)
    h = model.h

    def lp(v):
        if math.isinf(p):
            return float(np.abs(v).max())
        return float((h * np.sum(np.abs(v) ** p)) ** (1.0 / p))

    worst = 0.0
    props = [model.propagator(t) for t in times]
    for _ in range(trials):
        u0 = rng.standard_normal(model.N)
        n0 = lp(u0)
        for P in props:
            worst = max(worst, lp(P @ u0) / n0)
    return {"p": p, "trials": trials, "times": times.tolist(), "worst_ratio": worst,
            "pass": bool(worst <= 1.0 + rtol)}


# ---------------------------------------------------------------- maximal regularity

def regularity_ratio(model: FracDirichletModel, f: np.ndarray, T: float, p: float) -> float:
    """(||d_t u||_p + ||A u||_p) / ||f||_p for implicit Euler with per-step forcing f (M, N).

    The ratio is undefined (NaN) for zero forcing.
    """
    M = f.shape[0]
    if not np.any(f):
        return float("nan")
    run = heat_solve(model, f, T, M, scheme="implicit-euler")
    dt, h = run.dt, model.h
    U = run.states[1:]
    dU = np.diff(run.states, axis=0) / dt
    AU = U @ model.A.T
    nrm = lambda X: float((dt * h * np.sum(np.abs(X) ** p)) ** (1.0 / p))  # noqa: E731
    return (nrm(dU) + nrm(AU)) / nrm(f)


def maximal_regularity_check(a: float, p: float = 3.0, Ns=(63, 127, 255), trials: int = 8, T: float = 1.0,
                             M: int = 200, seed: int = 0, growth_tol: float = 0.1, scheme: str = "auto") -> dict:
    """Largest regularity ratio over random space-time forcing, per refinement level."""
    rng = np.random.default_rng(seed)
    worst = []
    for N in Ns:
        model = assemble_restricted_fraclap(a, N, scheme)
        r = 0.0
        for _ in range(trials):
            f = rng.standard_normal((M, N))
            q = regularity_ratio(model, f, T, p)
            if np.isfinite(q):
                r = max(r, q)
        worst.append(r)
    growth = worst[-1] / worst[-2] - 1.0
    return {"a": a, "p": p, "Ns": list(Ns), "worst_ratio": worst, "growth": growth,
            "pass": bool(growth <= growth_tol)}


def eigenmode_ratio(lam: float, T: float, M: int, p: float) -> float:
    """Regularity ratio for the scalar problem v' + lam v = 1 under implicit Euler."""
    dt = T / M
    v = np.zeros(M + 1)
    for m in range(1, M + 1):
        v[m] = (v[m - 1] + dt) / (1.0 + dt * lam)
    nrm = lambda X: float((dt * np.sum(np.abs(X) ** p)) ** (1.0 / p))  # noqa: E731
    return (nrm(np.diff(v) / dt) + nrm(lam * v[1:])) / nrm(np.ones(M))


# ---------------------------------------------------------------- quadrature oracles

def fraclap_quadrature(u: Callable, x: float, a: float, breakpoints=()) -> float:
    """c_{1,a} int_0^inf (2 u(x) - u(x+z) - u(x-z)) z^(-1-2a) dz by adaptive quadrature.

    The segment next to z = 0 is integrated with the algebraic weight
    z^(1-2a) against the second difference quotient.
    """
    a = _check_a(a)
    sd = lambda z: 2.0 * u(x) - u(x + z) - u(x - z)  # noqa: E731
    pts = sorted(p for p in breakpoints if p > 0)
    first = 0.5 * pts[0] if pts else 0.5
    edges = [first] + pts
    opts = dict(limit=400, epsabs=1e-14, epsrel=1e-11)
    z_min = 1e-3 * first  # the endpoint value is the limit -u''(x); use a nearby quotient there

    def quotient(z):
        z = max(z, z_min) if z < z_min else z
        return sd(z) / (z * z)

    total = integrate.quad(quotient, 0.0, first, weight="alg", wvar=(1.0 - 2.0 * a, 0.0), **opts)[0]
    g = lambda z: sd(z) * z ** (-1.0 - 2.0 * a)  # noqa: E731
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += integrate.quad(g, lo, hi, **opts)[0]
    total += integrate.quad(g, edges[-1], np.inf, **opts)[0]
    return c1a(a) * total


def getoor_quadrature(x: float, a: float) -> float:
    """(-Delta)^a applied to (1 - y^2)_+^a at x in (-1, 1), by quadrature."""
    u = lambda y: max(1.0 - y * y, 0.0) ** a  # noqa: E731
    return fraclap_quadrature(u, x, a, breakpoints=(1.0 - abs(x), 1.0 + abs(x)))


def gaussian_fourier(a: float, x: float = 0.0) -> float:
    """(-Delta)^a e^{-y^2} at x via the Fourier multiplier |xi|^(2a)."""
    a = _check_a(a)
    f = lambda k: k ** (2 * a) * math.sqrt(math.pi) * math.exp(-k * k / 4.0) * math.cos(k * x)  # noqa: E731
    return integrate.quad(f, 0.0, np.inf, epsabs=1e-14, epsrel=1e-12)[0] / math.pi


def gaussian_quadrature(a: float, x: float = 0.0) -> float:
    return fraclap_quadrature(lambda y: math.exp(-y * y), x, a)


# ---------------------------------------------------------------- interior lift

LIFT_LX = 4.0  # spatial period of the embedding; the interval occupies grid coordinates [1, 3]


def lift_grid(a: float, N: int, T: float):
    """Space-time grid (d = 2a) whose spatial nodes coincide with the model nodes."""
    from .quantize import AnisoGrid

    if (N + 1) & N:
        raise ValueError("N + 1 must be a power of two for the space-time embedding")
    return AnisoGrid.balanced(2 * (N + 1), 2.0 * a, Lx=LIFT_LX, Lt=T)


def lift_run(a: float, N: int, T: float = 1.0, f=1.0, scheme: str = "auto"):
    """Model and exponential-scheme heat run with one step per time node of :func:`lift_grid`."""
    model = assemble_restricted_fraclap(a, N, scheme)
    g = lift_grid(a, N, T)
    return model, heat_solve(model, f, T, g.Nt, scheme="exponential")


@dataclass(frozen=True)
class LiftWindow:
    """Space-time window centred at physical x = ``center``, t = T/2."""

    center: float = 0.0
    radius: float = 0.5
    time_fraction: float = 0.35


def interior_lift_check(model: FracDirichletModel, run: HeatRun, window: LiftWindow = LiftWindow(),
                        boundary_window: LiftWindow = LiftWindow(1.0, 0.5), p: float = 2.0, eps: float = 0.05,
                        levels: int = 3, guard: float = 0.8, s_grid=None) -> dict:
    """Local space-time regularity of a heat run inside the domain and at the boundary.

    The nodal states (zero outside the interval) are embedded in a periodic
    space-time grid with spatial period 4 and time period T; time windows
    stay inside (0, T).  Windowed fields are formed on that grid and the
    coarser scan levels are spectral restrictions.  The check passes when
    the interior critical regularity exceeds r = min(2a, a + 1/p - eps) by
    at least d/2 and the boundary value by at least a.
    """
    from .quantize import GridFunction, restrict_spectrum
    from .spaces import CutoffFamily, psi_values, regularity_scan

    a, N = model.a, model.N
    T = float(run.times[-1])
    d = 2.0 * a
    if 1.0 - abs(window.center) - window.radius < 0.2:
        raise ValueError("interior window too close to the boundary (minimum margin 0.2)")
    g0 = lift_grid(a, N, T)
    if len(run.times) != g0.Nt + 1:
        raise ValueError(f"run must have {g0.Nt} steps to match the space-time grid")
    s_grid = np.round(np.arange(-0.5, 4.0 + 1e-9, 0.05), 10) if s_grid is None else np.asarray(s_grid)
    grids = [g0 if k == 0 else type(g0).balanced(g0.Nx // 2**k, d, Lx=LIFT_LX, Lt=T)
             for k in range(levels - 1, -1, -1)]
    vals = np.zeros(g0.shape)
    off = (N + 1) // 2
    vals[off + 1: off + 1 + N, :] = run.states[: g0.Nt].T
    u = GridFunction(g0, vals)

    def scan(win: LiftWindow):
        fam = CutoffFamily((win.center + LIFT_LX / 2.0,), T / 2.0, win.radius, win.time_fraction * T, depth=1)
        v = u.with_values(psi_values(fam.psi(1), g0) * u.values)
        return regularity_scan([restrict_spectrum(v, g, guard * g.reach) for g in grids], p, s_grid=s_grid)

    si = scan(window)
    sb = scan(boundary_window)
    r = min(2.0 * a, a + 1.0 / p - eps)
    gap = si.critical_s - sb.critical_s
    return {
        "a": a,
        "p": p,
        "N": N,
        "T": T,
        "scheme": model.scheme,
        "interior_critical": si.critical_s,
        "interior_flags": si.flags,
        "boundary_critical": sb.critical_s,
        "boundary_predicted": a + 1.0 / p,
        "global_bound": r,
        "gap": gap,
        "pass": bool(si.critical_s >= r + d / 2.0 and gap >= a),
        "scans": {"interior": si, "boundary": sb},
    }
