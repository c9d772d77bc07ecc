"""Anisotropic symbols and numerical certification of symbol classes.

A symbol is a function ``h(x, xi, tau)`` on ``R^n x R^n x R``.  Spatial
and frequency arguments carry the component index on the leading axis, so
``xi[0]`` is the first frequency component and ``tau`` broadcasts against
``xi[0]``.  The weight function of the calculus is the anisotropic bracket

    {xi, tau} = (<xi>^(2d) + tau^2)^(1/(2d)),   <xi> = (1 + |xi|^2)^(1/2),

and the class S^{m,nu} is tested through the bound

    |d_x^beta d_xi^alpha d_tau^j h| <= C (<xi>^(nu-|alpha|) + {xi,tau}^(nu-|alpha|))
                                        * {xi,tau}^(m-nu-d*j).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional

import numpy as np

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Anisotropy:
    """Anisotropy weight ``d`` (order of the operator in the x-direction)."""

    d: float

    def __post_init__(self):
        if not (np.isfinite(self.d) and self.d > 0):
            raise ValueError(f"anisotropy d must be positive, got {self.d!r}")


def _as_aniso(d) -> Anisotropy:
    return d if isinstance(d, Anisotropy) else Anisotropy(float(d))


@dataclass(frozen=True)
class Multiindex:
    """Derivative orders: ``alpha`` in xi, ``beta`` in x and ``j`` in tau."""

    alpha: tuple
    beta: tuple
    j: int = 0

    def __post_init__(self):
        if len(self.alpha) != len(self.beta):
            raise ValueError("alpha and beta must have the same length")
        if min(self.alpha + self.beta + (self.j,)) < 0:
            raise ValueError("multi-index entries must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def abs_alpha(self) -> int:
        return int(sum(self.alpha))

    @property
    def total(self) -> int:
        return int(sum(self.alpha) + sum(self.beta) + self.j)

    def key(self) -> str:
        a = ",".join(map(str, self.alpha))
        b = ",".join(map(str, self.beta))
        return f"a=({a}) b=({b}) j={self.j}"


@dataclass(frozen=True)
class SymbolSpec:
    """A closed-form symbol with its declared class ``S^{order, regularity}``.

    ``analytic_derivs`` optionally maps ``(beta, alpha, j)`` tuples to
    evaluators of the corresponding derivative; they take precedence over
    finite differences.
    """

    evaluator: Callable
    order: float
    regularity: float
    anisotropy: Anisotropy
    x_dependent: bool = False
    n: int = 1
    analytic_derivs: Optional[Mapping] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "anisotropy", _as_aniso(self.anisotropy))
        if self.n not in (1, 2, 3):
            raise ValueError("spatial dimension must be 1, 2 or 3")

    @property
    def d(self) -> float:
        return self.anisotropy.d

    def __call__(self, x, xi, tau):
        xi = np.asarray(xi, dtype=float)
        if x is None:
            x = np.zeros_like(xi)
        return self.evaluator(np.asarray(x, dtype=float), xi, np.asarray(tau, dtype=float))

    def declare(self, order=None, regularity=None, name=None) -> "SymbolSpec":
        """Copy with a different declared class (or name)."""
        return replace(
            self,
            order=self.order if order is None else order,
            regularity=self.regularity if regularity is None else regularity,
            name=self.name if name is None else name,
        )


# ---------------------------------------------------------------- weights

def japanese(xi) -> np.ndarray:
    """<xi> = (1 + |xi|^2)^(1/2) with xi laid out as (n, ...)."""
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(1.0 + np.sum(xi * xi, axis=0))


def bracket(xi, tau, d) -> np.ndarray:
    """Anisotropic bracket ``(<xi>^(2d) + tau^2)^(1/(2d))``.

    ``xi`` may be a scalar or 1-vector for n = 1, or an array shaped
    ``(n, ...)``.
    """
    d = _as_aniso(d).d
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        xi = xi[None]
    tau = np.asarray(tau, dtype=float)
    j2 = 1.0 + np.sum(xi * xi, axis=0)
    # <xi>^(2d) = (1+|xi|^2)^d
    return (j2**d + tau * tau) ** (1.0 / (2.0 * d))


def _smoothstep(t):
    """C-infinity transition equal to 0 for t <= 0 and 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        g0 = np.where(tc > 0, np.exp(-1.0 / np.where(tc > 0, tc, 1.0)), 0.0)
        g1 = np.where(tc < 1, np.exp(-1.0 / np.where(tc < 1, 1.0 - tc, 1.0)), 0.0)
    return g0 / (g0 + g1)


def smooth_abs_radial(r) -> np.ndarray:
    """[r] as a function of r = |xi| >= 0."""
    r = np.asarray(r, dtype=float)
    psi = _smoothstep(2.0 * r - 1.0)
    return psi * r + (1.0 - psi) * 0.5 * (1.0 + r * r)


def smooth_abs(xi) -> np.ndarray:
    """Smooth positive modification [xi] of |xi|.

    Equal to |xi| for |xi| >= 1, to (1+|xi|^2)/2 for |xi| <= 1/2, and
    bounded below by 1/2.  ``xi`` is laid out as (n, ...); a scalar is
    treated as a one-dimensional frequency.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        xi = xi[None]
    return smooth_abs_radial(np.sqrt(np.sum(xi * xi, axis=0)))


# ---------------------------------------------------------------- constructors

def bracket_power(s, d, n=1) -> SymbolSpec:
    """{xi,tau}^s, declared in S^{s, 2d}."""
    aniso = _as_aniso(d)

    def ev(x, xi, tau, _s=float(s), _d=aniso.d):
        return bracket(xi, tau, _d) ** _s

    return SymbolSpec(ev, float(s), 2.0 * aniso.d, aniso, False, n, name=f"bracket^{s:g}")


def fractional_symbol(a, n=1, scale=None) -> SymbolSpec:
    """[xi]^(2a) (tau-independent, order and anisotropy 2a).

    ``scale`` optionally multiplies the symbol by a function ``c(x)`` of
    the spatial variable (x laid out as (n, ...)), making it x-dependent.
    """
    a = float(a)
    d = 2.0 * a
    if scale is None:
        def ev(x, xi, tau):
            return smooth_abs(xi) ** d + 0.0 * tau
        xdep = False
        name = f"[xi]^{d:g}"
    else:
        def ev(x, xi, tau):
            return scale(x) * smooth_abs(xi) ** d + 0.0 * tau
        xdep = True
        name = f"c(x)[xi]^{d:g}"
    return SymbolSpec(ev, d, d, Anisotropy(d), xdep, n, name=name)


def modulated_fractional_symbol(a, eps=0.5, n=1) -> SymbolSpec:
    """(1 + eps sin x_1)[xi]^(2a), the x-dependent corpus member."""
    if not abs(eps) < 1:
        raise ValueError("|eps| must be below 1 to keep the symbol elliptic")
    spec = fractional_symbol(a, n=n, scale=lambda x: 1.0 + eps * np.sin(x[0]))
    return spec.declare(name=f"(1+{eps:g}sin x1)[xi]^{2 * float(a):g}")


def japanese_power(m, d=None, n=1) -> SymbolSpec:
    """<xi>^m, tau-independent; anisotropy defaults to m."""
    m = float(m)
    aniso = _as_aniso(m if d is None else d)

    def ev(x, xi, tau):
        return japanese(xi) ** m + 0.0 * tau

    return SymbolSpec(ev, m, m, aniso, False, n, name=f"<xi>^{m:g}")


def drift_symbol(b, n=None) -> SymbolSpec:
    """[xi] + i b.xi: a complex first-order symbol with real part [xi]."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n = len(b) if n is None else n
    if len(b) != n:
        raise ValueError("drift vector must have n components")

    def ev(x, xi, tau):
        drift = np.tensordot(b, xi, axes=(0, 0))
        return smooth_abs(xi) + 1j * drift + 0.0 * tau

    return SymbolSpec(ev, 1.0, 1.0, Anisotropy(1.0), False, n, name="[xi]+i b.xi")


def heat_symbol(p: SymbolSpec) -> SymbolSpec:
    """p(x, xi) + i tau, declared in S^{d, d}."""
    if not math.isclose(p.order, p.d, rel_tol=1e-12, abs_tol=1e-12):
        raise ValueError(
            f"heat_symbol needs declared order equal to the anisotropy (order={p.order}, d={p.d})"
        )

    def ev(x, xi, tau, _p=p.evaluator):
        return _p(x, xi, tau) + 1j * tau

    return SymbolSpec(ev, p.d, p.d, p.anisotropy, p.x_dependent, p.n, name=f"{p.name}+i tau")


def parametrix_principal(p0: SymbolSpec, min_margin: float = 1e-8, samples=None) -> SymbolSpec:
    """(p0 + i tau)^(-1), declared in S^{-d, d}.

    Raises ``ValueError`` when the sampled strong-ellipticity margin of
    ``p0`` is below ``min_margin``.
    """
    margin = verify_strong_ellipticity(p0, samples)
    if not margin > min_margin:
        raise ValueError(f"symbol is not strongly elliptic (margin {margin:.3g})")

    def ev(x, xi, tau, _p=p0.evaluator):
        return 1.0 / (_p(x, xi, tau) + 1j * tau)

    return SymbolSpec(ev, -p0.d, p0.d, p0.anisotropy, p0.x_dependent, p0.n, name=f"({p0.name}+i tau)^-1")


def reciprocal(h: SymbolSpec, order=None, regularity=None) -> SymbolSpec:
    """Pointwise reciprocal with a caller-supplied declared class."""

    def ev(x, xi, tau, _h=h.evaluator):
        return 1.0 / _h(x, xi, tau)

    return SymbolSpec(
        ev,
        -h.order if order is None else order,
        h.regularity if regularity is None else regularity,
        h.anisotropy,
        h.x_dependent,
        h.n,
        name=f"1/({h.name})",
    )


def product_regularity(m, nu, m2, nu2):
    """Class of a product: (m + m', min(nu, nu', nu + nu'))."""
    return (m + m2, min(nu, nu2, nu + nu2))


def elementary_inequality_holds(ratio, nu, nu2) -> np.ndarray:
    """((r^nu + 1)(r^nu' + 1) <= 3 r^nu'' + 1 for 0 < r <= 1, nu'' from product_regularity."""
    r = np.asarray(ratio, dtype=float)
    nu3 = product_regularity(0.0, nu, 0.0, nu2)[1]
    lhs = (r**nu + 1.0) * (r**nu2 + 1.0)
    rhs = 3.0 * r**nu3 + 1.0
    return lhs <= rhs * (1.0 + 1e-12)


# ---------------------------------------------------------------- differentiation

def _step_fraction(total_order: int) -> float:
    # 1e-4 for low orders; balance roundoff eps/delta^k against the
    # Richardson truncation delta^4 for higher orders.
    if total_order <= 2:
        return 1e-4
    return float(EPS ** (1.0 / (total_order + 4)))


def _central_weights(q: int):
    """Offsets (in units of the step) and weights of the q-th central difference."""
    offs = np.arange(q + 1) - q / 2.0
    w = np.array([(-1) ** (q - i) * math.comb(q, i) for i in range(q + 1)], dtype=float)
    return offs, w


def partial(h: SymbolSpec, x, xi, tau, mi: Multiindex, step_fraction=None):
    """Approximate ``d_x^beta d_xi^alpha d_tau^j h`` at the given points.

    Returns ``(value, noise)`` where ``noise`` bounds the roundoff error of
    the difference quotient.  Analytic derivatives are used when the symbol
    provides them (noise is then zero).
    """
    xi = np.asarray(xi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    x = np.zeros_like(xi) if x is None else np.broadcast_to(np.asarray(x, dtype=float), xi.shape)
    key = (tuple(mi.beta), tuple(mi.alpha), mi.j)
    if h.analytic_derivs and key in h.analytic_derivs:
        val = h.analytic_derivs[key](x, xi, tau)
        return np.asarray(val), np.zeros(np.shape(val))
    if mi.total == 0:
        val = h(x, xi, tau)
        return np.asarray(val), np.zeros(np.shape(val))
    if not h.x_dependent and sum(mi.beta) > 0:
        z = np.zeros(np.broadcast(xi[0], tau).shape)
        return z, z

    frac = _step_fraction(mi.total) if step_fraction is None else step_fraction
    kappa_d = bracket(xi, tau, h.d) ** h.d
    # variable list: (kind, component, order, scale)
    vars_ = []
    for k, q in enumerate(mi.beta):
        if q:
            vars_.append(("x", k, q, np.ones_like(kappa_d)))
    for k, q in enumerate(mi.alpha):
        if q:
            vars_.append(("xi", k, q, 1.0 + np.abs(xi[k])))
    if mi.j:
        vars_.append(("tau", 0, mi.j, kappa_d))

    def estimate(scale_factor):
        stencils = [_central_weights(q) for (_, _, q, _) in vars_]
        total = 0.0
        absum = 0.0
        steps = [frac * scale_factor * sc for (_, _, _, sc) in vars_]
        for combo in itertools.product(*[range(len(s[0])) for s in stencils]):
            xs = x.copy()
            xis = xi.copy()
            ts = tau.copy()
            wt = 1.0
            for (kind, comp, _, _), (offs, w), idx, st in zip(vars_, stencils, combo, steps):
                o = offs[idx] * st
                wt = wt * w[idx]
                if kind == "x":
                    xs[comp] = xs[comp] + o
                elif kind == "xi":
                    xis[comp] = xis[comp] + o
                else:
                    ts = ts + o
            val = h(xs, xis, ts)
            total = total + wt * val
            absum = absum + np.abs(wt * val)
        denom = 1.0
        for (_, _, q, _), st in zip(vars_, steps):
            denom = denom * st**q
        return total / denom, absum / denom

    d1, n1 = estimate(1.0)
    d2, n2 = estimate(0.5)
    value = (4.0 * d2 - d1) / 3.0
    noise = 4.0 * EPS * (4.0 * n2 + n1) / 3.0
    return value, noise


# ---------------------------------------------------------------- certification

@dataclass
class SampleSpec:
    """Log-spaced radial sample set for :func:`check_estimates`."""

    radius_exponents: tuple = tuple(range(13))
    directions: int = 32
    x_per_point: int = 8
    seed: int = 0
    axis_points: bool = True
    mid_exponents: tuple = (4, 5, 6, 7, 8)
    top_exponents: tuple = (11, 12)
    slack: float = 1.5
    floor: float = 1e-10

    def describe(self) -> str:
        r = self.radius_exponents
        return (
            f"radii 2^{r[0]}..2^{r[-1]}, {self.directions} random directions"
            f"{' + axis points' if self.axis_points else ''}, "
            f"{self.x_per_point} x values when x-dependent, seed {self.seed}; "
            f"stable iff max over 2^{list(self.top_exponents)} <= {self.slack} x max over "
            f"2^{list(self.mid_exponents)}"
        )


def sample_points(n, d, spec: SampleSpec, x_dependent=False):
    """Return ``(radius_index, x, xi, tau)`` arrays for the sample set.

    A point of radius r has |(xi, sign(tau)|tau|^(1/d))| = r.  Axis points
    (pure xi, pure tau, and tau-dominated points with fixed small xi) are
    appended since random directions rarely probe |xi| << {xi,tau}.
    """
    rng = np.random.default_rng(spec.seed)
    dirs = rng.normal(size=(spec.directions, n + 1))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    if spec.axis_points:
        extra = []
        e = np.zeros(n + 1)
        for k in range(n + 1):
            for sgn in (1.0, -1.0):
                v = e.copy()
                v[k] = sgn
                extra.append(v)
        dirs = np.vstack([dirs, np.array(extra)])
    rad_idx, xis, taus = [], [], []
    for ri, p in enumerate(spec.radius_exponents):
        r = 2.0**p
        w = r * dirs
        xis.append(w[:, :n].T)
        taus.append(np.sign(w[:, n]) * np.abs(w[:, n]) ** d)
        rad_idx.append(np.full(len(dirs), ri))
        if spec.axis_points:
            for xi0 in (0.25, 0.75):
                fixed = np.zeros((n, 2))
                fixed[0] = xi0
                xis.append(fixed)
                taus.append(np.array([r**d, -(r**d)]))
                rad_idx.append(np.full(2, ri))
    xi = np.concatenate(xis, axis=1)
    tau = np.concatenate(taus)
    ridx = np.concatenate(rad_idx)
    if x_dependent:
        m = spec.x_per_point
        xs = rng.uniform(0.0, 2.0 * np.pi, size=(n, m))
        P = xi.shape[1]
        xi = np.repeat(xi, m, axis=1)
        tau = np.repeat(tau, m)
        ridx = np.repeat(ridx, m)
        x = np.tile(xs, (1, P))
    else:
        x = np.zeros_like(xi)
    return ridx, x, xi, tau


@dataclass
class EstimateReport:
    """Outcome of :func:`check_estimates`."""

    symbol: str
    declared: tuple
    constants: dict = field(default_factory=dict)
    radial_constants: dict = field(default_factory=dict)
    growth: dict = field(default_factory=dict)
    worst_point: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    passed: bool = True
    sample_spec: str = ""

    def to_dict(self) -> dict:
        return {
            "symbol": self.symbol,
            "declared": list(self.declared),
            "pass": self.passed,
            "constants": self.constants,
            "growth": self.growth,
            "worst_point": self.worst_point,
            "failures": self.failures,
            "sample_spec": self.sample_spec,
        }


def _multiindices(n, max_alpha, max_beta, max_j):
    out = []
    for alpha in itertools.product(range(max_alpha + 1), repeat=n):
        if sum(alpha) > max_alpha:
            continue
        for beta in itertools.product(range(max_beta + 1), repeat=n):
            if sum(beta) > max_beta:
                continue
            for j in range(max_j + 1):
                out.append(Multiindex(tuple(alpha), tuple(beta), j))
    return out


def estimate_weight(xi, tau, d, m, nu, mi: Multiindex):
    """The right-hand side weight of the class estimate (without C)."""
    sigma = japanese(xi)
    kappa = bracket(xi, tau, d)
    e = nu - mi.abs_alpha
    return (sigma**e + kappa**e) * kappa ** (m - nu - d * mi.j)


def check_estimates(
    h: SymbolSpec,
    max_alpha: int = 3,
    max_j: int = 2,
    samples: Optional[SampleSpec] = None,
    max_beta: Optional[int] = None,
    order=None,
    regularity=None,
) -> EstimateReport:
    """Empirically test membership of ``h`` in its declared class.

    For every multi-index within the bounds the ratio of the derivative to
    the class weight is evaluated on a log-spaced radial sample set.  The
    estimate passes when the largest ratio over the top radii does not
    exceed ``slack`` times the largest ratio over the middle radii.
    ``order``/``regularity`` override the declared class.
    """
    if max_alpha > 3 or max_j > 2:
        raise ValueError("derivative depth limited to |alpha| <= 3 and j <= 2")
    samples = samples or SampleSpec()
    m = h.order if order is None else order
    nu = h.regularity if regularity is None else regularity
    if max_beta is None:
        max_beta = 2 if h.x_dependent else 0
    ridx, x, xi, tau = sample_points(h.n, h.d, samples, h.x_dependent)
    report = EstimateReport(h.name, (m, nu), sample_spec=samples.describe())
    mid = [i for i, p in enumerate(samples.radius_exponents) if p in samples.mid_exponents]
    top = [i for i, p in enumerate(samples.radius_exponents) if p in samples.top_exponents]
    for mi in _multiindices(h.n, max_alpha, max_beta, max_j):
        val, noise = partial(h, x, xi, tau, mi)
        num = np.maximum(np.abs(val) - 8.0 * noise, 0.0)
        ratio = num / estimate_weight(xi, tau, h.d, m, nu, mi)
        key = mi.key()
        if not np.all(np.isfinite(ratio)):
            report.passed = False
            report.failures.append({"index": key, "reason": "non-finite ratio"})
            report.constants[key] = float("inf")
            continue
        per_r = np.array([ratio[ridx == i].max() for i in range(len(samples.radius_exponents))])
        c_mid = per_r[mid].max() if mid else per_r.max()
        c_top = per_r[top].max() if top else per_r.max()
        k = int(np.argmax(ratio))
        report.constants[key] = float(ratio.max())
        report.radial_constants[key] = per_r.tolist()
        report.worst_point[key] = {
            "x": x[:, k].tolist(),
            "xi": xi[:, k].tolist(),
            "tau": float(tau[k]),
        }
        growth = c_top / c_mid if c_mid > samples.floor else (0.0 if c_top <= samples.floor else float("inf"))
        report.growth[key] = float(growth)
        if growth > samples.slack:
            report.passed = False
            report.failures.append({"index": key, "growth": float(growth), "point": report.worst_point[key]})
    return report


def verify_strong_ellipticity(p0: SymbolSpec, samples: Optional[SampleSpec] = None) -> float:
    """Sampled margin ``min(inf Re p0/|xi|^d over |xi|>=1, inf Re p0 over |xi|<=1)``.

    A positive value certifies strong ellipticity on the sample set.
    """
    samples = samples or SampleSpec()
    rng = np.random.default_rng(samples.seed)
    n = p0.n
    dirs = rng.normal(size=(n, samples.directions))
    dirs /= np.linalg.norm(dirs, axis=0, keepdims=True)
    if n == 1:
        dirs = np.array([[1.0, -1.0]])
    radii = 2.0 ** np.arange(-6, max(samples.radius_exponents) + 1)
    radii = np.concatenate([[0.0], radii, np.linspace(0.5, 1.5, 11)])
    xi = (dirs[:, :, None] * radii[None, None, :]).reshape(n, -1)
    if p0.x_dependent:
        xs = rng.uniform(0.0, 2.0 * np.pi, size=(n, samples.x_per_point))
        P = xi.shape[1]
        xi = np.repeat(xi, samples.x_per_point, axis=1)
        x = np.tile(xs, (1, P))
    else:
        x = np.zeros_like(xi)
    tau = np.zeros(xi.shape[1])
    re = np.real(p0(x, xi, tau))
    r = np.sqrt(np.sum(xi * xi, axis=0))
    outer = r >= 1.0
    m_out = np.min(re[outer] / r[outer] ** p0.d) if outer.any() else np.inf
    m_in = np.min(re[~outer]) if (~outer).any() else np.inf
    return float(min(m_out, m_in))
