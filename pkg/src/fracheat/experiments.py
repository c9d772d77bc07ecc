"""Named experiment pipelines with typed, validated parameters.

Every experiment maps a resolved parameter dict to an :class:`Outcome`
holding a JSON summary, named boolean assertions, CSV tables and
plot-ready text series.  :mod:`fracheat.cli` takes care of configuration
files, output directories and the run manifest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
from scipy import special

from . import dirichlet as dl
from .parabolic import (build_parametrix, default_residual_grid, lifting_experiment,
                        local_lifting_experiment, residual_order)
from .quantize import LineGrid, poisson_k0, relative_l2, support_leakage, xi_pm
from .spaces import BetaProfile, regularity_scan, scan_grids
from .symbols import (bracket, bracket_power, check_estimates, drift_symbol, elementary_inequality_holds,
                      fractional_symbol, heat_symbol, japanese, japanese_power, modulated_fractional_symbol,
                      parametrix_principal)

REQUIRED = object()


@dataclass
class Outcome:
    summary: dict
    assertions: dict
    tables: dict = field(default_factory=dict)  # file name -> (header, rows)
    plots: dict = field(default_factory=dict)   # file name -> rows of (x, y[, series])
    extra_json: dict = field(default_factory=dict)  # file name -> object

    @property
    def passed(self) -> bool:
        return all(self.assertions.values())


@dataclass(frozen=True)
class Param:
    default: Any
    kind: str  # "float", "int", "str", "bool", "floats", "ints"
    check: Optional[Callable[[Any], Optional[str]]] = None
    help: str = ""


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    anchor: str
    params: dict
    runner: Callable[[dict], Outcome]
    randomized: bool = False
    adaptive_tolerance: Optional[float] = None


# ---------------------------------------------------------------- validators

def _a_range(v):
    return None if 0.0 < v < 1.0 else "a must lie in (0,1)"


def _positive(name):
    return lambda v: None if v > 0 else f"{name} must be positive"


def _between(name, lo, hi):
    return lambda v: None if lo <= v <= hi else f"{name} must lie in [{lo}, {hi}]"


def _choice(name, options):
    return lambda v: None if v in options else f"{name} must be one of {sorted(options)}"


def _all(name, pred, msg):
    return lambda v: None if len(v) > 0 and all(pred(x) for x in v) else f"{name} {msg}"


def _pow2(name, lo, hi):
    def chk(v):
        if v & (v - 1) or not lo <= v <= hi:
            return f"{name} must be a power of two in [{lo}, {hi}]"
        return None
    return chk


def _seed():
    return Param(REQUIRED, "int", lambda v: None if v >= 0 else "seed must be nonnegative", "random seed")


def _nodes(name="N", hi=2048):
    return Param(512, "int", _between(name, dl.MIN_NODES, hi), "interior node count")


def _scheme():
    return Param("auto", "str", _choice("scheme", dl.SCHEMES), "spatial discretization")


# ---------------------------------------------------------------- symbol corpus

CORPUS = ("bracket", "japanese", "fractional", "drift", "heat", "heat-inverse", "heat-modulated",
          "heat-modulated-inverse", "control")


def corpus_symbol(name: str, s: float, d: float, a: float, m: float, eps: float):
    """Corpus member and whether its declared class should be certified."""
    if name == "bracket":
        return bracket_power(s, d), True
    if name == "japanese":
        return japanese_power(m, d), True
    if name == "fractional":
        return fractional_symbol(a), True
    if name == "drift":
        return drift_symbol([0.7]), True
    if name == "heat":
        return heat_symbol(fractional_symbol(a)), True
    if name == "heat-inverse":
        return parametrix_principal(fractional_symbol(a)), True
    if name == "heat-modulated":
        return heat_symbol(modulated_fractional_symbol(a, eps)), True
    if name == "heat-modulated-inverse":
        return parametrix_principal(modulated_fractional_symbol(a, eps)), True
    if name == "control":
        return bracket_power(s, d).declare(regularity=3.0 * d, name=f"bracket^{s:g} over-declared"), False
    raise ValueError(f"unknown corpus symbol {name!r}")


def run_symbol_check(P):
    h, expected = corpus_symbol(P["symbol"], P["s"], P["d"], P["a"], P["m"], P["eps"])
    rep = check_estimates(h, max_alpha=P["max_alpha"], max_j=P["max_j"])
    summary = rep.to_dict()
    summary["expected_pass"] = expected
    rows = [(k, rep.constants[k], rep.growth.get(k, float("nan"))) for k in sorted(rep.constants)]
    plot = [(i, c, k) for k in sorted(rep.radial_constants) for i, c in enumerate(rep.radial_constants[k])]
    return Outcome(summary, {"class_membership_as_expected": rep.passed == expected},
                   {"constants.csv": (["index", "constant", "growth"], rows)},
                   {"radial_constants.dat": plot})


def run_bracket_props(P):
    d = P["d"]
    xi = np.concatenate([-np.logspace(-3, 6, P["points"]), [0.0], np.logspace(-3, 6, P["points"])])
    tau = np.concatenate([-np.logspace(-3, 6 * d, P["points"]), [0.0], np.logspace(-3, 6 * d, P["points"])])
    XI, TAU = np.meshgrid(xi, tau, indexing="ij")
    B = bracket(XI[None], TAU, d)
    J = japanese(XI[None])
    equiv = B / (J + np.abs(TAU) ** (1.0 / d))
    upper = max(1.0, 2.0 ** (1.0 / (2.0 * d)) / 2.0)
    lam = 3.0
    scaled = bracket(lam * XI[None], lam**d * TAU, d) / (lam * B)
    r = np.linspace(1e-6, 1.0, 2001)
    ineq = all(bool(elementary_inequality_holds(r, nu, nu2).all())
               for nu in (0.3, 1.0, 2.5) for nu2 in (0.5, 1.0, -0.4))
    checks = {
        "at_least_one": bool(B.min() >= 1.0 - 1e-14),
        "dominates_japanese": bool(np.all(B >= J * (1.0 - 1e-14))),
        "equivalence_lower": bool(equiv.min() >= 0.5 - 1e-14),
        "equivalence_upper": bool(equiv.max() <= upper * (1.0 + 1e-12)),
        "sub_homogeneous": bool(scaled.max() <= 1.0 + 1e-12),
        "product_inequality": ineq,
    }
    summary = {"d": d, "equivalence_range": [float(equiv.min()), float(equiv.max())],
               "equivalence_bounds": [0.5, upper], "scaling_max": float(scaled.max()),
               "sample_points": int(B.size)}
    diag = [(float(v), float(bracket(np.array([v]), v**d, d))) for v in np.logspace(-2, 4, 61)]
    return Outcome(summary, checks, {}, {"bracket_diagonal.dat": diag})


def _scan_rows(scan, label):
    return [(label, s, ell, v) for s, ell, v in scan.rows()]


def _growth_plot(scan, label):
    return [(float(s), float(g), label) for s, g in zip(scan.s_grid, scan.growth)]


def run_lifting(P):
    d = P["d"]
    r = lifting_experiment(fractional_symbol(d / 2.0), P["s"], P["p"], levels=P["levels"], Nx0=P["Nx0"],
                           seed=P["seed"], tol=P["tol"])
    rows, plot, pairs = [], [], []
    for q in r["pairs"]:
        tag = f"{q['levels'][0]}-{q['levels'][1]}"
        rows += _scan_rows(q["scan_f"], "f" + tag) + _scan_rows(q["scan_u"], "u" + tag)
        plot += _growth_plot(q["scan_f"], "f" + tag) + _growth_plot(q["scan_u"], "u" + tag)
        pairs.append({k: v for k, v in q.items() if not k.startswith("scan")})
    summary = {k: v for k, v in r.items() if k != "pairs"}
    summary["pairs"] = pairs
    return Outcome(summary, {"shift_equals_d": r["pass"]},
                   {"scans.csv": (["field", "s", "level", "norm"], rows)}, {"growth.dat": plot})


def _local_symbol(choice, d):
    if choice == "auto":
        choice = "japanese" if d >= 2.0 else "fractional"
    return japanese_power(d, d) if choice == "japanese" else fractional_symbol(d / 2.0)


def run_local_lifting(P):
    d = P["d"]
    r = local_lifting_experiment(_local_symbol(P["symbol"], d), P["s"], levels=P["levels"], Nx0=P["Nx0"],
                                 seed=P["seed"], tol=P["tol"])
    scan = r.pop("local_scan")
    assertions = {"local_regularity_reached": r["pass"]}
    if math.ceil(d) >= 2:
        assertions["needs_two_stages"] = bool(r["stages_needed"] >= 2 and r["single_stage_shortfall"] >= 0.3)
    r["local_scan"] = scan.summary()
    rows = [(st["stage"], st["certified"], st["commutator_order"], st["regularity_psi_Hu"]) for st in r["stages"]]
    return Outcome(r, assertions,
                   {"stages.csv": (["stage", "certified", "commutator_order", "source_regularity"], rows)},
                   {"local_growth.dat": _growth_plot(scan, "local")})


def run_residual_decay(P):
    p = modulated_fractional_symbol(P["a"], P["eps"])
    chain = build_parametrix(p, P["J"])
    grid = default_residual_grid(p.d, P["Nx"])
    rep = residual_order(chain, P["bands"], grid, probes=P["probes"], seed=P["seed"], slack=P["slack"])
    rows = list(zip(rep.bands, rep.amplification))
    return Outcome({"symbol": p.name, "J": P["J"], **rep.to_dict()}, {"residual_slope": rep.passed},
                   {"residual.csv": (["band", "amplification"], rows)},
                   {"residual.dat": [(float(b), float(v)) for b, v in rows]})


def run_norm_scan(P):
    d = P["d"]
    prof = BetaProfile(P["beta"], P["seed"])
    grids = scan_grids(d, levels=P["levels"], Nx0=P["Nx0"])
    fields = [prof.sample(g) for g in grids]
    scan = regularity_scan(fields, P["p"], s_grid=np.round(np.arange(-0.5, 4.0 + 1e-9, 0.05), 10))
    predicted = prof.critical_s(1, d)
    err = scan.critical_s - predicted
    summary = {"beta": P["beta"], "d": d, "predicted": predicted, "error": err, **scan.summary()}
    return Outcome(summary, {"critical_s_matches": bool(abs(err) <= P["tol"] and not scan.boundary)},
                   {"norms.csv": (["s", "level", "norm"], list(scan.rows()))},
                   {"growth.dat": _growth_plot(scan, "beta")})


def _getoor_errors(model, u, exclude):
    ex = dl.getoor_solution(model.x, model.a)
    err = np.abs(u - ex) / ex.max()
    inner = err[exclude: model.N - exclude] if exclude else err
    return ex, float(err.max()), float(inner.max())


def run_dirichlet_steady(P):
    a = P["a"]
    model = dl.assemble_restricted_fraclap(a, P["N"], P["scheme"])
    u = dl.steady_solve(model, 1.0)
    ex, err_all, err_inner = _getoor_errors(model, u, P["exclude"])
    fits = {side: dl.boundary_exponent_fit(u, model.domain, side, P["dmin_factor"], P["dmax"]) for side in ("left", "right")}
    summary = {"model": model.describe(), "getoor_error_all": err_all, "getoor_error_interior": err_inner,
               "excluded_per_end": P["exclude"], "exponents": {k: f.exponent for k, f in fits.items()}}
    assertions = {
        "getoor_profile": err_inner <= P["tol_profile"],
        "exponent_fit": all(abs(f.exponent - a) <= P["tol_exponent"] for f in fits.values()),
    }
    rows = list(zip(model.x, u, ex))
    return Outcome(summary, assertions, {"solution.csv": (["x", "u", "getoor"], rows)},
                   {"solution.dat": [(x, v, "numeric") for x, v in zip(model.x, u)]
                    + [(x, v, "getoor") for x, v in zip(model.x, ex)]},
                   {"exponent_fit.json": {k: f.to_dict() for k, f in fits.items()}})


def run_dirichlet_heat(P):
    a = P["a"]
    model = dl.assemble_restricted_fraclap(a, P["N"], P["scheme"])
    lam = model.lambda_min
    T = P["T_factor"] / lam
    run = dl.heat_solve(model, 1.0, T, P["M"], scheme=P["time_scheme"])
    u_inf = dl.steady_solve(model, 1.0)
    gap = np.sqrt(model.h * np.sum((run.states - u_inf) ** 2, axis=1))
    late = run.times >= 0.5 * T
    rate = -float(np.polyfit(run.times[late], np.log(gap[late]), 1)[0])
    rel = abs(rate - lam) / lam
    fit = dl.boundary_exponent_fit(run.states[-1], model.domain)
    summary = {"model": model.describe(), "T": T, "M": P["M"], "time_scheme": P["time_scheme"], "rate": rate,
               "lambda_min": lam, "rate_rel_error": rel, "final_exponent": fit.exponent,
               "final_gap": float(gap[-1])}
    assertions = {"decay_rate": rel <= P["tol_rate"], "final_exponent": abs(fit.exponent - a) <= P["tol_exponent"]}
    return Outcome(summary, assertions,
                   {"gap.csv": (["t", "l2_distance_to_steady"], list(zip(run.times, gap)))},
                   {"gap.dat": [(t, g) for t, g in zip(run.times, gap)]})


def _fit_power(x, y):
    B = np.stack([np.log(x), np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(B, np.log(y), rcond=None)
    return float(coef[0])


def run_exponent_fit(P):
    a = P["a"]
    grid = LineGrid(P["R"], 2 ** P["log2N"])
    w = xi_pm(-a, "+", poisson_k0(1.0, grid))
    x = grid.x
    ref = np.where(x > 0, np.abs(x) ** a * np.exp(-np.maximum(x, 0.0)) / special.gamma(a + 1.0), 0.0)
    err = relative_l2(w.values.real, ref)
    leak = support_leakage(w)
    sel = (x >= 1e-3) & (x <= 1e-1)
    alpha = _fit_power(x[sel], w.values.real[sel])
    summary = {"a": a, "grid": grid.describe(), "relative_l2": err, "leakage": leak, "fitted_exponent": alpha}
    assertions = {"identity": err <= P["tol"], "support": leak <= P["tol_leak"],
                  "exponent": abs(alpha - a) <= P["tol_exponent"]}
    keep = np.nonzero((x >= -1.0) & (x <= 10.0))[0]
    keep = keep[:: max(1, len(keep) // 2000)]
    rows = [(x[i], w.values.real[i], ref[i]) for i in keep]
    return Outcome(summary, assertions, {"profile.csv": (["x", "numeric", "exact"], rows)},
                   {"profile.dat": [(r[0], r[1], "numeric") for r in rows] + [(r[0], r[2], "exact") for r in rows]})


def run_markov(P):
    model = dl.assemble_restricted_fraclap(P["a"], P["N"], P["scheme"])
    res = dl.markov_trials(model, P["trials"], P["seed"])
    off = -(model.A - np.diag(np.diag(model.A)))
    weights_positive = bool(off[~np.eye(model.N, dtype=bool)].min() > 0.0)
    summary = {"model": model.describe(), **res, "min_weight": float(off[~np.eye(model.N, dtype=bool)].min())}
    return Outcome(summary, {"markov": res["pass"], "weights_positive": weights_positive})


def run_contraction(P):
    model = dl.assemble_restricted_fraclap(P["a"], P["N"], P["scheme"])
    res = [dl.semigroup_contraction_check(model, p, P["trials"], seed=P["seed"] + i) for i, p in enumerate(P["p_values"])]
    summary = {"model": model.describe(), "checks": res}
    rows = [(r["p"], r["worst_ratio"]) for r in res]
    return Outcome(summary, {f"contraction_p{r['p']:g}": r["pass"] for r in res},
                   {"contraction.csv": (["p", "worst_ratio"], rows)})


def run_max_regularity(P):
    res = dl.maximal_regularity_check(P["a"], P["p"], tuple(P["Ns"]), P["trials"], P["T"], P["M"],
                                      P["seed"], P["growth_tol"], P["scheme"])
    rows = list(zip(res["Ns"], res["worst_ratio"]))
    return Outcome(res, {"ratio_stable": res["pass"]}, {"ratios.csv": (["N", "worst_ratio"], rows)},
                   {"ratios.dat": [(float(n), float(r)) for n, r in rows]})


def run_interior_lift(P):
    model, run = dl.lift_run(P["a"], P["N"], P["T"], 1.0, P["scheme"])
    r = dl.interior_lift_check(model, run, p=P["p"], eps=P["eps"], levels=P["levels"])
    scans = r.pop("scans")
    r["scans"] = {k: v.summary() for k, v in scans.items()}
    plot = _growth_plot(scans["interior"], "interior") + _growth_plot(scans["boundary"], "boundary")
    return Outcome(r, {"interior_gain": r["pass"]}, {}, {"growth.dat": plot})


# ---------------------------------------------------------------- registry

_EXPERIMENTS = [
    Experiment("symbol-check", "Finite-difference certification of a corpus symbol's class estimates",
               "symbol classes: brackets, classical symbols, p + i tau and its inverse",
               {"symbol": Param("bracket", "str", _choice("symbol", CORPUS)),
                "s": Param(1.5, "float"), "d": Param(1.0, "float", _between("d", 0.05, 4.0)),
                "a": Param(0.5, "float", _a_range), "m": Param(1.0, "float"),
                "eps": Param(0.5, "float", lambda v: None if abs(v) < 1 else "eps must satisfy |eps| < 1"),
                "max_alpha": Param(3, "int", _between("max_alpha", 0, 3)),
                "max_j": Param(2, "int", _between("max_j", 0, 2))},
               run_symbol_check),
    Experiment("bracket-props", "Elementary inequalities of the anisotropic bracket",
               "bracket equivalence, lower bound, scaling and product inequality",
               {"d": Param(1.0, "float", _between("d", 0.05, 4.0)),
                "points": Param(60, "int", _between("points", 4, 400))},
               run_bracket_props),
    Experiment("lifting", "Global regularity gain of d for P u + d_t u = f with a synthetic critical forcing",
               "global lifting: f of regularity s gives u of regularity s + d",
               {"d": Param(1.0, "float", _between("d", 0.2, 2.0)), "s": Param(0.5, "float"),
                "p": Param(2.0, "float", _between("p", 1.0, 16.0)),
                "levels": Param(3, "int", _between("levels", 2, 4)),
                "Nx0": Param(32, "int", _pow2("Nx0", 8, 128)),
                "tol": Param(0.2, "float", _positive("tol")), "seed": _seed()},
               run_lifting, randomized=True),
    Experiment("local-lifting", "Cutoff bootstrap for local regularity gain",
               "local lifting: staged cutoff argument reaching s + d on a window",
               {"d": Param(2.0, "float", _between("d", 0.5, 2.0)), "s": Param(0.5, "float"),
                "symbol": Param("auto", "str", _choice("symbol", {"auto", "japanese", "fractional"})),
                "levels": Param(3, "int", _between("levels", 2, 4)),
                "Nx0": Param(32, "int", _pow2("Nx0", 8, 64)),
                "tol": Param(0.25, "float", _positive("tol")), "seed": _seed()},
               run_local_lifting, randomized=True),
    Experiment("residual-decay", "Band decay of K H - I for the truncated left parametrix",
               "parametrix residual: J terms leave a remainder of order -J",
               {"a": Param(0.5, "float", _a_range), "eps": Param(0.5, "float", lambda v: None if abs(v) < 1 else "eps must satisfy |eps| < 1"),
                "J": Param(1, "int", _between("J", 1, 3)),
                "bands": Param([4.0, 8.0, 16.0, 32.0], "floats", _all("bands", lambda b: b > 0, "must be positive")),
                "Nx": Param(128, "int", _pow2("Nx", 16, 256)), "probes": Param(3, "int", _between("probes", 1, 50)),
                "slack": Param(0.3, "float", _positive("slack")), "seed": _seed()},
               run_residual_decay, randomized=True),
    Experiment("norm-scan", "Critical regularity of the synthetic beta profile",
               "critical Sobolev regularity beta - (n + d)/2 of the beta profile",
               {"beta": Param(1.5, "float"), "d": Param(1.0, "float", _between("d", 0.2, 2.0)),
                "p": Param(2.0, "float", _between("p", 1.0, 16.0)),
                "levels": Param(3, "int", _between("levels", 2, 4)),
                "Nx0": Param(32, "int", _pow2("Nx0", 8, 128)),
                "tol": Param(0.15, "float", _positive("tol")), "seed": _seed()},
               run_norm_scan, randomized=True),
    Experiment("dirichlet-steady", "Steady restricted fractional Laplacian solve with f = 1",
               "steady Dirichlet profile: Getoor solution and dist^a boundary behaviour",
               {"a": Param(0.5, "float", _a_range), "N": _nodes(), "scheme": _scheme(),
                "exclude": Param(3, "int", _between("exclude", 0, 32)),
                "dmin_factor": Param(4.0, "float", _positive("dmin_factor")),
                "dmax": Param(0.2, "float", _between("dmax", 0.01, 1.0)),
                "tol_profile": Param(0.02, "float", _positive("tol_profile")),
                "tol_exponent": Param(0.05, "float", _positive("tol_exponent"))},
               run_dirichlet_steady),
    Experiment("dirichlet-heat", "Heat run with f = 1 approaching the steady state",
               "Dirichlet heat problem: exponential approach at rate lambda_min and dist^a profile",
               {"a": Param(0.5, "float", _a_range), "N": Param(256, "int", _between("N", dl.MIN_NODES, 2048)),
                "scheme": _scheme(), "T_factor": Param(6.0, "float", _positive("T_factor")),
                "M": Param(400, "int", _between("M", 1, dl.MAX_STEPS)),
                "time_scheme": Param("exponential", "str", _choice("time_scheme", set(dl.HEAT_SCHEMES))),
                "tol_rate": Param(0.1, "float", _positive("tol_rate")),
                "tol_exponent": Param(0.05, "float", _positive("tol_exponent"))},
               run_dirichlet_heat),
    Experiment("exponent-fit", "Order-reducing identity (1 + i xi)^(-a) e_+ e^{-x} = x^a e^{-x}/Gamma(a+1)",
               "one-dimensional order reduction producing the x^a boundary exponent",
               {"a": Param(0.5, "float", _a_range), "R": Param(20.0, "float", _between("R", 5.0, 200.0)),
                "log2N": Param(22, "int", _between("log2N", 10, 24)),
                "tol": Param(1e-4, "float", _positive("tol")), "tol_leak": Param(1e-6, "float", _positive("tol_leak")),
                "tol_exponent": Param(0.05, "float", _positive("tol_exponent"))},
               run_exponent_fit),
    Experiment("markov", "Markov property of the discrete Dirichlet form",
               "Dirichlet form: Q(clip(u, 0, 1)) <= Q(u)",
               {"a": Param(0.5, "float", _a_range), "N": Param(128, "int", _between("N", dl.MIN_NODES, 2048)),
                "scheme": _scheme(), "trials": Param(1000, "int", _between("trials", 1, 100000)), "seed": _seed()},
               run_markov, randomized=True),
    Experiment("contraction", "L_p contraction of the discrete heat semigroup",
               "sub-Markovian semigroup: ||e^{-tA} u||_p <= ||u||_p",
               {"a": Param(0.5, "float", _a_range), "N": Param(128, "int", _between("N", dl.MIN_NODES, 2048)),
                "scheme": _scheme(),
                "p_values": Param([1.5, 2.0, 4.0], "floats", _all("p_values", lambda p: p >= 1, "must be >= 1")),
                "trials": Param(200, "int", _between("trials", 1, 100000)), "seed": _seed()},
               run_contraction, randomized=True),
    Experiment("max-regularity", "Stability of the maximal-regularity ratio under refinement",
               "maximal L_p regularity of the Dirichlet heat problem",
               {"a": Param(0.5, "float", _a_range), "p": Param(3.0, "float", _between("p", 1.0, 16.0)),
                "Ns": Param([128, 256], "ints", _all("Ns", lambda n: dl.MIN_NODES <= n <= 2048, f"must lie in [{dl.MIN_NODES}, 2048]")),
                "trials": Param(8, "int", _between("trials", 1, 1000)), "T": Param(1.0, "float", _positive("T")),
                "M": Param(200, "int", _between("M", 1, 100000)),
                "growth_tol": Param(0.1, "float", _positive("growth_tol")), "scheme": _scheme(), "seed": _seed()},
               run_max_regularity, randomized=True),
    Experiment("interior-lift", "Interior versus boundary space-time regularity of the f = 1 heat run",
               "interior lifting of the Dirichlet heat solution away from the boundary",
               {"a": Param(0.5, "float", _a_range),
                "N": Param(255, "int", lambda v: None if 63 <= v <= 1023 and not (v + 1) & v
                           else "N + 1 must be a power of two with 63 <= N <= 1023"),
                "T": Param(1.0, "float", _positive("T")), "p": Param(2.0, "float", _between("p", 1.0, 16.0)),
                "eps": Param(0.05, "float", _positive("eps")), "levels": Param(3, "int", _between("levels", 2, 4)),
                "scheme": _scheme()},
               run_interior_lift),
]

EXPERIMENTS = {e.name: e for e in _EXPERIMENTS}


def list_experiments():
    """(name, description, anchor) for every registered experiment."""
    return [(e.name, e.description, e.anchor) for e in _EXPERIMENTS]


# ---------------------------------------------------------------- params

def coerce(kind: str, value):
    """Convert a parsed config or override value to the parameter kind."""
    if kind == "float":
        if isinstance(value, bool):
            raise TypeError("expected a number")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
            raise TypeError("expected an integer")
        return int(value)
    if kind == "str":
        if not isinstance(value, str):
            raise TypeError("expected a string")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise TypeError("expected true or false")
        return value
    if kind in ("floats", "ints"):
        if isinstance(value, str):
            value = [v for v in value.split(",") if v.strip()]
        if not isinstance(value, (list, tuple)):
            value = [value]
        return [coerce(kind[:-1], float(v) if isinstance(v, str) else v) for v in value]
    raise ValueError(f"unknown parameter kind {kind!r}")


def resolve(name: str, params: dict):
    """Merge ``params`` into the defaults of experiment ``name``.

    Returns ``(resolved, errors)``; ``errors`` lists unknown keys, type
    problems, out-of-range values and missing required values.
    """
    errors = []
    exp = EXPERIMENTS.get(name)
    if exp is None:
        return {}, [f"unknown experiment {name!r}"]
    out = {}
    for key in sorted(set(params) - set(exp.params)):
        errors.append(f"unknown parameter {key!r} for {name}")
    for key, spec in exp.params.items():
        if key in params:
            try:
                val = coerce(spec.kind, params[key])
            except (TypeError, ValueError) as exc:
                errors.append(f"{key}: {exc}")
                continue
        elif spec.default is REQUIRED:
            errors.append(f"{key} is required for randomized experiment {name}")
            continue
        else:
            val = spec.default
        if spec.check is not None:
            msg = spec.check(val)
            if msg:
                errors.append(msg)
                continue
        out[key] = val
    return out, errors
