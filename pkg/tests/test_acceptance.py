"""Acceptance criteria, one test per criterion.

Each check returns ``(ok, detail)``; the wall time is compared with the
criterion's budget.  A PASS/FAIL line per criterion is printed at the end
of the pytest session (see ``conftest.py``), and running this file as a
script prints the same lines directly.
"""

import time

import numpy as np
import pytest

from fracheat.experiments import EXPERIMENTS, resolve
from fracheat.parabolic import build_parametrix, residual_order, solve_constant
from fracheat.quantize import AnisoGrid, GridFunction, apply_multiplier, relative_l2
from fracheat.symbols import (bracket_power, check_estimates, drift_symbol, fractional_symbol, heat_symbol,
                              japanese_power, modulated_fractional_symbol, parametrix_principal)

RESULTS = {}
CORPUS_A = (0.25, 0.5, 0.75)


def execute(name, **params):
    resolved, errs = resolve(name, params)
    assert not errs, errs
    t0 = time.perf_counter()
    out = EXPERIMENTS[name].runner(resolved)
    return out, time.perf_counter() - t0


def check_symbol_classes():
    corpus = [
        bracket_power(1.5, 1.0), bracket_power(-1.0, 0.6), bracket_power(0.7, 1.6),
        japanese_power(1.2), japanese_power(2.0), fractional_symbol(0.3), drift_symbol([0.7]),
        heat_symbol(fractional_symbol(0.5)), heat_symbol(japanese_power(2.0)), heat_symbol(drift_symbol([0.5])),
        parametrix_principal(fractional_symbol(0.3)), parametrix_principal(japanese_power(2.0)),
        heat_symbol(modulated_fractional_symbol(0.5)), parametrix_principal(modulated_fractional_symbol(0.5)),
    ]
    worst, bad = 0.0, []
    for h in corpus:
        t0 = time.perf_counter()
        rep = check_estimates(h, max_alpha=3, max_j=2)
        worst = max(worst, time.perf_counter() - t0)
        if not rep.passed:
            bad.append(h.name)
    control = check_estimates(bracket_power(1.5, 0.6).declare(regularity=1.8))
    ok = not bad and not control.passed and worst <= 30.0
    return ok, f"{len(corpus)} symbols, failures={bad}, control rejected={not control.passed}, slowest {worst:.1f} s"


def check_inversion():
    worst = 0.0
    t0 = time.perf_counter()
    for p in (fractional_symbol(0.5, n=2), japanese_power(2.0, n=2), drift_symbol([0.5, -0.3])):
        g = AnisoGrid.balanced(64, p.d, n=2, Nt=64)
        rng = np.random.default_rng(0)
        f = GridFunction(g, rng.standard_normal(g.shape))
        worst = max(worst, relative_l2(apply_multiplier(heat_symbol(p), solve_constant(p, f)), f))
    el = time.perf_counter() - t0
    return worst <= 1e-10 and el <= 5.0, f"worst relative L2 {worst:.1e} in {el:.2f} s on 64^3 grids"


def check_global_lifting():
    parts, ok = [], True
    for d in (0.6, 1.0, 1.6):
        out, el = execute("lifting", d=d, s=0.5, seed=0)
        shifts = [q["shift"] for q in out.summary["pairs"]]
        ok &= out.passed and all(abs(sh - d) <= 0.2 for sh in shifts) and el <= 120.0
        parts.append(f"d={d}: shifts {', '.join(f'{v:.3f}' for v in shifts)} ({el:.1f} s)")
    return ok, "; ".join(parts)


def check_local_lifting():
    parts, ok = [], True
    for d in (1.0, 2.0):
        out, el = execute("local-lifting", d=d, s=0.5, seed=0)
        r = out.summary
        ok &= out.passed and abs(r["measured_local_regularity"] - r["target"]) <= 0.25 and el <= 180.0
        if d == 2.0:
            ok &= r["stages_needed"] >= 2 and r["single_stage_shortfall"] >= 0.3
        parts.append(f"d={d}: local {r['measured_local_regularity']:.2f} vs {r['target']:.2f}, "
                     f"stages {r['stages_needed']}, one-stage shortfall {r['single_stage_shortfall']:.2f} ({el:.1f} s)")
    return ok, "; ".join(parts)


def check_residual_order():
    p = modulated_fractional_symbol(0.5, 0.5)
    bands = [4.0, 8.0, 16.0, 32.0]
    t0 = time.perf_counter()
    slopes = {J: residual_order(build_parametrix(p, J), bands, seed=0).slope for J in (1, 2)}
    el = time.perf_counter() - t0
    ok = slopes[1] <= -1 + 0.3 and slopes[2] <= -2 + 0.3 and el <= 120.0
    return ok, f"slope J=1 {slopes[1]:.2f}, J=2 {slopes[2]:.2f} over {len(bands)} bands ({el:.1f} s)"


def check_order_reduction():
    parts, ok = [], True
    for a in (0.3, 0.5, 0.8):
        out, el = execute("exponent-fit", a=a)
        s = out.summary
        ok &= s["relative_l2"] <= 1e-4 and s["leakage"] <= 1e-6 and el <= 5.0
        parts.append(f"a={a}: err {s['relative_l2']:.1e}, leak {s['leakage']:.1e} ({el:.1f} s)")
    return ok, "; ".join(parts)


def check_dirichlet_steady():
    parts, ok = [], True
    for a in CORPUS_A:
        out, el = execute("dirichlet-steady", a=a, N=512)
        s = out.summary
        ok &= out.passed and el <= 60.0
        parts.append(f"a={a}: profile err {s['getoor_error_interior']:.4f} (all nodes {s['getoor_error_all']:.4f}), "
                     f"a_hat {s['exponents']['left']:.3f} ({el:.1f} s)")
    return ok, "; ".join(parts)


def check_dirichlet_heat():
    parts, ok = [], True
    t0 = time.perf_counter()
    for a in CORPUS_A:
        out, _ = execute("dirichlet-heat", a=a)
        s = out.summary
        ok &= out.passed
        parts.append(f"a={a}: rate err {s['rate_rel_error']:.1e}, a_hat {s['final_exponent']:.3f}")
    mr, _ = execute("max-regularity", a=0.5, Ns=[128, 256], seed=0)
    el = time.perf_counter() - t0
    ok &= mr.passed and el <= 180.0
    ratios = mr.summary["worst_ratio"]
    parts.append(f"max-reg ratios {ratios[0]:.3f} -> {ratios[1]:.3f} ({el:.1f} s total)")
    return ok, "; ".join(parts)


def check_dirichlet_form():
    t0 = time.perf_counter()
    mk, _ = execute("markov", a=0.5, trials=1000, seed=0)
    ct, _ = execute("contraction", a=0.5, trials=200, p_values=[1.5, 2.0, 4.0], seed=0)
    el = time.perf_counter() - t0
    ok = mk.passed and ct.passed and el <= 60.0
    contr = ", ".join(f"p={r['p']:g}: {r['worst_ratio']:.6f}" for r in ct.summary["checks"])
    return ok, (f"markov {mk.summary['passed_trials']}/{mk.summary['trials']}, "
                f"weights min {mk.summary['min_weight']:.2e}, contraction {contr} ({el:.1f} s)")


def check_interior_lift():
    out, el = execute("interior-lift", a=0.5, p=2.0)
    s = out.summary
    ok = out.passed and s["interior_critical"] - s["boundary_critical"] >= 0.5 and el <= 180.0
    return ok, (f"interior {s['interior_critical']:.2f}, boundary {s['boundary_critical']:.2f}, "
                f"gap {s['interior_critical'] - s['boundary_critical']:.2f} ({el:.1f} s)")


CRITERIA = [
    ("1 symbol-class certification", check_symbol_classes),
    ("2 constant-coefficient inversion", check_inversion),
    ("3 global regularity lifting", check_global_lifting),
    ("4 local lifting", check_local_lifting),
    ("5 parametrix residual order", check_residual_order),
    ("6 order-reducing identity", check_order_reduction),
    ("7 Dirichlet steady profile", check_dirichlet_steady),
    ("8 Dirichlet heat problem", check_dirichlet_heat),
    ("9 Dirichlet-form structure", check_dirichlet_form),
    ("10 interior lifting", check_interior_lift),
]


@pytest.mark.parametrize("label, check", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(label, check):
    ok, detail = check()
    RESULTS[label] = (ok, detail)
    assert ok, detail


if __name__ == "__main__":
    for label, check in CRITERIA:
        ok, detail = check()
        print(f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}")
