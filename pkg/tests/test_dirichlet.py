import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracheat import dirichlet as dl
from fracheat.dirichlet import (IntervalDomain, LiftWindow, assemble_restricted_fraclap, boundary_exponent_fit,
                                c1a, collocation_stencil, decay_rate_check, eigenmode_ratio, galerkin_stencil,
                                gaussian_fourier, gaussian_quadrature, getoor_constant, getoor_quadrature,
                                getoor_solution, heat_solve, interior_lift_check, lift_run, markov_check,
                                markov_trials, maximal_regularity_check, quadratic_form, quadratic_form_direct,
                                regularity_ratio, semigroup_contraction_check, steady_solve)

CORPUS_A = [0.25, 0.5, 0.75]


# ---------------------------------------------------------------- constants and oracles

def test_c1a_half_is_one_over_pi():
    assert c1a(0.5) == pytest.approx(1.0 / math.pi, rel=1e-15)


@pytest.mark.parametrize("a, value", [
    # mpmath: 4^a Gamma(a+1) Gamma(a+1/2) / Gamma(1/2); a = 0.25 also confirmed by direct
    # mpmath quadrature of the hypersingular integral at x = 0.3
    (0.25, 0.88622692545275801),
    (0.5, 1.0),
    (0.75, 1.329340388179137),
])
def test_getoor_constant(a, value):
    assert getoor_constant(a) == pytest.approx(value, rel=1e-14)


@pytest.mark.parametrize("a", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("x", [-0.9, 0.0, 0.5])
def test_getoor_quadrature_oracle(a, x):
    assert getoor_quadrature(x, a) == pytest.approx(getoor_constant(a), rel=1e-7)


@pytest.mark.parametrize("a, value", [
    # (-Delta)^a e^{-x^2} at 0 = 4^a Gamma(a+1/2)/sqrt(pi) (mpmath)
    (0.25, 0.9777410674469238),
    (0.5, 1.1283791670955126),
    (0.75, 1.4464090846320771),
])
def test_normalization_against_fourier_multiplier(a, value):
    assert gaussian_fourier(a) == pytest.approx(value, rel=1e-10)
    assert gaussian_quadrature(a) == pytest.approx(value, rel=1e-7)


def test_range_check_message():
    for bad in (0.0, 1.0, 1.5, -0.2):
        with pytest.raises(ValueError, match=r"a must lie in \(0,1\)"):
            c1a(bad)


# ---------------------------------------------------------------- assembly

@pytest.fixture(scope="module", params=CORPUS_A)
def model(request):
    return assemble_restricted_fraclap(request.param, 128)


def test_model_symmetric_positive_definite(model):
    A = model.A
    assert np.array_equal(A, A.T)
    assert model.lambda_min > 0


def test_reflection_commutes(model):
    R = np.eye(model.N)[::-1]
    assert np.linalg.norm(R @ model.A - model.A @ R) <= 1e-10 * np.linalg.norm(model.A)


def test_m_matrix_and_positive_weights(model):
    off = model.A[~np.eye(model.N, dtype=bool)]
    assert off.max() < 0
    assert model.info["m_matrix"]
    assert model.info["max_offdiag"] < 0


@pytest.mark.parametrize("a", [0.05, 0.1, 0.25, 0.5, 0.9, 0.99])
def test_collocation_weights_positive(a):
    diag, w = collocation_stencil(a, 64)
    assert np.all(w > 0)
    assert diag > 0


def test_auto_scheme_falls_back_for_small_a():
    assert assemble_restricted_fraclap(0.1, 64).scheme == "collocation"
    assert assemble_restricted_fraclap(0.5, 64).scheme == "galerkin"
    assert assemble_restricted_fraclap(0.5, 64, "collocation").scheme == "collocation"


def test_assembly_guards():
    with pytest.raises(ValueError):
        assemble_restricted_fraclap(0.5, 8)
    with pytest.raises(ValueError):
        assemble_restricted_fraclap(0.5, 64, "spectral")
    with pytest.raises(ValueError):
        assemble_restricted_fraclap(0.5, 64, kernel_scale=0.0)


def test_kernel_scale_multiplies_operator():
    m1 = assemble_restricted_fraclap(0.4, 64)
    m2 = assemble_restricted_fraclap(0.4, 64, kernel_scale=2.5)
    assert np.allclose(m2.A, 2.5 * m1.A, rtol=1e-14)


@pytest.mark.parametrize("a", CORPUS_A)
def test_row_sums_match_exterior_tail(a):
    # A applied to the discrete indicator versus c/(2a) [(1+x)^(-2a) + (1-x)^(-2a)]
    errs = []
    for N in (255, 511):
        m = assemble_restricted_fraclap(a, N)
        x = m.x
        rows = m.A @ np.ones(N)
        assert rows.min() > 0
        tail = c1a(a) / (2 * a) * ((1 + x) ** (-2 * a) + (1 - x) ** (-2 * a))
        sel = m.domain.dist >= 0.1
        errs.append(np.max(np.abs(rows - tail)[sel] / tail[sel]))
    assert errs[1] < 0.05
    assert 0.35 < errs[1] / errs[0] < 0.65


@pytest.mark.parametrize("a", CORPUS_A)
def test_getoor_profile_constancy(a):
    var = []
    for N in (255, 511):
        m = assemble_restricted_fraclap(a, N)
        prof = m.A @ (1 - m.x**2) ** a
        sel = m.domain.dist >= 0.1
        var.append((prof[sel].max() - prof[sel].min()) / getoor_constant(a))
    assert var[1] <= 0.02
    assert var[1] <= 0.6 * var[0]


# ---------------------------------------------------------------- energy

@pytest.mark.parametrize("a", CORPUS_A)
def test_matrix_energy_matches_direct_integral(a):
    dom = IntervalDomain(20)
    m = assemble_restricted_fraclap(a, dom, "galerkin")
    rng = np.random.default_rng(1)
    for _ in range(3):
        u = rng.standard_normal(dom.N)
        qd = quadratic_form_direct(a, dom, u)
        assert quadratic_form(m, u) == pytest.approx(qd, rel=1e-3)


def test_energy_of_single_hat():
    dom = IntervalDomain(16)
    m = assemble_restricted_fraclap(0.5, dom)
    hat = np.zeros(16)
    hat[8] = 1.0
    assert quadratic_form(m, hat) == pytest.approx(quadratic_form_direct(0.5, dom, hat), rel=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**16), st.sampled_from(CORPUS_A))
def test_energy_symmetric_and_positive(seed, a):
    m = assemble_restricted_fraclap(a, 32)
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal(32), rng.standard_normal(32)
    assert quadratic_form(m, u, v) == pytest.approx(quadratic_form(m, v, u), rel=1e-12, abs=1e-12)
    assert quadratic_form(m, u) > 0
    assert quadratic_form(m, np.zeros(32)) == 0.0


def test_galerkin_stencil_scaling():
    t = galerkin_stencil(0.5, 10)
    assert t[0] > 0 and np.all(t[1:] < 0)


# ---------------------------------------------------------------- steady problem

@pytest.mark.parametrize("a", CORPUS_A)
def test_steady_zero_forcing(a):
    m = assemble_restricted_fraclap(a, 64)
    assert np.all(steady_solve(m, 0.0) == 0.0)


def test_steady_matches_getoor_at_half():
    m = assemble_restricted_fraclap(0.5, 512)
    u = steady_solve(m, 1.0)
    ex = np.sqrt(1 - m.x**2)  # Getoor constant is 1 at a = 1/2
    assert np.max(np.abs(u - ex)) / ex.max() <= 0.02
    assert np.allclose(getoor_solution(m.x, 0.5), ex)


def test_steady_even_forcing_gives_even_solution():
    m = assemble_restricted_fraclap(0.3, 101)
    f = np.cos(2 * m.x) + m.x**2
    u = steady_solve(m, f)
    assert np.allclose(u, u[::-1], atol=1e-12 * np.abs(u).max())


def test_steady_accepts_callable():
    m = assemble_restricted_fraclap(0.5, 64)
    assert np.allclose(steady_solve(m, lambda x: 1 + 0 * x), steady_solve(m, 1.0))


# ---------------------------------------------------------------- exponent fits

@pytest.mark.parametrize("a", [0.2, 0.5, 0.8])
def test_exponent_fit_exact_profile(a):
    dom = IntervalDomain(512)
    fit = boundary_exponent_fit((1 - dom.x**2) ** a, dom)
    assert fit.exponent == pytest.approx(a, abs=0.01)


def test_exponent_fit_steady_monotone_in_a():
    ex = []
    for a in CORPUS_A:
        m = assemble_restricted_fraclap(a, 512)
        fit = boundary_exponent_fit(steady_solve(m), m.domain)
        assert fit.exponent == pytest.approx(a, abs=0.05)
        ex.append(fit.exponent)
    assert ex[0] < ex[1] < ex[2]


def test_exponent_fit_sides_agree():
    m = assemble_restricted_fraclap(0.5, 256)
    u = steady_solve(m)
    left = boundary_exponent_fit(u, m.domain, "left")
    right = boundary_exponent_fit(u, m.domain, "right")
    assert left.exponent == pytest.approx(right.exponent, abs=1e-10)


def test_exponent_fit_guards():
    dom = IntervalDomain(64)
    with pytest.raises(ValueError):
        boundary_exponent_fit(-np.ones(64), dom)
    with pytest.raises(ValueError):
        boundary_exponent_fit(np.ones(64), dom, dmax=0.01)
    with pytest.raises(ValueError):
        boundary_exponent_fit(np.ones(64), dom, model="cubic")


# ---------------------------------------------------------------- heat problem

def test_heat_zero_data():
    m = assemble_restricted_fraclap(0.5, 64)
    run = heat_solve(m, 0.0, 1.0, 20)
    assert np.all(run.states == 0.0)


def test_heat_guards():
    m = assemble_restricted_fraclap(0.5, 32)
    with pytest.raises(ValueError):
        heat_solve(m, 1.0, 1.0, 0)
    with pytest.raises(ValueError):
        heat_solve(m, 1.0, -1.0, 10)
    with pytest.raises(ValueError):
        heat_solve(m, 1.0, 1.0, 10, scheme="leapfrog")
    with pytest.raises(ValueError):
        heat_solve(m, np.ones((5, 32)), 1.0, 10)


@pytest.mark.parametrize("a", CORPUS_A)
def test_heat_approaches_steady_at_lambda_min(a):
    m = assemble_restricted_fraclap(a, 128)
    lam = m.lambda_min
    T = 6.0 / lam
    run = heat_solve(m, 1.0, T, 300, scheme="exponential")
    gap = np.sqrt(m.h * np.sum((run.states - steady_solve(m)) ** 2, axis=1))
    late = run.times >= 0.5 * T
    rate = -np.polyfit(run.times[late], np.log(gap[late]), 1)[0]
    assert rate == pytest.approx(lam, rel=0.01)


def test_heat_final_exponent_three_quarters():
    m = assemble_restricted_fraclap(0.75, 256)
    run = heat_solve(m, 1.0, 8.0 / m.lambda_min, 200, scheme="exponential")
    assert boundary_exponent_fit(run.states[-1], m.domain).exponent == pytest.approx(0.75, abs=0.05)


def test_implicit_euler_first_order():
    m = assemble_restricted_fraclap(0.5, 64)
    T = 0.5
    ref = heat_solve(m, 1.0, T, 10, scheme="exponential").states[-1]
    errs = [np.linalg.norm(heat_solve(m, 1.0, T, M).states[-1] - ref) for M in (100, 200, 400)]
    for e0, e1 in zip(errs, errs[1:]):
        assert e1 / e0 == pytest.approx(0.5, abs=0.1)


def test_crank_nicolson_beats_implicit_euler():
    m = assemble_restricted_fraclap(0.5, 64)
    u0 = np.cos(np.pi * m.x / 2)
    ref = heat_solve(m, 0.0, 0.5, 1, u0=u0, scheme="exponential").states[-1]
    e_ie = np.linalg.norm(heat_solve(m, 0.0, 0.5, 200, u0=u0).states[-1] - ref)
    e_cn = np.linalg.norm(heat_solve(m, 0.0, 0.5, 200, u0=u0, scheme="crank-nicolson").states[-1] - ref)
    assert e_cn < e_ie


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**16), st.floats(0.01, 0.5), st.floats(0.01, 0.5))
def test_exponential_semigroup_law(seed, t, s):
    m = assemble_restricted_fraclap(0.5, 48)
    u0 = np.random.default_rng(seed).standard_normal(48)
    a = heat_solve(m, 0.0, t + s, 1, u0=u0, scheme="exponential").states[-1]
    b = heat_solve(m, 0.0, s, 1, u0=heat_solve(m, 0.0, t, 1, u0=u0, scheme="exponential").states[-1],
                   scheme="exponential").states[-1]
    assert np.linalg.norm(a - b) <= 1e-10 * np.linalg.norm(u0)


def test_time_dependent_forcing_callable():
    m = assemble_restricted_fraclap(0.5, 32)
    run = heat_solve(m, lambda x, t: 1.0 + 0 * x, 0.5, 50)
    ref = heat_solve(m, 1.0, 0.5, 50)
    assert np.allclose(run.states, ref.states)


def test_decay_rate_check(model):
    assert decay_rate_check(model)["pass"]


# ---------------------------------------------------------------- Markov and contraction

def test_markov_equality_inside_unit_interval(model):
    u = np.random.default_rng(0).uniform(0, 1, model.N)
    r = markov_check(model, u)
    assert r["Q_clipped"] == pytest.approx(r["Q"], rel=1e-14)


def test_markov_strict_for_scaled_bump(model):
    u = 2.0 * (np.abs(model.x) < 0.5)
    r = markov_check(model, u)
    assert r["Q_clipped"] < r["Q"]


def test_markov_random_trials(model):
    res = markov_trials(model, trials=200, seed=3)
    assert res["pass"] and res["worst_ratio"] <= 1.0


def test_contraction_at_time_zero(model):
    r = semigroup_contraction_check(model, 2.0, trials=5, times=[0.0])
    assert r["worst_ratio"] == pytest.approx(1.0, rel=1e-12)


def test_l2_norm_decays_monotonically(model):
    u0 = np.random.default_rng(1).standard_normal(model.N)
    norms = [np.linalg.norm(model.propagator(t) @ u0) for t in np.linspace(0, 1, 11)]
    assert np.all(np.diff(norms) < 0)


@pytest.mark.parametrize("p", [1.5, 4.0, np.inf])
def test_lp_contraction(model, p):
    assert semigroup_contraction_check(model, p, trials=50, seed=2)["pass"]


# ---------------------------------------------------------------- maximal regularity

@pytest.mark.parametrize("p", [2.0, 3.0])
def test_regularity_ratio_lowest_eigenmode(p):
    m = assemble_restricted_fraclap(0.5, 64)
    lam, V = m.eig
    T, M = 1.0, 200
    f = np.tile(V[:, 0], (M, 1))
    assert regularity_ratio(m, f, T, p) == pytest.approx(eigenmode_ratio(lam[0], T, M, p), rel=0.01)


def test_regularity_ratio_zero_forcing_is_undefined():
    m = assemble_restricted_fraclap(0.5, 32)
    assert math.isnan(regularity_ratio(m, np.zeros((10, 32)), 1.0, 2.0))


def test_maximal_regularity_small():
    r = maximal_regularity_check(0.5, 3.0, Ns=(64, 128), trials=3, M=100, seed=0)
    assert r["pass"]
    assert len(r["worst_ratio"]) == 2


# ---------------------------------------------------------------- interior lift

@pytest.fixture(scope="module")
def lift_half():
    return lift_run(0.5, 255, 1.0)


def test_interior_lift_half(lift_half):
    model, run = lift_half
    r = interior_lift_check(model, run)
    assert r["pass"]
    assert r["interior_critical"] >= 1.0
    assert r["boundary_critical"] == pytest.approx(r["boundary_predicted"], abs=0.25)


def test_interior_lift_smaller_window_not_worse(lift_half):
    model, run = lift_half
    big = interior_lift_check(model, run, LiftWindow(0.0, 0.5))
    small = interior_lift_check(model, run, LiftWindow(0.0, 0.3))
    assert small["interior_critical"] >= big["interior_critical"] - 0.1


def test_interior_lift_smooth_manufactured_solution():
    a, N, T = 0.5, 255, 1.0
    model = assemble_restricted_fraclap(a, N)
    x = model.x
    bump = np.where(np.abs(x) < 0.6, np.exp(-1.0 / np.maximum(1 - (x / 0.6) ** 2, 1e-300)), 0.0)
    g = dl.lift_grid(a, N, T)
    times = np.linspace(0, T, g.Nt + 1)
    w = np.sin(np.pi * times / T) ** 2
    dw = 2 * np.sin(np.pi * times / T) * np.cos(np.pi * times / T) * np.pi / T
    Ab = model.A @ bump
    # exact solution u = w(t) bump(x) of d_t u + A u = f, sampled at the step midpoints
    f = lambda xx, t: (np.interp(t, times, dw) * bump + np.interp(t, times, w) * Ab)  # noqa: E731
    run = heat_solve(model, f, T, g.Nt, scheme="exponential")
    assert np.max(np.abs(run.states - np.outer(w, bump))) < 1e-2
    exact = dl.HeatRun(times, np.outer(w, bump), "exact", model)
    r = interior_lift_check(model, exact)
    assert "top" in r["interior_flags"]


def test_interior_lift_guards(lift_half):
    model, run = lift_half
    with pytest.raises(ValueError):
        interior_lift_check(model, run, LiftWindow(0.5, 0.4))
    with pytest.raises(ValueError):
        dl.lift_grid(0.5, 100, 1.0)
