import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from pamlab.errors import DomainError, ParameterError
from pamlab.variational.grid import (
    GridFunction,
    continuum_eigenvalue,
    functional_H_R,
    functional_I,
    legendre_L_R,
    richardson,
    scaling_transform,
)
from pamlab.variational.solvers import (
    SphereProblem,
    chi_dual,
    chi_tilde_from_chi,
    intermittency_gap,
    radial_eigen,
    solve_chi,
    solve_chi_R,
    solve_chi_tilde,
    write_result_json,
)

J0 = special.jn_zeros(0, 1)[0]


def chi_1d_gamma0(kappa, c):
    # minimise kappa pi^2 / L^2 + c L over the interval length L
    L = (2 * kappa * math.pi**2 / c) ** (1 / 3)
    return kappa * math.pi**2 / L**2 + c * L


def nu(gamma, d):
    return (1 - gamma) / (d + 2 - d * gamma)


# functionals ---------------------------------------------------------------------


def test_I_of_cosine_bump():
    kappa = 1.3
    vals = []
    for m in (64, 128, 256):
        f = GridFunction.from_function(lambda x: np.cos(np.pi * x / 2) ** 2, 1.0, m)
        vals.append(functional_I(f, kappa))
    assert abs(vals[-1] / (kappa * np.pi**2 / 4) - 1) < 5e-3
    assert abs(richardson(vals) / (kappa * np.pi**2 / 4) - 1) < 1e-5


@given(st.integers(0, 2**31), st.integers(1, 2))
def test_I_nonnegative(seed, d):
    g = np.random.default_rng(seed)
    f = GridFunction(1.0, 16, d, g.exponential(size=(17,) * d))
    assert functional_I(f, 0.5) >= 0


@pytest.mark.parametrize("d", [1, 2])
def test_I_scaling_exact(d):
    R = 2.5
    f = GridFunction.from_function(lambda *x: np.exp(-sum(c * c for c in x)), 1.0, 32, d)
    fs = GridFunction(1.0 / R, 32, d, R**d * f.values)
    assert functional_I(fs, 1.0) == pytest.approx(R**2 * functional_I(f, 1.0), rel=1e-12)


def test_I_rejects_negative():
    with pytest.raises(DomainError):
        functional_I(GridFunction(1.0, 4, 1, [0, -1, 0, 0, 0]), 1.0)


def test_H_R_examples():
    zero = GridFunction(1.0, 32, 1, np.zeros(33))
    assert functional_H_R(zero, 0.5, -1.0) == 0 and functional_H_R(zero, 0.0, -1.0) == 0
    half = GridFunction.from_function(lambda x: (np.abs(x) <= 0.5) * 1.0, 1.0, 64)
    assert functional_H_R(half, 0.0, -1.0) == pytest.approx(-1.0)
    R = 3.0
    uni = GridFunction.from_function(lambda x: np.full_like(x, 1 / (2 * R)), R, 50)
    assert functional_H_R(uni, 0.5, -0.7) == pytest.approx(-0.7 * 2 * R * (2 * R) ** -0.5, abs=1e-6)
    with pytest.raises(DomainError):
        functional_H_R(uni, 1.0, -1.0)


def test_legendre_examples():
    psi = GridFunction(1.0, 40, 1, -np.ones(41))
    assert legendre_L_R(psi, 0.5, -1.0) == pytest.approx(0.5, rel=1e-12)
    half = GridFunction.from_function(lambda x: np.where(np.abs(x) <= 0.5, -5.0, 0.0), 1.0, 64)
    assert legendre_L_R(half, 0.0, math.log(0.7)) == pytest.approx(-math.log(0.7) * 1.0)
    with pytest.raises(DomainError):
        legendre_L_R(psi, 1.2, -1.0)
    with pytest.raises(DomainError):
        legendre_L_R(psi.with_values(np.ones(41)), 0.5, -1.0)


def test_legendre_numeric_sup():
    gamma, H1 = 0.5, -1.3
    psi = GridFunction.from_function(lambda x: -(1 + x * x), 1.0, 80)
    L = legendre_L_R(psi, gamma, H1)
    fstar = (gamma * -H1 / np.abs(psi.values)) ** (1 / (1 - gamma))
    fam = [fstar * c for c in np.linspace(0.2, 3.0, 25)]
    g = np.random.default_rng(5)
    fam += [fstar * g.uniform(0.5, 1.5, fstar.shape) for _ in range(25)]
    vals = [psi.integral(f * psi.values) - functional_H_R(psi.with_values(f), gamma, H1) for f in fam]
    assert max(vals) <= L * (1 + 1e-12)
    best = psi.integral(fstar * psi.values) - functional_H_R(psi.with_values(fstar), gamma, H1)
    assert abs(best / L - 1) < 1e-2


@given(st.integers(0, 2**31), st.sampled_from([0.0, 0.25, 0.5, 0.75]), st.floats(-3.0, -0.1))
def test_young_inequality(seed, gamma, H1):
    g = np.random.default_rng(seed)
    f = GridFunction(2.0, 24, 1, g.exponential(size=25) * (g.random(25) < 0.7))
    psi = GridFunction(2.0, 24, 1, -g.exponential(size=25) - 1e-3)
    lhs = f.integral(f.values * psi.values) - functional_H_R(f, gamma, H1)
    assert lhs <= legendre_L_R(psi, gamma, H1) * (1 + 1e-12) + 1e-12


@pytest.mark.parametrize("gamma", [0.25, 0.5])
def test_L_scaling_identity_exact(gamma):
    psi = GridFunction.from_function(lambda x, y: -(1 + x * x + y * y), 1.0, 32, 2)
    L0 = legendre_L_R(psi, gamma, -1.0)
    for b in (0.5, 2.0, 3.0):
        Lb = legendre_L_R(scaling_transform(psi, b), gamma, -1.0)
        assert Lb == pytest.approx(b ** (1 / nu(gamma, 2) - 2) * L0, rel=1e-9)


def test_scaling_transform_identity_and_error():
    psi = GridFunction.from_function(lambda x: -(1 + x * x), 1.0, 16)
    same = scaling_transform(psi, 1.0)
    assert same.R == psi.R and np.array_equal(same.values, psi.values)
    with pytest.raises(ParameterError):
        scaling_transform(psi, 0.0)


def test_lambda_scaling_identity():
    for b in (0.5, 2.0, 3.0):
        s0, sb = [], []
        for m in (256, 512, 1024):
            p = GridFunction.from_function(lambda x: -(1 + x * x), 1.0, m)
            s0.append(continuum_eigenvalue(p, 1.0))
            sb.append(continuum_eigenvalue(scaling_transform(p, b), 1.0))
        assert abs(richardson(sb) / (richardson(s0) / b**2) - 1) < 1e-2


def test_continuum_eigenvalue_examples():
    c, R = -0.4, 1.5
    vals = [continuum_eigenvalue(GridFunction(R, m, 1, np.full(m + 1, c)), 0.8) for m in (64, 128)]
    want = c - 0.8 * np.pi**2 / (2 * R) ** 2
    assert abs(vals[-1] / want - 1) < 5e-3
    zero = GridFunction(1.0, 16, 1, np.zeros(17))
    assert continuum_eigenvalue(zero, 1.0, support_restricted=True) == -np.inf
    assert np.isfinite(continuum_eigenvalue(zero, 1.0))


@given(st.integers(0, 2**31))
def test_continuum_eigenvalue_monotone(seed):
    g = np.random.default_rng(seed)
    a = -g.exponential(size=(17, 17))
    b = a - g.exponential(size=(17, 17))
    pa, pb = GridFunction(1.0, 16, 2, a), GridFunction(1.0, 16, 2, b)
    assert continuum_eigenvalue(pb, 1.0) <= continuum_eigenvalue(pa, 1.0) + 1e-12


def test_richardson_removes_quadratic_error():
    vals = [3.0 + 7.0 * h**2 for h in (0.1, 0.05, 0.025)]
    assert richardson(vals) == pytest.approx(3.0, abs=1e-12)


@pytest.mark.parametrize("d", [1, 2])
def test_sphere_gradient_central_differences(d):
    prob = SphereProblem(1.5, 12, d, 0.9, 1.2, 0.5)
    prob.delta = 0.05
    g = np.random.default_rng(d)
    for _ in range(20):
        x = g.uniform(0.1, 1.0, prob.n**d)
        x /= np.linalg.norm(x)
        _, grad = prob.value_grad(x)
        num = np.empty_like(x)
        eps = 1e-6
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = eps
            num[i] = (prob.value(x + e) - prob.value(x - e)) / (2 * eps)
        assert np.linalg.norm(grad - num) <= 1e-5 * np.linalg.norm(num)


def test_sphere_parts_match_functionals():
    prob = SphereProblem(2.0, 20, 2, 0.7, 1.1, 0.5)
    g = np.random.default_rng(0)
    x = g.uniform(0, 1, prob.n**2)
    x /= np.linalg.norm(x)
    f = prob.to_grid(x)
    assert f.integral() == pytest.approx(1.0, abs=1e-10)
    I, P = prob.exact_parts(x)
    assert I == pytest.approx(functional_I(f, 0.7), rel=1e-12)
    assert P == pytest.approx(-functional_H_R(f, 0.5, -1.1), rel=1e-12)


def test_radial_eigen_converges():
    assert radial_eigen(1, 400)[0] == pytest.approx(np.pi**2 / 4, rel=1e-5)
    assert radial_eigen(2, 400)[0] == pytest.approx(J0**2, rel=1e-5)
    assert radial_eigen(3, 400)[0] == pytest.approx(np.pi**2, rel=1e-5)


# solvers ---------------------------------------------------------------------------


def test_chi_closed_form_d1():
    r = solve_chi(0.0, -1.0, 1.0, d=1)
    assert abs(r.extrapolated / chi_1d_gamma0(1.0, 1.0) - 1) < 0.02
    assert abs(r.extrapolated / chi_1d_gamma0(1.0, 1.0) - 1) < 1e-6
    assert 0 < r.value < np.inf


def test_chi_closed_form_d2():
    r = solve_chi(0.0, -1.0, 1.0, d=2)
    assert r.extrapolated == pytest.approx(2 * J0 * math.sqrt(math.pi), rel=1e-6)


def test_chi_R_nonincreasing_gamma0():
    vals = [solve_chi_R(R, 0.0, -1.0, 1.0).extrapolated for R in (0.4, 0.8, 1.6, 3.2)]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(chi_1d_gamma0(1.0, 1.0), rel=1e-6)


@pytest.mark.slow
def test_chi_R_nonincreasing_gamma_half():
    vals = [solve_chi_R(R, 0.5, -1.0, 1.0, m=32, levels=1, n_random=4).value for R in (0.5, 1.0, 2.0, 4.0)]
    assert all(b <= a * (1 + 1e-3) for a, b in zip(vals, vals[1:]))


@pytest.mark.slow
def test_chi_star_below_chi_R_and_converges():
    base = solve_chi_R(2.0, 0.5, -1.0, 1.0, m=32, levels=1, n_random=4)
    fmax = base.minimizer.values.max()
    caps = [0.05 * fmax, 0.3 * fmax, 0.8 * fmax, 2.0 * fmax]
    vals = [solve_chi_R(2.0, 0.5, -1.0, 1.0, m=32, levels=1, n_random=4, M_cap=M).value for M in caps]
    assert all(v <= base.value * (1 + 1e-6) for v in vals)
    assert vals[0] < vals[-1]
    assert abs(vals[-1] / base.value - 1) < 1e-4


@pytest.mark.slow
def test_chi_cross_below_chi_R_and_converges():
    R = 2.0
    base = solve_chi_R(R, 0.0, -1.0, 1.0).extrapolated
    vals = [solve_chi_R(R, 0.0, -1.0, 1.0, eps_cross=e).extrapolated for e in (1e-1, 1e-2, 1e-4, 1e-7)]
    assert all(v <= base * (1 + 1e-6) for v in vals)
    assert all(b >= a - 1e-6 for a, b in zip(vals, vals[1:]))
    assert abs(vals[-1] / base - 1) < 1e-2


def test_chi_R_errors():
    with pytest.raises(ParameterError):
        solve_chi_R(1.0, 0.5, -1.0, 1.0, m=8)
    with pytest.raises(DomainError):
        solve_chi_R(1.0, 1.0, -1.0, 1.0)
    with pytest.raises(ParameterError):
        solve_chi_R(1.0, 0.0, 1.0, 1.0)


@pytest.mark.parametrize("d", [1, 2])
def test_kappa_doubling_gamma0(d):
    q = d
    a = solve_chi(0.0, -1.0, 1.0, d=d).extrapolated
    b = solve_chi(0.0, -1.0, 2.0, d=d).extrapolated
    assert abs(b / (2 ** (q / (q + 2)) * a) - 1) < 1e-2


@pytest.mark.slow
def test_kappa_doubling_gamma_half():
    q = 0.5
    a = solve_chi(0.5, -1.0, 1.0, d=1, m=32).extrapolated
    b = solve_chi(0.5, -1.0, 2.0, d=1, m=32).extrapolated
    assert abs(b / (2 ** (q / (q + 2)) * a) - 1) < 1e-2


@pytest.mark.slow
@pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5])
@pytest.mark.parametrize("d", [1, 2])
def test_primal_dual_agreement(gamma, d):
    m = 64 if d == 1 else 32
    levels = 3 if d == 1 else 2
    r = solve_chi(gamma, -1.0, 1.0, d=d, m=m, levels=levels)
    R = r.R_star if gamma > 0 else 1.5 * r.R_star
    dual = chi_dual(gamma, -1.0, 1.0, d, R, m * 2 ** (levels - 1))["value"]
    assert abs(dual / r.extrapolated - 1) < 0.05


def test_chi_tilde_gamma0_closed_forms():
    assert solve_chi_tilde(0.0, -1.0, 1.0, d=1).extrapolated == pytest.approx(np.pi**2, rel=1e-6)
    assert solve_chi_tilde(0.0, -1.0, 1.0, d=2).extrapolated == pytest.approx(J0**2 * np.pi / 2, rel=1e-6)
    for d in (1, 2):
        chi = solve_chi(0.0, -1.0, 1.0, d=d).extrapolated
        rel = chi_tilde_from_chi(chi, 0.0, d) / solve_chi_tilde(0.0, -1.0, 1.0, d=d).extrapolated
        assert abs(rel - 1) < 1e-5


@pytest.mark.slow
def test_chi_tilde_constraint_active():
    r = solve_chi_tilde(0.5, -1.0, 1.0, d=1, m=64)
    assert abs(legendre_L_R(r.minimizer, 0.5, -1.0) / 1.0 - 1) < 1e-2
    assert 0 < r.extrapolated < np.inf


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.05, 0.45), st.floats(0.1, 10))
def test_intermittency_gap(p, q, nu_, chi):
    assert intermittency_gap(p, p, nu_, chi) == 0
    g = intermittency_gap(p, q, nu_, chi)
    assert g == pytest.approx(-intermittency_gap(q, p, nu_, chi))
    if p > q * (1 + 1e-9):
        assert g > 0


def test_intermittency_gap_error():
    with pytest.raises(ParameterError):
        intermittency_gap(0.0, 1.0, 0.2, 1.0)


def test_result_json(tmp_path):
    r = solve_chi(0.0, -1.0, 1.0, d=1)
    write_result_json(r, tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    assert set(data) >= {"problem", "gamma", "d", "kappa", "value", "extrapolated", "R_star", "grids", "iterations", "converged"}
    assert len(data["grids"]) == 3
