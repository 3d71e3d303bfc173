import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pamlab.errors import FitError, NumericError, ParameterError, RangeError
from pamlab.potential.distributions import BernoulliTrap
from pamlab.potential.field import PotentialField, sample_field
from pamlab.potential.lattice import LatticeBox
from pamlab.potential.scaling import ScalingProfile
from pamlab.solver.pam import fundamental_solution
from pamlab.spectral.comparison import check_compact_bound, check_eigenvalue_comparison, max_window_eigenvalue
from pamlab.spectral.dirichlet import (
    dirichlet_spectrum,
    principal_eigenvalue,
    rayleigh,
    shifted_principal_eigenvalue,
)
from pamlab.spectral.ids import (
    IDSHistogram,
    default_window,
    energies,
    ids_estimate,
    laplace_transform_ids,
    lifshitz_fit,
    write_ids_csv,
)
from pamlab.spectral.partition import build_partition_potential, phi, zeta


def bern(d, R, seed, p=0.7):
    return sample_field(BernoulliTrap(p), LatticeBox(d, R), seed)


# spectra -------------------------------------------------------------------


def test_single_site_spectrum():
    f = PotentialField.constant(LatticeBox(2, 0), -0.4)
    sp = dirichlet_spectrum(f, 1.5)
    assert sp.eigenvalues.tolist() == pytest.approx([-0.4 - 6.0])


def test_path_graph_closed_form():
    n, kappa = 21, 0.7
    f = PotentialField.constant(LatticeBox(1, 10), 0.0)
    lam = dirichlet_spectrum(f, kappa).eigenvalues
    k = np.arange(1, n + 1)
    expect = -2 * kappa * (1 - np.cos(k * np.pi / (n + 1)))
    assert np.allclose(lam, expect, atol=1e-12)


def test_spectrum_invariants():
    f = bern(2, 6, 3)
    sp = dirichlet_spectrum(f, 1.0)
    E = sp.eigenvectors
    assert np.allclose(E.T @ E, np.eye(E.shape[1]), atol=1e-10)
    assert sp.lambda_1 < 0
    assert np.all(np.diff(sp.eigenvalues) <= 0)
    g1 = sp.full_vector(0)
    assert rayleigh(f, 1.0, g1) == pytest.approx(sp.lambda_1, abs=1e-10)
    gen = np.random.default_rng(0)
    for _ in range(50):
        g = gen.normal(size=f.box.n_sites) * f.active
        g /= np.linalg.norm(g)
        assert rayleigh(f, 1.0, g) <= sp.lambda_1 + 1e-12


def test_iterative_matches_dense():
    from pamlab.spectral import dirichlet as mod

    f = bern(2, 15, 1, p=0.8)
    dense = dirichlet_spectrum(f, 1.0, k_max=5).eigenvalues
    old = mod.DENSE_LIMIT
    mod.DENSE_LIMIT = 10
    try:
        it = dirichlet_spectrum(f, 1.0, k_max=5).eigenvalues
    finally:
        mod.DENSE_LIMIT = old
    assert np.allclose(dense, it, atol=1e-9)


def test_no_active_sites_raises():
    box = LatticeBox(1, 2)
    f = PotentialField.from_array(box, np.full(5, -np.inf))
    with pytest.raises(NumericError):
        dirichlet_spectrum(f, 1.0)
    assert principal_eigenvalue(f, 1.0) == -np.inf


def test_shifted_eigenvalue():
    f = bern(1, 30, 2)
    assert shifted_principal_eigenvalue(f, [0], 30, 1.0) == pytest.approx(dirichlet_spectrum(f, 1.0).lambda_1, abs=1e-12)
    c = PotentialField.constant(LatticeBox(2, 10), -0.2)
    vals = {round(shifted_principal_eigenvalue(c, z, 3, 1.0), 12) for z in ([0, 0], [4, -5], [-7, 7])}
    assert len(vals) == 1
    with pytest.raises(RangeError):
        shifted_principal_eigenvalue(f, [28], 5, 1.0)


def brute_window_max(field, kappa, reach, radius):
    best = -np.inf
    d = field.box.d
    W = field.embed(reach + radius + 1, fill=-np.inf) if field.box.R < reach + radius else field
    for z in np.ndindex(*(2 * reach + 1,) * d):
        z = np.array(z) - reach
        best = max(best, shifted_principal_eigenvalue(W, z, radius, kappa))
    return best


@pytest.mark.parametrize("d,R,reach,radius", [(1, 40, 20, 8), (2, 12, 4, 3)])
def test_branch_and_bound_matches_exhaustive(d, R, reach, radius):
    for s in range(3):
        f = bern(d, R, s)
        bb, arg, _ = max_window_eigenvalue(f, 1.0, reach, radius)
        assert bb == pytest.approx(brute_window_max(f, 1.0, reach, radius), abs=1e-10)
        assert shifted_principal_eigenvalue(f, arg, radius, 1.0) == pytest.approx(bb, abs=1e-12)


# partition of unity --------------------------------------------------------


def test_phi_symmetry_and_plateaus():
    x = np.linspace(-3, 3, 601)
    assert np.allclose(phi(-1 - x), 1 - phi(x), atol=1e-15)
    assert np.all(phi(x[x <= -1]) == 0) and np.all(phi(x[x >= 0]) == 1)


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("R", [2, 4, 8, 16, 32, 64])
def test_partition_of_unity(d, R):
    pp = build_partition_potential(R, 1.0, d)
    if d == 1:
        pts = np.arange(-2 * R, 2 * R)[:, None]
    else:
        g = np.random.default_rng(R * d)
        pts = g.integers(-2 * R, 2 * R, size=(400, d))
    assert np.max(np.abs(pp.eta_sq_sum(pts) - 1.0)) <= 1e-12
    assert pp.sup * R**2 <= pp.constant


def test_eta_plateau_and_support():
    R = 8
    x = np.arange(-R // 2, R // 2 + 1)
    assert np.all(zeta(x, R) == 1.0)
    far = np.array([-3 * R // 2 - 1, 3 * R // 2 + 1, 3 * R // 2])
    assert np.all(zeta(far, R) == 0.0)


def test_phi_R_periodic_and_scaling():
    sups = []
    for R in (4, 8, 16, 32):
        pp = build_partition_potential(R, 1.0, 2)
        pts = np.array([[1, 2], [3, -5], [R, R - 1]])
        assert np.allclose(pp(pts), pp(pts + 2 * R), atol=0)
        assert np.allclose(pp(pts), pp(pts - np.array([2 * R, 0])), atol=0)
        sups.append(pp.sup * R**2)
    assert max(sups) <= build_partition_potential(4, 1.0, 2).constant


def test_phi_R_matches_gradient_definition():
    # brute force: (kappa/2) sum_{y~z} sum_k (eta_k(y) - eta_k(z))^2 in d = 2
    R, kappa = 4, 0.6
    pp = build_partition_potential(R, kappa, 2)
    ks = [np.array(k) for k in np.ndindex(5, 5)]
    for z in ([0, 0], [3, 2], [5, -6], [7, 7]):
        z = np.array(z)
        tot = 0.0
        for k in ks:
            k = k - 2
            ez = pp.eta(k, z)[0]
            for e in ([1, 0], [-1, 0], [0, 1], [0, -1]):
                tot += (pp.eta(k, z + np.array(e))[0] - ez) ** 2
        assert pp(z)[0] == pytest.approx(0.5 * kappa * tot, abs=1e-13)


def test_partition_errors():
    with pytest.raises(ParameterError):
        build_partition_potential(1, 1.0, 1)
    with pytest.raises(ParameterError):
        build_partition_potential(3.5, 1.0, 1)


# eigenvalue comparison ----------------------------------------------------


def test_comparison_free_field_strict():
    f = PotentialField.constant(LatticeBox(1, 12), 0.0)
    out = check_eigenvalue_comparison(f, 1.0, 12, 4)
    assert out["holds"] and out["gap"] < 0


def test_comparison_all_traps():
    box = LatticeBox(1, 30)
    f = PotentialField.from_array(box, np.full(box.n_sites, -np.inf))
    out = check_eigenvalue_comparison(f, 1.0, 12, 4)
    assert out["lhs"] == -np.inf and out["rhs"] == -np.inf and out["holds"]


def test_comparison_rhs_is_window_max():
    f = bern(1, 30, 5)
    out = check_eigenvalue_comparison(f, 1.0, 12, 4)
    assert out["rhs"] == pytest.approx(brute_window_max(f, 1.0, 20, 8), abs=1e-10)


def test_comparison_parameter_error():
    with pytest.raises(ParameterError):
        check_eigenvalue_comparison(bern(1, 10, 0), 1.0, 4, 4)


@given(st.integers(0, 2**31), st.sampled_from([0.5, 0.7, 0.9]))
def test_comparison_holds_random(seed, p):
    f = bern(1, 30, seed, p)
    assert check_eigenvalue_comparison(f, 1.0, 12, 4)["holds"]


def test_compact_bound_examples():
    f = bern(1, 6, 1)
    out = check_compact_bound(f, 1.0, 2.0, 6)
    assert out["holds"]
    zero = PotentialField.constant(LatticeBox(1, 200), 0.0)
    out = check_compact_bound(zero, 1.0, 1.5, 50)
    assert out["lhs"] <= 1 <= out["rhs"] and out["holds"]
    r1 = check_compact_bound(f, 1.0, 2.0, 4)["rhs"]
    r2 = check_compact_bound(f, 1.0, 2.0, 16)["rhs"]
    assert r2 <= r1


def test_compact_bound_cap_flag():
    f = bern(1, 3, 1)
    out = check_compact_bound(f, 1.0, 4.0, 4)
    assert out["capped"] and out["radius"] == 3


# IDS -------------------------------------------------------------------------


def test_energies_sign_convention():
    f = bern(1, 20, 2)
    sp = dirichlet_spectrum(f, 1.0)
    assert np.allclose(energies(f, 1.0), np.sort(-sp.eigenvalues), atol=1e-11)
    g = bern(2, 4, 2)
    assert np.allclose(energies(g, 1.0), np.sort(-dirichlet_spectrum(g, 1.0).eigenvalues), atol=1e-11)


def test_ids_trivial_ends():
    E = np.array([0.0, 0.001, 4.0, 4.5])
    h = ids_estimate(BernoulliTrap(1.0), 1.0, [5, 50], E, 2, 0)
    # free band bottom is positive on a finite box, top at 4 kappa
    assert h.n[:, 0].tolist() == [0.0, 0.0]
    assert np.allclose(h.n[:, 3], [(2 * R + 1) / (2 * R) for R in (5, 50)])
    assert np.all(np.diff(h.n, axis=1) >= 0)


def test_ids_p1_d2_full_band():
    h = ids_estimate(BernoulliTrap(1.0), 1.0, [3], np.array([8.0]), 1, 0, d=2)
    assert h.n[0, 0] == pytest.approx(49 / 36)


def test_ids_monotone_and_reproducible():
    E = np.linspace(0, 2, 40)
    a = ids_estimate(BernoulliTrap(0.7), 1.0, [20], E, 5, 3)
    b = ids_estimate(BernoulliTrap(0.7), 1.0, [20], E, 5, 3)
    assert np.array_equal(a.n, b.n)
    assert np.all(np.diff(a.n[0]) >= 0)


def test_laplace_transform_trace_identity():
    f = bern(1, 6, 4)
    sp = dirichlet_spectrum(f, 1.0)
    assert laplace_transform_ids(sp, 0.0) == pytest.approx(f.n_active / f.box.n_sites)
    t = 1.3
    diag = sum(fundamental_solution(f, 1.0, t, c).at(c) for c in f.box.coords[~f.trap])
    assert laplace_transform_ids(sp, t) == pytest.approx(diag / f.box.n_sites, abs=1e-8)
    vals = [laplace_transform_ids(sp, s) for s in (0.0, 0.5, 1.0, 2.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def synthetic(exponent, E):
    n = np.exp(-E ** (-exponent))
    return IDSHistogram(E, [1], n[None, :], [1], "synthetic", 1, 1.0, [10**9])


@pytest.mark.parametrize("exponent", [0.5, 1.0, 0.3])
def test_fitter_recovers_planted_exponent(exponent):
    E = np.geomspace(0.01, 1.0, 200)
    fit = lifshitz_fit(synthetic(exponent, E), window=(0.02, 0.2))
    assert abs(fit["slope"] - exponent) < 1e-3
    assert fit["r2"] > 0.999


def test_fitter_targets_from_profile():
    E = np.geomspace(0.01, 1.0, 200)
    prof = ScalingProfile.for_distribution(BernoulliTrap(0.7), 1)
    fit = lifshitz_fit(synthetic(0.5, E), profile=prof, window=(0.02, 0.2))
    assert fit["target_exponent"] == pytest.approx(0.5)


def test_fit_errors():
    E = np.geomspace(0.01, 1.0, 50)
    h = synthetic(0.5, E)
    with pytest.raises(FitError):
        lifshitz_fit(h, window=(2.0, 3.0))
    z = IDSHistogram(E, [1], np.zeros((1, E.size)), [1], "x", 1, 1.0, [100])
    with pytest.raises(FitError):
        lifshitz_fit(z, window=(0.1, 0.5))
    with pytest.raises(FitError):
        default_window(z)


def test_default_window_is_a_decade():
    E = np.geomspace(0.01, 1.0, 50)
    lo, hi = default_window(synthetic(0.5, E))
    assert hi == pytest.approx(10 * lo)


def test_ids_csv(tmp_path):
    h = ids_estimate(BernoulliTrap(0.7), 1.0, [5, 8], np.array([0.5, 1.0]), 2, 1)
    write_ids_csv(h, tmp_path / "ids.csv")
    lines = (tmp_path / "ids.csv").read_text().splitlines()
    assert lines[0] == "box_R,E,n_estimate,n_samples" and len(lines) == 5
