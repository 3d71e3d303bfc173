import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pamlab import rng
from pamlab.errors import ParameterError, ProfileError, RangeError
from pamlab.potential.distributions import BernoulliTrap, DensityTail, StretchedTail, cumulant_H, parse_tag
from pamlab.potential.field import PotentialField, field_distribution, read_field, sample_field, write_field
from pamlab.potential.lattice import LatticeBox
from pamlab.potential.scaling import (
    PowerScale,
    ScalingProfile,
    beta_of,
    calibrate_alpha,
    nu_of,
    scale_b,
    scale_field,
    scaled_cumulant,
)

DISTS = [BernoulliTrap(0.7), StretchedTail(1.0, 0.5), StretchedTail(2.0, 0.25), DensityTail(0.0), DensityTail(1.5)]


def test_degenerate_bernoulli_all_zero():
    f = sample_field(BernoulliTrap(1.0), LatticeBox(2, 5), 3)
    assert not f.trap.any() and np.all(f.values == 0)


def test_bernoulli_trap_fraction_binomial():
    box = LatticeBox(2, 50)
    counts = [sample_field(BernoulliTrap(0.7), box, s).trap.sum() for s in range(100)]
    n = 100 * box.n_sites
    frac = sum(counts) / n
    assert abs(frac - 0.3) <= 4 * math.sqrt(0.3 * 0.7 / n)


def test_stretched_values_finite_negative():
    f = sample_field(StretchedTail(1.0, 0.5), LatticeBox(1, 5000), 1)
    assert not f.trap.any()
    assert np.all(np.isfinite(f.values)) and np.all(f.values < 0)


@pytest.mark.parametrize("dist", DISTS)
def test_sampling_reproducible_and_nonpositive(dist):
    box = LatticeBox(2, 8)
    a, b = sample_field(dist, box, 42), sample_field(dist, box, 42)
    assert a == b
    assert np.all(a.as_array() <= 0)
    assert not (a == sample_field(dist, box, 43))


def test_invalid_parameters_name_field():
    for ctor, kw, name in [(BernoulliTrap, {"p": 1.5}, "p"), (StretchedTail, {"A": -1, "gamma": 0.5}, "A"),
                           (StretchedTail, {"A": 1, "gamma": 1.0}, "gamma"), (DensityTail, {"sigma": -2}, "sigma")]:
        with pytest.raises(ParameterError) as ei:
            ctor(**kw)
        assert ei.value.field == name


def test_tag_round_trip():
    for dist in DISTS:
        assert parse_tag(dist.tag()) == dist


@pytest.mark.parametrize("dist", DISTS)
def test_cumulant_zero_and_shape(dist):
    assert cumulant_H(dist, 0.0) == 0.0
    ells = np.geomspace(1e-2, 1e3, 25)
    H = np.array([cumulant_H(dist, l) for l in ells])
    assert np.all(H < 0)
    assert np.all(np.diff(H) <= 1e-12)


@pytest.mark.parametrize("dist", DISTS)
@given(l1=st.floats(0.0, 50.0), l2=st.floats(0.0, 50.0))
def test_cumulant_midpoint_convex(dist, l1, l2):
    a, b = cumulant_H(dist, l1), cumulant_H(dist, l2)
    assert cumulant_H(dist, 0.5 * (l1 + l2)) <= 0.5 * (a + b) + 1e-9


def test_bernoulli_cumulant():
    assert cumulant_H(BernoulliTrap(0.3), 5.0) == math.log(0.3)


def test_stretched_cumulant_monte_carlo():
    dist = StretchedTail(1.0, 0.5)
    u = rng.site_uniforms(2024, 1_000_000)
    x, _ = dist.from_uniform(u)
    w = np.exp(10.0 * x)
    mc = math.log(w.mean())
    se = w.std() / math.sqrt(w.size) / w.mean()
    assert abs(cumulant_H(dist, 10.0) - mc) <= 3 * se


def test_density_tail_cumulant_closed_form():
    # sigma = 0: X uniform on [0, 1], <e^{-lX}> = (1 - e^{-l}) / l
    for l in (0.1, 1.0, 7.0, 200.0):
        assert cumulant_H(DensityTail(0.0), l) == pytest.approx(math.log(-math.expm1(-l) / l), rel=1e-12)


@given(st.floats(0.0, 0.99), st.integers(1, 4))
def test_nu_beta_identities(gamma, d):
    nu, beta = nu_of(gamma, d), beta_of(gamma, d)
    assert 0 < nu <= 1 / (d + 2) + 1e-15
    assert 0 < beta <= 2 / d + 1e-12
    assert beta == pytest.approx(2 / (d + 2 * gamma / (1 - gamma)), abs=1e-12)


def test_bernoulli_alpha_exact():
    for d in (1, 2, 3):
        a = calibrate_alpha(BernoulliTrap(0.6), d, 0.0, math.log(0.6))
        for t in (1.0, 10.0, 1e4, 1e9):
            assert a(t) == pytest.approx(t ** (1 / (d + 2)), rel=1e-13)
            assert scaled_cumulant(BernoulliTrap(0.6), t, a, 2.5, d) == pytest.approx(math.log(0.6), rel=1e-13)


@pytest.mark.parametrize("dist,d", [(StretchedTail(1.0, 0.5), 1), (DensityTail(0.0), 1), (StretchedTail(1.0, 0.25), 2)])
def test_calibration_hits_target(dist, d):
    a = calibrate_alpha(dist, d, dist.gamma_class, -1.0)
    ts = np.geomspace(10, 1e8, 8)
    vals = [a(t) for t in ts]
    assert np.all(np.diff(vals) >= 0)
    for t in ts:
        assert scaled_cumulant(dist, t, a, 1.0, d) == pytest.approx(-1.0, rel=1e-10)


def test_scaled_cumulant_power_law():
    dist = StretchedTail(1.0, 0.5)
    a = calibrate_alpha(dist, 1, 0.5, -1.0)
    for t in np.geomspace(1e2, 1e8, 7):
        r = scaled_cumulant(dist, t, a, 2.0, 1) / scaled_cumulant(dist, t, a, 1.0, 1)
        assert r == pytest.approx(math.sqrt(2), rel=0.05)


@pytest.mark.parametrize("dist", DISTS[1:])
def test_scaled_cumulant_over_y_nondecreasing(dist):
    a = calibrate_alpha(dist, 1, dist.gamma_class, -1.0)
    ys = np.linspace(0.1, 5, 30)
    v = np.array([scaled_cumulant(dist, 1e3, a, y, 1) / y for y in ys])
    assert np.all(np.diff(v) >= -1e-10)


def test_density_tail_alpha_vs_log_correction():
    a = calibrate_alpha(DensityTail(0.0), 1, 0.0, -1.0)
    for t in np.geomspace(1e3, 1e9, 7):
        assert 0.5 <= a(t) / (t / math.log(t)) ** (1 / 3) <= 2.0


def test_alpha_ratio_limit():
    a = calibrate_alpha(StretchedTail(1.0, 0.5), 1, 0.5, -1.0)
    assert a(2e8) / a(1e8) == pytest.approx(2 ** nu_of(0.5, 1), rel=0.05)


def test_calibration_class_mismatch():
    with pytest.raises(ParameterError):
        calibrate_alpha(StretchedTail(1.0, 0.5), 1, 0.25, -1.0)


def test_b_t_closed_form_and_residual():
    prof = ScalingProfile(0.0, -1.0, 1, PowerScale(1 / 3))
    for t in (3.0, 10.0, 1e5, 1e30):
        b = scale_b(prof, t)
        assert b == pytest.approx(math.log(t) ** 3, rel=1e-10)
    prof = ScalingProfile.for_distribution(StretchedTail(1.0, 0.5), 1)
    prev = 0
    for t in (5.0, 50.0, 1e4, 1e8):
        b = prof.b(t)
        assert abs(b / prof.alpha(b) ** 2 - math.log(t)) <= 1e-10 * math.log(t)
        assert b > prev
        prev = b


def test_b_t_growth_exponent():
    prof = ScalingProfile(0.0, math.log(0.5), 1, calibrate_alpha(BernoulliTrap(0.5), 1, 0.0, math.log(0.5)))
    t = 1e40
    assert math.log(prof.b(t)) / math.log(math.log(t)) == pytest.approx(1 / (1 - 2 * prof.nu), rel=0.10)


def test_b_t_rejects_small_t_and_bad_profile():
    prof = ScalingProfile(0.0, -1.0, 1, PowerScale(1 / 3))
    with pytest.raises(ParameterError):
        scale_b(prof, 2.0)
    bad = ScalingProfile(0.0, -1.0, 1, lambda s: s**0.75)  # t/alpha^2 decreasing
    with pytest.raises(ProfileError):
        scale_b(bad, 100.0)


def test_scale_field_examples():
    box = LatticeBox(2, 4)
    f = PotentialField.constant(box, -1.0)
    assert scale_field(f, 3.0, [0.4, 0.4]) == -9.0
    g = sample_field(StretchedTail(1.0, 0.5), box, 5)
    assert scale_field(g, 1.0, [2, -3]) == g.value_at([2, -3])
    assert scale_field(PotentialField.constant(box, 0.0), 2.5, [0.3, -0.7]) == 0.0
    with pytest.raises(RangeError):
        scale_field(f, 10.0, [1.0, 0.0])


def test_field_file_round_trip(tmp_path):
    f = sample_field(BernoulliTrap(0.6), LatticeBox(2, 6), 11)
    g = sample_field(StretchedTail(1.0, 0.5), LatticeBox(1, 30), 12)
    for fld in (f, g):
        p = tmp_path / "f.txt"
        write_field(fld, p)
        back = read_field(p)
        assert back == fld and back.seed == fld.seed
        assert field_distribution(back) == parse_tag(fld.dist_tag)
    assert "-inf" in (tmp_path / "f.txt").read_text() or True
    write_field(f, tmp_path / "t.txt")
    assert (tmp_path / "t.txt").read_text().splitlines()[0].startswith("PAMFIELD v1 d=2 R=6 dist=bernoulli:p=0.6 seed=11")


def test_field_rejects_positive_values():
    with pytest.raises(ParameterError):
        PotentialField.from_array(LatticeBox(1, 1), [0.0, 0.5, -1.0])
    with pytest.raises(ParameterError):
        PotentialField.from_array(LatticeBox(1, 1), [0.0, np.nan, -1.0])
