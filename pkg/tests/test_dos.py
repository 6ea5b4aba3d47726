import math

import numpy as np
import pytest
from scipy.integrate import quad

from esqpt_lab.dos import (
    ForbiddenEnergy,
    classify_regime,
    dos,
    dos_bin_average,
    dos_curve,
    dos_derivative,
    dos_dicke,
    dos_monte_carlo,
    dos_tc,
    epsilon_saddle_floor,
    mc_disc_radius,
    phi_admissible_fraction,
    singularity_markers,
    spin_turning_points,
)
from esqpt_lab.landscape import energy_surface, ground_energy
from esqpt_lab.params import ModelParams, critical_coupling

TC_2GC = ModelParams(gamma=2.0, j2=20, delta=0)      # x = 1/4
DK_2GC = ModelParams(gamma=1.0, j2=20, delta=1)      # x = 1/4
DK_GC = ModelParams(gamma=0.5, j2=20, delta=1)


# --------------------------------------------------------------------------
# frozen values (independently derived closed forms)
# --------------------------------------------------------------------------

def test_tc_density_frozen_value():
    # x = 1/4, shell floor -17/8: nu(0) = (3 + sqrt(17)) / 8
    assert dos_tc(0.0, TC_2GC) == pytest.approx((3 + math.sqrt(17)) / 8,
                                                abs=1e-14)


def test_dicke_density_frozen_value_at_saddle():
    # x = 1/4 saddle point: nu(-1) = 2/3 - sqrt(3)/(2 pi)
    expected = 2.0 / 3.0 - math.sqrt(3.0) / (2.0 * math.pi)
    assert dos_dicke(-1.0, DK_2GC) == pytest.approx(expected, abs=1e-9)


def test_turning_points_frozen_values():
    assert spin_turning_points(-1.0, TC_2GC) == pytest.approx((-1.0, 0.5))
    assert spin_turning_points(-1.0, DK_2GC) == pytest.approx((-1.0, 0.5))


def test_dicke_weak_coupling_tends_to_static_density():
    # gamma -> 0 leaves the bare ladder density (eps + 1)/2; the coupling
    # correction enters at order gamma^2 and is strictly positive
    p = ModelParams(gamma=1e-3, j2=10, delta=1)
    for eps in (-0.9, -0.3, 0.4, 0.99):
        v = dos_dicke(eps, p)
        assert v >= (eps + 1) / 2 - 1e-12
        assert v == pytest.approx((eps + 1) / 2, abs=1e-6)


# --------------------------------------------------------------------------
# geometry cross-checks (independent routes)
# --------------------------------------------------------------------------

def test_turning_points_lie_on_the_surface():
    for p in (TC_2GC, DK_2GC, ModelParams(gamma=1.3, j2=10, delta=1)):
        for eps in (-1.4, -1.0, -0.2, 0.7):
            if eps < epsilon_saddle_floor(p):
                continue
            y_lo, y_hi = spin_turning_points(eps, p)
            # both roots satisfy eps_surface(y, phi=0) = eps, even the
            # unphysical |y| > 1 continuations
            for y in (y_lo, y_hi):
                assert energy_surface(y * p.j, 0.0, p) == pytest.approx(
                    eps, abs=1e-10)


def test_tc_density_equals_clipped_root_separation():
    """Closed form vs np.roots of the turning-point quadratic."""
    for gamma in (0.5, 1.0, 1.7, 2.9):
        p = ModelParams(gamma=gamma, j2=8, delta=0)
        x = (critical_coupling(p) / gamma) ** 2
        lo = ground_energy(p) + 1e-9
        for eps in np.linspace(lo, 0.999, 41):
            roots = np.roots([1.0, 2.0 * x, -(2.0 * x * eps + 1.0)])
            width = np.clip(roots.max(), -1, 1) - np.clip(roots.min(), -1, 1)
            assert dos_tc(float(eps), p) == pytest.approx(width / 2,
                                                          abs=1e-10)


def test_dicke_quadrature_against_generic_integrator():
    """The custom quadrature vs scipy.quad of the azimuth fraction.

    nu(eps) is half the y-integral of the admissible-azimuth fraction
    over the reachable band; the fraction is identically 1 below y = eps
    and 0 outside the turning points, so integrating it with a generic
    adaptive rule is a fully independent route.
    """
    cases = [(DK_2GC, -1.3), (DK_2GC, -0.4), (DK_2GC, 0.6),
             (DK_GC, -0.2), (ModelParams(gamma=0.8, j2=10, delta=1), 0.3)]
    for p, eps in cases:
        y_lo, y_hi = spin_turning_points(eps, p)
        a, b = max(y_lo, -1.0), min(y_hi, 1.0)
        kink = [eps] if a < eps < b else None
        ref, err = quad(lambda y: phi_admissible_fraction(y, eps, p),
                        a, b, points=kink, limit=300)
        assert err < 1e-7
        assert dos_dicke(eps, p) == pytest.approx(0.5 * ref, abs=2e-8)


def test_phi_fraction_boundaries():
    p = DK_2GC
    assert phi_admissible_fraction(-0.5, -0.2, p) == 1.0   # y <= eps
    y_lo, y_hi = spin_turning_points(-0.2, p)
    assert phi_admissible_fraction(min(y_hi + 0.05, 1.0), -0.2, p) == 0.0
    with pytest.raises(ValueError):
        phi_admissible_fraction(1.5, 0.0, p)


def test_phi_fraction_saddle_corner_limit():
    # approaching the south pole along the eps = -1 shell, the admissible
    # arc tends to 2/3 of the circle at gamma = 2 gamma_c
    assert phi_admissible_fraction(-1.0 + 1e-9, -1.0, DK_2GC) == pytest.approx(
        2.0 / 3.0, abs=1e-6)


def test_phi_fraction_against_brute_force_count():
    p = ModelParams(gamma=0.9, j2=10, delta=1)
    phis = (2 * math.pi) * (np.arange(200000) + 0.5) / 200000
    for y, eps in ((0.3, -0.1), (-0.2, -0.6), (0.8, 0.2)):
        admissible = energy_surface(y * p.j, phis, p) <= eps
        frac = admissible.mean()
        assert phi_admissible_fraction(y, eps, p) == pytest.approx(
            frac, abs=1e-4)


# --------------------------------------------------------------------------
# regime structure and properties on a parameter grid
# --------------------------------------------------------------------------

GRID_PARAMS = [
    ModelParams(gamma=0.4, j2=10, delta=0),
    ModelParams(gamma=1.0, j2=10, delta=0),
    ModelParams(gamma=2.0, j2=10, delta=0),
    ModelParams(gamma=0.5, j2=10, delta=1),
    ModelParams(gamma=1.0, j2=10, delta=1),
    ModelParams(gamma=0.505, j2=10, delta=1),   # barely superradiant
]


@pytest.mark.parametrize("p", GRID_PARAMS, ids=lambda p: f"{p.model_name}-g{p.gamma}")
def test_density_range_and_monotonicity(p):
    lo = ground_energy(p)
    eps = np.linspace(lo + 1e-7, 1.6, 400)
    vals = np.array([dos(float(e), p) for e in eps])
    assert np.all(vals >= 0.0)
    assert np.all(vals <= 1.0 + 1e-12)
    assert np.all(np.diff(vals) >= -1e-9)
    assert np.all(vals[eps > 1.0] == 1.0)


@pytest.mark.parametrize("p", GRID_PARAMS, ids=lambda p: f"{p.model_name}-g{p.gamma}")
def test_density_continuity_at_kinks(p):
    """The density itself is continuous across both kinks.

    Its slope log-diverges at eps = -1, and barely-superradiant
    couplings make the prefactor large, so the step has to be small
    enough that h * slope(h) stays well under the tolerance.
    """
    kinks = [1.0]
    if p.gamma > critical_coupling(p):
        kinks.append(-1.0)
    h = 1e-10
    for kink in kinks:
        lo = dos(kink - h, p)
        hi = dos(kink + h, p)
        assert abs(hi - lo) < 1e-7


def test_density_vanishes_at_the_shell_floor():
    for p in (TC_2GC, DK_2GC):
        floor = epsilon_saddle_floor(p)
        assert dos(floor, p) == pytest.approx(0.0, abs=1e-10)
        assert dos(floor + 1e-12, p) < 1e-5


def test_forbidden_energy_raises():
    for p in (TC_2GC, DK_2GC):
        with pytest.raises(ForbiddenEnergy):
            dos(epsilon_saddle_floor(p) - 1e-6, p)
    normal = ModelParams(gamma=0.4, j2=10, delta=0)
    with pytest.raises(ForbiddenEnergy):
        dos_tc(-1.0 - 1e-6, normal)


def test_regime_classification():
    p = DK_2GC   # floor -17/8
    assert classify_regime(-3.0, p) == "forbidden"
    assert classify_regime(-2.0, p) == "below_saddle"
    assert classify_regime(-0.5, p) == "middle"
    assert classify_regime(1.0, p) == "middle"
    assert classify_regime(1.2, p) == "saturated"
    normal = ModelParams(gamma=0.3, j2=10, delta=1)
    assert classify_regime(-1.001, normal) == "forbidden"
    assert classify_regime(-0.999, normal) == "middle"


def test_quadrature_edge_stress():
    """Evaluations within 1e-6 .. 1e-12 of every kink stay finite and
    inside [0, 1]; the arccos argument guard would raise otherwise."""
    for p in (DK_2GC, ModelParams(gamma=0.505, j2=10, delta=1),
              ModelParams(gamma=2.5, j2=10, delta=1)):
        floor = epsilon_saddle_floor(p)
        anchors = [floor, -1.0, 1.0]
        for anchor in anchors:
            for k in range(6, 13):
                for sign in (-1.0, 1.0):
                    eps = anchor + sign * 10.0 ** -k
                    if eps < floor:
                        continue
                    v = dos_dicke(eps, p)
                    assert 0.0 <= v <= 1.0 + 1e-12


# --------------------------------------------------------------------------
# derivative
# --------------------------------------------------------------------------

def test_tc_derivative_matches_finite_difference():
    p = TC_2GC
    for eps in (-1.8, -0.5, 0.3):
        slope, flagged = dos_derivative(eps, p)
        h = 1e-6
        fd = (dos_tc(eps + h, p) - dos_tc(eps - h, p)) / (2 * h)
        assert slope == pytest.approx(fd, rel=1e-6)
        assert not flagged


def test_tc_derivative_jump_frozen_values():
    slope_lo, _ = dos_derivative(-1.0 - 1e-9, TC_2GC)
    slope_hi, _ = dos_derivative(-1.0 + 1e-9, TC_2GC)
    assert slope_lo == pytest.approx(1.0 / 3.0, abs=1e-6)
    assert slope_hi == pytest.approx(1.0 / 6.0, abs=1e-6)


def test_derivative_at_kinks_is_nan_and_flagged():
    for p in (TC_2GC, DK_2GC):
        for eps in (-1.0, 1.0):
            slope, flagged = dos_derivative(eps, p)
            assert math.isnan(slope) and flagged


def test_derivative_saturated_and_forbidden_are_zero():
    for p in (TC_2GC, DK_2GC):
        assert dos_derivative(1.5, p)[0] == 0.0
        assert dos_derivative(epsilon_saddle_floor(p) - 1.0, p)[0] == 0.0


def test_dicke_derivative_grows_toward_the_saddle():
    vals = [dos_derivative(-1.0 + 10.0 ** -k, DK_2GC,
                           h=10.0 ** -k / 8)[0] for k in (2, 3, 4, 5)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_singularity_markers_by_model():
    tc = singularity_markers(TC_2GC)
    assert [(m.epsilon, m.kind) for m in tc] == [
        (-1.0, "derivative_jump"), (1.0, "saturation_kink")]
    dk = singularity_markers(DK_2GC)
    assert dk[0].kind == "derivative_log_divergence"
    normal = singularity_markers(DK_GC)
    assert normal[0].kind == "derivative_jump"


def test_dos_curve_zeroes_forbidden_samples():
    p = TC_2GC
    eps = np.array([-3.0, -1.5, 0.0, 2.0])
    curve = dos_curve(p, eps)
    assert curve.regime == ["forbidden", "below_saddle", "middle", "saturated"]
    assert curve.nu_scaled[0] == 0.0 and curve.nu_prime_scaled[0] == 0.0
    assert curve.nu_scaled[-1] == 1.0
    with pytest.raises(ValueError):
        dos_curve(p, np.empty(0))


# --------------------------------------------------------------------------
# bin averages and the Monte-Carlo estimator
# --------------------------------------------------------------------------

def test_bin_average_plain_interval():
    p = DK_2GC
    ref, _ = quad(lambda e: dos_dicke(e, p), -0.6, -0.2, limit=100)
    assert dos_bin_average(p, -0.6, -0.2) == pytest.approx(ref / 0.4,
                                                           abs=1e-9)


def test_bin_average_across_floor_counts_forbidden_as_zero():
    p = TC_2GC
    floor = epsilon_saddle_floor(p)
    ref, _ = quad(lambda e: dos_tc(e, p), floor, floor + 0.2,
                  points=[floor], limit=200)
    got = dos_bin_average(p, floor - 0.2, floor + 0.2)
    assert got == pytest.approx(ref / 0.4, abs=1e-8)


def test_mc_agrees_with_quadrature_within_three_sigma():
    p = DK_2GC
    edges = np.linspace(ground_energy(p) + 0.05, 1.4, 13)
    est = dos_monte_carlo(p, edges, n_samples=200_000, seed=11)
    for k in range(len(edges) - 1):
        truth = dos_bin_average(p, float(edges[k]), float(edges[k + 1]))
        pull = abs(est.nu[k] - truth) / est.std_err[k]
        assert pull < 3.5, f"bin {k}: pull {pull:.2f}"


def test_mc_is_a_pure_function_of_seed():
    p = TC_2GC
    edges = np.linspace(-2.0, 1.2, 9)
    a = dos_monte_carlo(p, edges, n_samples=300_000, seed=5)
    b = dos_monte_carlo(p, edges, n_samples=300_000, seed=5)
    c = dos_monte_carlo(p, edges, n_samples=300_000, seed=5, threads=3)
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.counts, c.counts)
    d = dos_monte_carlo(p, edges, n_samples=300_000, seed=6)
    assert not np.array_equal(a.counts, d.counts)


def test_mc_input_validation():
    p = TC_2GC
    with pytest.raises(ValueError):
        dos_monte_carlo(p, [0.0, -1.0], n_samples=10)
    with pytest.raises(ValueError):
        dos_monte_carlo(p, [0.0, 1.0], n_samples=0)
    with pytest.raises(ValueError):
        dos_monte_carlo(p, [0.0, 1.0], n_samples=10, disc_radius=0.1)


def test_mc_disc_radius_covers_the_shell():
    """Everything outside the disc must lie above eps_max, i.e. the
    lowest energy reachable anywhere on the disc rim (coupling term at
    its most negative) still clears eps_max."""
    eps_max = 1.0
    for p in (DK_2GC, TC_2GC, ModelParams(omega=2.0, omega0=0.7,
                                          gamma=1.1, j2=10, delta=1)):
        r = mc_disc_radius(p, eps_max)
        y = np.linspace(-1.0, 1.0, 20001)
        s = np.sqrt(1.0 - y * y)
        rim_floor = (y + 0.5 * p.omega / p.omega0 * r * r
                     - (1 + p.delta) * p.gamma / p.omega0 * s * r)
        assert rim_floor.min() >= eps_max - 1e-9
        assert mc_disc_radius(p, 2.0) > r
