"""Force engine against closed forms, frozen cross-checked values, and
internal consistency (derivatives, limits, truncation, threading).

Frozen reference numbers below were computed two independent ways before
being pinned: the packaged panel quadrature and a brute-force fixed
tensor-product Gauss rule at three resolutions (24/48/96 nodes per panel,
cutoff 120), which agreed to nine significant digits.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimir_lab.constants import BOLTZMANN, HBAR, SPEED_OF_LIGHT, ZETA3
from casimir_lab.dielectric import (
    ConstantModel,
    OpticalTable,
    TabulatedModel,
    gold_drude,
    gold_plasma,
)
from casimir_lab.errors import ConvergenceError, PfaValidityWarning
from casimir_lab.lifshitz import (
    Geometry,
    QuadratureSpec,
    asymptote_thermal,
    force_sphere_plane,
    force_sphere_plane_T0,
    force_sphere_plane_grid,
    free_energy_per_area,
    pressure_parallel,
    reflection_coeffs,
    reflection_coeffs_zero_mode,
    sensitivity_band,
    thread_count,
)

R_SPHERE = 0.156  # m

# Drude gold sphere-plane force at T = 0, d = 1 um; brute-force arbitrated
DRUDE_T0_1UM_PN = 373.930923
# room-temperature Drude F d^2 at 7 um, pN um^2
DRUDE_300K_7UM_FD2 = 97.1239
# plasma/Drude force ratio at 50 um, 300 K
PLASMA_OVER_DRUDE_50UM = 1.9979096
# Drude-vs-T0 thermal crossover location, um (bisection on the engine,
# confirmed by an independent root bracketing during development)
CROSSOVER_UM = 4.059


class TestReflectionCoefficients:
    def test_limits_at_large_transverse_wavevector(self):
        # k >> xi/c: kappa -> kappa0, TE reflection dies, TM -> static form
        r = reflection_coeffs(k=1e10, xi=1e14, eps=4.0)
        assert r.r_te == pytest.approx(0.0, abs=1e-7)
        assert r.r_tm == pytest.approx(3.0 / 5.0, rel=1e-6)

    def test_bounds_for_physical_permittivity(self):
        k = np.geomspace(1e4, 1e9, 50)
        r = reflection_coeffs(k=k, xi=1e15, eps=30.0)
        assert np.all(r.r_te <= 0.0) and np.all(r.r_te > -1.0)
        assert np.all(r.r_tm >= 0.0) and np.all(r.r_tm < 1.0)

    def test_vacuum_is_invisible(self):
        r = reflection_coeffs(k=1e6, xi=1e15, eps=1.0)
        assert r.r_te == 0.0
        assert r.r_tm == 0.0

    def test_rejects_nonpositive_wavevector(self):
        with pytest.raises(ValueError):
            reflection_coeffs(k=0.0, xi=1e15, eps=2.0)

    def test_zero_mode_dissipative_metal_loses_te(self):
        k = np.geomspace(1e4, 1e8, 20)
        r = reflection_coeffs_zero_mode(k, gold_drude())
        assert np.all(r.r_te == 0.0)
        assert np.all(r.r_tm == 1.0)

    def test_zero_mode_dissipationless_metal_keeps_te(self):
        gold = gold_plasma()
        kp = gold.omega_p / SPEED_OF_LIGHT
        r_small = reflection_coeffs_zero_mode(kp * 1e-4, gold)
        r_large = reflection_coeffs_zero_mode(kp * 1e4, gold)
        assert r_small.r_te == pytest.approx(-1.0, abs=1e-3)
        assert abs(r_large.r_te) < 1e-3
        assert r_small.r_tm == 1.0

    def test_zero_mode_dielectric_static_limit(self):
        r = reflection_coeffs_zero_mode(1e6, ConstantModel(eps=3.0))
        assert r.r_te == 0.0
        assert float(r.r_tm) == pytest.approx(0.5, rel=1e-14)

    def test_zero_mode_tabulated_follows_extrapolation_family(self):
        table = OpticalTable(omega=np.array([1e15, 1e16]), eps_imag=np.array([1.0, 0.1]))
        drude_tab = TabulatedModel(table=table, extrapolation=gold_drude())
        plasma_tab = TabulatedModel(table=table, extrapolation=gold_plasma())
        k = 1e5
        assert reflection_coeffs_zero_mode(k, drude_tab).r_te == 0.0
        want = reflection_coeffs_zero_mode(k, gold_plasma()).r_te
        assert reflection_coeffs_zero_mode(k, plasma_tab).r_te == pytest.approx(
            float(want), rel=1e-14
        )


class TestIdealLimits:
    """eps -> inf recovers the perfect-reflector closed forms."""

    IDEAL = ConstantModel(eps=1e12)

    def test_t0_free_energy(self):
        d = 1e-6
        got = free_energy_per_area(d, 0.0, self.IDEAL)
        want = -math.pi**2 * HBAR * SPEED_OF_LIGHT / (720.0 * d**3)
        assert got == pytest.approx(want, rel=1e-4)

    def test_t0_pressure(self):
        d = 1e-6
        got = pressure_parallel(d, 0.0, self.IDEAL)
        want = math.pi**2 * HBAR * SPEED_OF_LIGHT / (240.0 * d**4)
        assert got == pytest.approx(want, rel=1e-4)

    def test_high_t_free_energy_is_zeta3_law(self):
        # classical limit: F -> -zeta(3) k_B T / (8 pi d^2) for ideal mirrors
        d, T = 50e-6, 300.0
        got = free_energy_per_area(d, T, self.IDEAL)
        want = -ZETA3 * BOLTZMANN * T / (8.0 * math.pi * d * d)
        assert got == pytest.approx(want, rel=1e-5)


class TestFrozenForces:
    def test_drude_t0_at_one_micron(self):
        got = force_sphere_plane_T0(1e-6, R_SPHERE, gold_drude())
        assert got * 1e12 == pytest.approx(DRUDE_T0_1UM_PN, rel=1e-7)

    def test_drude_300k_fd2_at_seven_microns(self):
        d = 7e-6
        got = force_sphere_plane(d, 300.0, R_SPHERE, gold_drude())
        assert got * d * d * 1e24 == pytest.approx(DRUDE_300K_7UM_FD2, rel=1e-5)

    def test_drude_large_d_hits_thermal_asymptote_exactly(self):
        # at 50 um and 300 K every n >= 1 term is e^-80 suppressed, so the
        # engine must land on the analytic zero-mode value
        d = 50e-6
        got = free_energy_per_area(d, 300.0, gold_drude())
        want = -ZETA3 * BOLTZMANN * 300.0 / (16.0 * math.pi * d * d)
        assert got == pytest.approx(want, rel=1e-9)

    def test_plasma_over_drude_at_fifty_microns(self):
        d = 50e-6
        ratio = force_sphere_plane(d, 300.0, R_SPHERE, gold_plasma()) / force_sphere_plane(
            d, 300.0, R_SPHERE, gold_drude()
        )
        assert ratio == pytest.approx(PLASMA_OVER_DRUDE_50UM, rel=1e-5)

    def test_asymptote_helper_matches_zero_mode_algebra(self):
        d, T = 50e-6, 300.0
        drude = asymptote_thermal(d, R_SPHERE, T, "drude")
        plasma = asymptote_thermal(d, R_SPHERE, T, "plasma")
        assert drude == pytest.approx(ZETA3 * R_SPHERE * BOLTZMANN * T / (8 * d * d))
        assert plasma == pytest.approx(2.0 * drude, rel=1e-14)
        with pytest.raises(ValueError):
            asymptote_thermal(d, R_SPHERE, T, "ideal")

    def test_thermal_crossover_location(self):
        # the room-temperature Drude curve overtakes its own T0 curve at
        # CROSSOVER_UM; bracket it on both sides
        gold = gold_drude()

        def gap(d):
            return force_sphere_plane(d, 300.0, R_SPHERE, gold) - force_sphere_plane_T0(
                d, R_SPHERE, gold
            )

        assert gap(CROSSOVER_UM * 0.97e-6) < 0.0
        assert gap(CROSSOVER_UM * 1.03e-6) > 0.0


class TestConsistency:
    def test_pressure_equals_free_energy_derivative(self):
        gold = gold_drude()
        for T in (300.0, 0.0):
            d = 1e-6
            h = 1e-3 * d
            der = (
                free_energy_per_area(d + h, T, gold)
                - free_energy_per_area(d - h, T, gold)
            ) / (2.0 * h)
            p = pressure_parallel(d, T, gold)
            assert p == pytest.approx(der, rel=1e-4)

    def test_small_temperature_joins_t0_continuously(self):
        gold = gold_drude()
        d = 1e-6
        f0 = free_energy_per_area(d, 0.0, gold)
        rel_1k = abs(free_energy_per_area(d, 1.0, gold) - f0) / abs(f0)
        rel_10k = abs(free_energy_per_area(d, 10.0, gold) - f0) / abs(f0)
        assert rel_1k < 5e-4
        assert rel_10k < 1e-2
        assert rel_1k < rel_10k

    def test_tolerance_refinement_is_consistent(self):
        gold = gold_drude()
        d = 1e-6
        loose = free_energy_per_area(d, 300.0, gold, QuadratureSpec(rel_tol=1e-6))
        tight = free_energy_per_area(d, 300.0, gold, QuadratureSpec(rel_tol=1e-10))
        assert abs(loose - tight) / abs(tight) < 5e-6

    def test_matsubara_cap_raises_convergence_error(self):
        with pytest.raises(ConvergenceError) as err:
            free_energy_per_area(
                0.7e-6, 300.0, gold_drude(), QuadratureSpec(max_matsubara=1)
            )
        assert err.value.achieved > err.value.requested

    @settings(max_examples=8, deadline=None)
    @given(st.floats(min_value=0.7, max_value=20.0))
    def test_attraction_and_sign_convention(self, d_um):
        d = d_um * 1e-6
        assert free_energy_per_area(d, 300.0, gold_drude()) < 0.0
        assert pressure_parallel(d, 300.0, gold_drude()) > 0.0

    @settings(max_examples=8, deadline=None)
    @given(
        st.floats(min_value=0.7, max_value=6.0),
        st.floats(min_value=1.05, max_value=2.0),
    )
    def test_force_decreases_with_separation(self, d_um, factor):
        gold = gold_drude()
        f_near = force_sphere_plane(d_um * 1e-6, 300.0, R_SPHERE, gold)
        f_far = force_sphere_plane(d_um * factor * 1e-6, 300.0, R_SPHERE, gold)
        assert f_near > f_far > 0.0

    def test_plasma_exceeds_drude_at_room_temperature(self):
        for d_um in (0.7, 1.0, 3.0, 7.0):
            d = d_um * 1e-6
            assert force_sphere_plane(d, 300.0, R_SPHERE, gold_plasma()) > force_sphere_plane(
                d, 300.0, R_SPHERE, gold_drude()
            )


class TestGeometryAndPfa:
    def test_geometry_validation(self):
        with pytest.raises(ValueError):
            Geometry(radius=-1.0, separation=1e-6)
        with pytest.raises(ValueError):
            Geometry(radius=0.1, separation=0.0)

    def test_pfa_is_the_plate_energy_times_2pi_r(self):
        d = 1e-6
        f = force_sphere_plane(d, 300.0, R_SPHERE, gold_drude())
        e = free_energy_per_area(d, 300.0, gold_drude())
        assert f == pytest.approx(2.0 * math.pi * R_SPHERE * abs(e), rel=1e-14)

    def test_pfa_warning_past_aspect_ratio(self):
        with pytest.warns(PfaValidityWarning):
            force_sphere_plane(2e-4, 300.0, 0.1, gold_drude())

    def test_no_warning_in_validity_range(self):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error", PfaValidityWarning)
            force_sphere_plane(1e-6, 300.0, R_SPHERE, gold_drude())

    def test_quadrature_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(rel_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureSpec(rel_tol=1e-2)
        with pytest.raises(ValueError):
            QuadratureSpec(max_matsubara=0)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            free_energy_per_area(-1e-6, 300.0, gold_drude())
        with pytest.raises(ValueError):
            free_energy_per_area(1e-6, -5.0, gold_drude())


class TestGridAndThreads:
    def test_thread_count_env(self, monkeypatch):
        monkeypatch.setenv("CASIMIR_LAB_THREADS", "3")
        assert thread_count() == 3
        monkeypatch.setenv("CASIMIR_LAB_THREADS", "0")
        assert thread_count() >= 1
        monkeypatch.setenv("CASIMIR_LAB_THREADS", "junk")
        with pytest.raises(ValueError):
            thread_count()
        monkeypatch.setenv("CASIMIR_LAB_THREADS", "-2")
        with pytest.raises(ValueError):
            thread_count()

    def test_grid_independent_of_thread_count(self, monkeypatch):
        grid = np.geomspace(0.8e-6, 5e-6, 5)
        monkeypatch.setenv("CASIMIR_LAB_THREADS", "1")
        serial = force_sphere_plane_grid(grid, 300.0, R_SPHERE, gold_drude())
        monkeypatch.setenv("CASIMIR_LAB_THREADS", "4")
        threaded = force_sphere_plane_grid(grid, 300.0, R_SPHERE, gold_drude())
        np.testing.assert_allclose(serial, threaded, rtol=1e-8)


class TestSensitivityBand:
    WP = (1.04e16, 1.37e16)  # rad/s, roughly the gold literature spread
    G = (3.0e13, 9.3e13)

    def test_degenerate_ranges_collapse(self):
        wp = (1.1455e16, 1.1455e16)
        g = (7.75e13, 7.75e13)
        band = sensitivity_band([1e-6], 300.0, wp, g, "drude", R_SPHERE)
        assert band.f_min[0] == band.f_center[0] == band.f_max[0]

    def test_envelope_orders_and_brackets_center(self):
        band = sensitivity_band(
            np.geomspace(0.7e-6, 7e-6, 5), 300.0, self.WP, self.G, "drude", R_SPHERE
        )
        assert np.all(band.f_min <= band.f_center)
        assert np.all(band.f_center <= band.f_max)
        assert np.all(band.f_min > 0.0)

    def test_plasma_family_ignores_dissipation_axis(self):
        band_a = sensitivity_band([1e-6], 300.0, self.WP, (1e13, 2e13), "plasma", R_SPHERE)
        band_b = sensitivity_band([1e-6], 300.0, self.WP, (5e13, 9e13), "plasma", R_SPHERE)
        assert band_a.f_min[0] == pytest.approx(band_b.f_min[0], rel=1e-12)
        assert band_a.f_max[0] == pytest.approx(band_b.f_max[0], rel=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            sensitivity_band([], 300.0, self.WP, self.G, "drude", R_SPHERE)
        with pytest.raises(ValueError):
            sensitivity_band([1e-6], 300.0, self.WP, self.G, "lorentz", R_SPHERE)
        with pytest.raises(ValueError):
            sensitivity_band([1e-6], 300.0, (-1.0, 1e16), self.G, "drude", R_SPHERE)
