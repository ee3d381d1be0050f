import math

import numpy as np
import pytest

from hypiss import core, models
from hypiss.lambertw import lambert_w_minus1


class TestLinearBenchmark:
    def test_structure(self):
        sc = models.build_linear_benchmark(J=64, cfl=0.75, T=10.0, mu=0.575,
                                           xi=0.125, kappa12=0.5, kappa21=0.5)
        c = sc.coefficients
        assert c.k == 2 and c.m == 1
        assert np.all(c.lam[:, 0] == 1.0) and np.all(c.lam[:, 1] == -1.0)
        assert np.all(c.K == np.array([[0.0, 0.5], [0.5, 0.0]]))
        assert np.all(c.M == 1.0)
        assert np.all(sc.initial == np.tile([-0.5, 0.5], (64, 1)))

    def test_disturbance_profile(self):
        sc = models.build_linear_benchmark(J=16, cfl=1.0, T=10.0, mu=0.5,
                                           xi=0.125, kappa12=0.5, kappa21=0.5)
        d = sc.coefficients.b
        assert d(0.0) == pytest.approx([0.0, 0.0])
        assert d(4.5)[0] == pytest.approx(0.01, abs=1e-16)
        assert d(4.5)[1] == pytest.approx(-0.01, abs=1e-16)
        assert np.all(d(5.0) == 0.0)

    def test_rejects_bad_speeds(self):
        with pytest.raises(ValueError):
            models.build_linear_benchmark(J=16, cfl=1.0, T=1.0, mu=0.5, xi=0.125,
                                          kappa12=0.0, kappa21=0.0,
                                          speeds=(1.0, 2.0))


class TestSaintVenant:
    def test_characteristic_speeds(self):
        sc = models.saint_venant_scenario(J=32)
        assert sc.coefficients.lam[0, 0] == pytest.approx(7.4294, abs=5e-5)
        assert sc.coefficients.lam[0, 1] == pytest.approx(-1.4294, abs=5e-5)
        # constant equilibrium: lam1 - lam2 = 2 sqrt(g H*)
        diff = sc.coefficients.lam[:, 0] - sc.coefficients.lam[:, 1]
        assert np.allclose(diff, 2 * math.sqrt(9.81 * 2.0), rtol=1e-14)

    def test_initial_transform_values(self):
        sc = models.saint_venant_scenario(J=200)
        xs = sc.grid.centers[1:-1]
        w1 = sc.initial[:, 0]
        w2 = sc.initial[:, 1]
        assert np.allclose(w1, -1.8926 + 4 * np.sin(np.pi * xs), atol=5e-5)
        assert np.allclose(w2, -4.1074 + 4 * np.sin(np.pi * xs), atol=5e-5)

    def test_transform_round_trip(self):
        params = models.SaintVenantParams()
        to_w, from_w = models.saint_venant_transform(params)
        rng = np.random.default_rng(21)
        for _ in range(100):
            x = rng.uniform(0, 1)
            H = rng.uniform(0.5, 5.0)
            V = rng.uniform(-2.0, 6.0)
            w1, w2 = to_w(x, H, V)
            H2, V2 = from_w(x, w1, w2)
            assert H2 == pytest.approx(H, abs=1e-12)
            assert V2 == pytest.approx(V, abs=1e-12)

    def test_physical_gain_map(self):
        params = models.SaintVenantParams(k0=1.5, kl=2.0)
        k12, k21 = models.saint_venant_kappa(params, l=1.0)
        s0 = 1.5 * math.sqrt(2.0 / 9.81)
        sl = 2.0 * math.sqrt(2.0 / 9.81)
        assert k12 == pytest.approx((s0 - 1) / (1 + s0), rel=1e-14)
        assert k21 == pytest.approx((sl - 1) / (1 + sl), rel=1e-14)
        coeffs, _ = models.linearize_saint_venant(
            params, core.build_grid(1.0, 16, 1.0, 0.75, 7.5))
        assert coeffs.K[0, 1] == pytest.approx(k12)
        assert coeffs.M[0] == pytest.approx(1 - k12)
        assert coeffs.M[1] == pytest.approx(1 - k21)

    def test_override_disagreement_is_flagged(self):
        sc = models.saint_venant_scenario(J=16)
        assert any("override" in note for note in sc.notes)
        # without override the formula values are used untouched
        grid = core.build_grid(1.0, 16, 1.0, 0.75, 7.5)
        coeffs, notes = models.linearize_saint_venant(models.SaintVenantParams(),
                                                      grid, kappa=(0.5, 0.5))
        assert notes == []
        x0 = grid.centers[1]
        g, H, V = 9.81, 2.0, 3.0
        lam1 = V + math.sqrt(g * H)
        imbalance = (0.0459 * H - 0.1 * V * V) * g / H
        fric = g * 0.1 * V * V / (2 * H)
        expected_g11 = 0.75 * imbalance / lam1 + fric * (2 / V - 1 / math.sqrt(g * H))
        assert coeffs.pi[0, 0, 0] == pytest.approx(expected_g11, rel=1e-12)

    def test_rejects_supercritical_equilibrium(self):
        params = models.SaintVenantParams(Hstar=0.5, Vstar=3.0)  # V^2 > g H
        with pytest.raises(ValueError, match="sub-critical"):
            models.linearize_saint_venant(params,
                                          core.build_grid(1.0, 8, 1.0, 0.75, 6.0),
                                          kappa=(0.1, 0.1))


class TestEuler:
    def test_equilibrium_density(self):
        p = models.EulerParams()
        assert p.rho_star(0.0) == pytest.approx(3.0, rel=1e-12)
        assert p.rho_star(1.0) < 3.0  # friction drains density downstream

    def test_density_derivative_matches_flow_ode(self):
        # d ln rho / dx = 1 / (2 (1 + W)) with W = -(a rho / q)^2
        p = models.EulerParams()
        for x in (0.0, 0.37, 0.9):
            rho = p.rho_star(x)
            W = -(p.a * rho / p.q_star) ** 2
            h = 1e-6
            num = (p.rho_star(x + h) - p.rho_star(x - h)) / (2 * h)
            assert num == pytest.approx(rho / (2 * (1 + W)), rel=1e-6)

    def test_speeds_at_left_end(self):
        p = models.EulerParams()
        assert p.q_star / p.rho_star(0.0) + p.a == pytest.approx(0.2 / 3.0 + 1.0, rel=1e-12)
        assert p.q_star / p.rho_star(0.0) - p.a == pytest.approx(0.2 / 3.0 - 1.0, rel=1e-12)
        sc = models.euler_scenario(J=32)
        lam = sc.coefficients.lam
        # sampled at the first cell center, a grid spacing away from x = 0
        assert lam[1, 0] == pytest.approx(0.2 / 3.0 + 1.0, abs=1e-4)
        # lam1 - lam2 = 2a at every sample
        assert np.allclose(lam[:, 0] - lam[:, 1], 2.0, rtol=1e-13)

    def test_source_sign_pattern(self):
        sc = models.euler_scenario(J=64)
        gam = sc.coefficients.pi
        assert np.all(gam[:, 0, 0] > 0)
        assert np.all(gam[:, 0, 1] > 0)
        assert np.all(gam[:, 1, 0] > 0)
        assert np.all(gam[:, 1, 1] < 0)

    def test_zero_flux_limit_kills_source(self):
        p = models.EulerParams(q_star=0.0)
        grid = core.build_grid(1.0, 16, 1.0, 0.75, 1.0)
        coeffs = models.linearize_euler(p, grid)
        assert np.allclose(coeffs.pi, 0.0, atol=1e-14)
        assert np.allclose(coeffs.lam[:, 0], 1.0)
        assert np.allclose(coeffs.lam[:, 1], -1.0)

    def test_initial_condition(self):
        sc = models.euler_scenario(J=64)
        xs = sc.grid.centers[1:-1]
        assert np.allclose(sc.initial[:, 0], np.cos(2 * np.pi * xs), rtol=1e-14)
        assert np.allclose(sc.initial[:, 1], np.cos(2 * np.pi * xs), rtol=1e-14)


class TestSteadyStateIntegrator:
    def grid(self):
        return core.build_grid(1.0, 20, 1.0, 0.8, 1.0)

    def test_zero_rhs_is_constant(self):
        g = self.grid()
        out = models.integrate_steady_state(lambda x, w: np.zeros(2), [1.0, -2.0], g)
        assert out.shape == (22, 2)
        assert np.allclose(out, np.tile([1.0, -2.0], (22, 1)), atol=0)

    def test_scalar_exponential(self):
        g = self.grid()
        out = models.integrate_steady_state(lambda x, w: -w, [1.0], g)
        expected = np.exp(-g.centers)
        assert np.allclose(out[:, 0], expected, atol=1e-8)

    def test_constant_matrix_against_series_oracle(self):
        g = self.grid()
        A = np.array([[0.3, -1.1], [0.7, -0.2]])
        w0 = np.array([1.0, 2.0])
        out = models.integrate_steady_state(lambda x, w: A @ w, w0, g)

        def expm_series(mat):
            # scaling and squaring with a truncated Taylor series
            s = max(0, int(np.ceil(np.log2(max(np.abs(mat).sum(axis=1))))) + 1)
            m = mat / 2 ** s
            term = np.eye(2)
            total = np.eye(2)
            for i in range(1, 24):
                term = term @ m / i
                total = total + term
            for _ in range(s):
                total = total @ total
            return total

        for idx, x in enumerate(g.centers):
            expected = expm_series(A * x) @ w0
            assert np.allclose(out[idx], expected, atol=1e-8)

    def test_blowup_detection(self):
        g = self.grid()
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(RuntimeError, match="blew up"):
                models.integrate_steady_state(lambda x, w: w * w * 1e8, [10.0], g)

    def test_linear_rhs_helper(self):
        rhs = models.linear_steady_state_rhs(
            lambda x: np.array([2.0, -0.5]),
            lambda x: np.array([[0.2, 0.0], [0.0, 0.4]]))
        out = rhs(0.3, np.array([1.0, 1.0]))
        assert out == pytest.approx([-0.1, 0.8])


def test_lambert_w_used_by_density_is_branch_minus_one():
    # spot check the wiring: the density formula inverts to the W value
    p = models.EulerParams()
    x = 0.5
    rho = p.rho_star(x)
    w = -(p.a * rho / p.q_star) ** 2
    c = (p.a * p.rho0 / p.q_star) ** 2
    z = -c * math.exp(x - c)
    assert w == pytest.approx(lambert_w_minus1(z), rel=1e-12)
    assert w * math.exp(w) == pytest.approx(z, rel=1e-10)
