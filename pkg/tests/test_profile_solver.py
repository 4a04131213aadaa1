import math

import numpy as np
import pytest

from vortexlab import operators as op
from vortexlab import profile_solver as ps
from vortexlab import soliton1d as s1d
from vortexlab.errors import InvalidParameter, NotConverged

from conftest import get_profile


class TestAnsatz:
    def test_peak_location_and_value(self, params3):
        grid = op.default_radial_grid(params3, 32)
        a = ps.ansatz(3.0, 1.0, 32, grid)
        rbar = params3.rbar(32)
        assert rbar == pytest.approx(45.254833995939045, rel=1e-12)
        assert abs(a.peak_radius - rbar) <= grid.h
        assert a.peak_value == pytest.approx(1.7320508075688772, abs=1e-6)

    def test_cutoff_halfwidth_value(self, params3):
        # (2/sqrt(1.5)) * log 32, frozen from direct evaluation
        assert ps.cutoff_halfwidth(params3, 32) == pytest.approx(5.659523030068886,
                                                                 rel=1e-12)

    def test_support(self, params3):
        grid = op.default_radial_grid(params3, 32)
        a = ps.ansatz(3.0, 1.0, 32, grid)
        l = ps.cutoff_halfwidth(params3, 32)
        outside = np.abs(grid.nodes - params3.rbar(32)) >= 3.0 * l
        assert np.all(a.values[outside] == 0.0)

    def test_small_m_rejected(self, params3):
        grid = op.default_radial_grid(params3, 4)
        with pytest.raises(InvalidParameter):
            ps.ansatz(3.0, 1.0, 1, grid)

    def test_clipped_support_small_m(self):
        pm = s1d.balance_constants(1.5, 1.0)
        grid = op.default_radial_grid(pm, 5)
        a = ps.ansatz(1.5, 1.0, 5, grid)
        rbar = pm.rbar(5)
        assert np.all(a.values[grid.nodes <= rbar / 4.0] == 0.0)
        assert a.peak_value > 0


class TestBvpResidual:
    def test_zero_profile(self, params3):
        grid = op.RadialGrid(r_max=20.0, n=500)
        prof = ps.Profile(grid=grid, values=np.zeros(500), p=3.0, omega=1.0, m=8,
                          converged=False, residual_norm=0.0, provenance="ansatz")
        assert np.all(ps.bvp_residual(prof) == 0.0)

    def test_converged_profile_residual_below_tol(self, profile16):
        res = ps.bvp_residual(profile16)
        norm = profile16.grid.l2r_norm(res)
        assert norm <= 1e-10 * profile16.grid.l2r_norm(profile16.values)
        assert norm == pytest.approx(profile16.residual_norm, rel=1e-6)

    def test_ansatz_residual_sqrt_eps_scaling(self, params3):
        norms = {}
        for m in (16, 64):
            grid = op.default_radial_grid(params3, m)
            norms[m] = ps.ansatz(3.0, 1.0, m, grid).residual_norm
        assert 1.6 <= norms[16] / norms[64] <= 2.6


class TestSolve:
    def test_m32_converges_fast(self, profile32):
        assert profile32.converged
        assert len(profile32.step_norms) <= 8
        assert profile32.residual_norm <= 1e-10 * profile32.grid.l2r_norm(profile32.values)

    def test_positivity(self, profile32):
        assert np.min(profile32.values) >= -1e-8 * np.max(profile32.values)

    def test_boundary_decay(self, profile32):
        scale = np.max(profile32.values)
        assert abs(profile32.values[0]) <= 1e-8 * scale
        assert abs(profile32.values[-1]) <= 1e-8 * scale

    def test_distance_to_ansatz_shrinks_like_1_over_m(self, params3):
        dist = {}
        for m in (8, 32):
            prof = get_profile(3.0, 1.0, m)
            a = ps.ansatz(3.0, 1.0, m, prof.grid)
            dist[m] = np.max(np.abs(prof.values - a.values))
        assert dist[32] <= dist[8] * (8.0 / 32.0) * 2.0

    def test_peak_near_ring(self, params3):
        prof = get_profile(3.0, 1.0, 8)
        assert abs(prof.peak_radius - params3.rbar(8)) < 1.0

    def test_subcritical_p(self):
        prof = get_profile(1.5, 1.0, 16)
        assert prof.converged
        assert np.min(prof.values) >= -1e-8 * np.max(prof.values)

    def test_quadratic_tail(self, profile32):
        # successive Newton steps contract quadratically once small
        steps = profile32.step_norms
        pairs = [(steps[i], steps[i + 1]) for i in range(len(steps) - 1)
                 if steps[i] <= 3e-3]
        assert pairs, "no small-step pair recorded"
        for s_k, s_next in pairs:
            assert s_next <= 30.0 * s_k ** 2

    def test_far_field_monotone(self, profile32):
        grid = profile32.grid
        start = np.searchsorted(grid.nodes, profile32.peak_radius + 10.0)
        tail = profile32.values[start:]
        assert np.all(np.diff(tail) < 0.0)

    def test_grid_convergence(self, params3):
        # peak-value differences shrink at second order under h-halving
        rbar = params3.rbar(8)
        peaks = []
        for refine in (1, 2, 4):
            k = math.ceil(rbar / (0.35 / 8.0)) * refine
            h = rbar / k
            n = math.ceil((rbar + 40.0) / h) - 1
            grid = op.RadialGrid(r_max=(n + 1) * h, n=n)
            prof = ps.solve(3.0, 1.0, 8, grid, use_cache=False)
            peaks.append(prof.peak_value)
        e1, e2 = abs(peaks[0] - peaks[1]), abs(peaks[1] - peaks[2])
        assert 2.5 <= e1 / e2 <= 6.0


class TestResidualDecomposition:
    def test_rho_band(self, params3):
        grid = op.default_radial_grid(params3, 16)
        with pytest.raises(InvalidParameter):
            ps.residual_decomposition(3.0, 1.0, 16, params3.rbar(16) * 2.5, grid)

    def test_r22_scaling(self, params3):
        vals = {}
        for m in (16, 32, 64, 128):
            grid = op.default_radial_grid(params3, m)
            pm = s1d.balance_constants(3.0, 1.0)
            vals[m] = ps.residual_decomposition(3.0, 1.0, m, pm.rbar(m), grid)
        for m in (16, 32):
            ratio = vals[m]["R22_norm"] / vals[4 * m]["R22_norm"]
            assert 1.4 <= ratio <= 2.6  # eps^(1/2) law, nominal 2, within 30%

    def test_r21_r23_small(self, params3):
        grid16 = op.default_radial_grid(params3, 16)
        grid32 = op.default_radial_grid(params3, 32)
        d16 = ps.residual_decomposition(3.0, 1.0, 16, params3.rbar(16), grid16)
        d32 = ps.residual_decomposition(3.0, 1.0, 32, params3.rbar(32), grid32)
        # reference constant from m=16 under the eps^(7/2) law
        c_ref = (d16["R21_norm"] + d16["R23_norm"]) / 16.0 ** -3.5
        assert d32["R21_norm"] + d32["R23_norm"] <= 10.0 * c_ref * 32.0 ** -3.5

    def test_r22_dominates(self, params3):
        for m in (16, 32):
            grid = op.default_radial_grid(params3, m)
            d = ps.residual_decomposition(3.0, 1.0, m, params3.rbar(m), grid)
            assert all(np.isfinite(v) for v in d.values())
            assert d["R22_norm"] >= 10.0 * (d["R21_norm"] + d["R23_norm"])


class TestSerialization:
    def test_round_trip_bit_exact(self, profile16):
        text = ps.profile_to_json(profile16)
        back = ps.profile_from_json(text)
        assert np.array_equal(back.values, profile16.values)
        assert back.grid.n == profile16.grid.n
        assert back.grid.r_max == profile16.grid.r_max
        assert back.p == profile16.p and back.omega == profile16.omega
        assert back.m == profile16.m
        assert back.provenance == "loaded"
        assert back.converged

    def test_serialization_is_deterministic(self, profile16):
        assert ps.profile_to_json(profile16) == ps.profile_to_json(profile16)

    def test_bad_schema_rejected(self):
        with pytest.raises(InvalidParameter):
            ps.profile_from_json('{"schema":"nope"}')

    def test_cache_round_trip(self, params3, tmp_path):
        grid = op.default_radial_grid(params3, 8)
        p1 = ps.solve(3.0, 1.0, 8, grid, cache_dir=str(tmp_path))
        assert p1.provenance == "newton-converged"
        p2 = ps.solve(3.0, 1.0, 8, grid, cache_dir=str(tmp_path))
        assert p2.provenance == "loaded"
        assert np.array_equal(p1.values, p2.values)

    def test_require_converged(self, params3):
        grid = op.default_radial_grid(params3, 8)
        a = ps.ansatz(3.0, 1.0, 8, grid)
        with pytest.raises(NotConverged):
            ps.require_converged(a)
