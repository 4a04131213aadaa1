import numpy as np
import pytest

from vortexlab import asymptotics as asym
from vortexlab import operators as op
from vortexlab import profile_solver as ps
from vortexlab.errors import InsufficientData, NotConverged

from conftest import get_profile


def correction_h2_norm(p, omega, m):
    """H2-type norm of the correction layer w = phi - ansatz."""
    prof = get_profile(p, omega, m)
    a = ps.ansatz(p, omega, m, prof.grid)
    grid = prof.grid
    r, h = grid.nodes, grid.h
    d = prof.values - a.values
    lap = np.zeros_like(d)
    lap[1:-1] = (d[2:] - 2.0 * d[1:-1] + d[:-2]) / h ** 2 \
        + (d[2:] - d[:-2]) / (2.0 * h * r[1:-1])
    lap[0] = (d[1] - 2.0 * d[0]) / h ** 2 + d[1] / (2.0 * h * r[0])
    lap[-1] = (d[-2] - 2.0 * d[-1]) / h ** 2 - d[-2] / (2.0 * h * r[-1])
    return grid.l2r_norm(d - lap)


class TestErrorNorms:
    def test_requires_converged(self, params3):
        grid = op.default_radial_grid(params3, 8)
        a = ps.ansatz(3.0, 1.0, 8, grid)
        with pytest.raises(NotConverged):
            asym.error_norms(a)

    def test_ratio_bands_m16_vs_m64(self):
        e16 = asym.error_norms(get_profile(3.0, 1.0, 16))
        e64 = asym.error_norms(get_profile(3.0, 1.0, 64))
        assert 2.8 <= e16.linf_err / e64.linf_err <= 5.7   # nominal 4 (rate 1)
        assert 1.6 <= e16.h2_err / e64.h2_err <= 2.6       # nominal 2 (rate 1/2)

    def test_errors_decrease_in_m(self):
        rows = [asym.error_norms(get_profile(3.0, 1.0, m)) for m in (8, 16, 32, 64)]
        h2 = [r.h2_err for r in rows]
        linf = [r.linf_err for r in rows]
        assert all(v > 0 for v in h2 + linf)
        assert all(a > b for a, b in zip(h2, h2[1:]))
        assert all(a > b for a, b in zip(linf, linf[1:]))

    def test_peak_offset_uniformly_bounded(self):
        for m in (8, 16, 32, 64):
            e = asym.error_norms(get_profile(3.0, 1.0, m))
            assert abs(e.peak_offset) <= 2.0

    def test_correction_layer_h2_sqrt_eps(self):
        # the correction layer phi - ansatz carries an O(sqrt(eps)) H2 norm
        e16 = correction_h2_norm(3.0, 1.0, 16)
        e64 = correction_h2_norm(3.0, 1.0, 64)
        assert 1.4 <= e16 / e64 <= 2.8


class TestRateFit:
    @pytest.mark.parametrize("p", [2.0, 3.0])
    def test_bands(self, p):
        fit = asym.rate_fit(p, 1.0, [8, 16, 32, 64], workers=1)
        assert -1.35 <= fit.rate_linf <= -0.65
        assert -0.80 <= fit.rate_h2 <= -0.30
        assert fit.r2_linf >= 0.98
        assert fit.r2_h2 >= 0.98

    def test_too_few_points(self):
        with pytest.raises(InsufficientData):
            asym.rate_fit(3.0, 1.0, [8, 16])

    def test_empty_table(self):
        with pytest.raises(InsufficientData):
            asym.errors_table(3.0, 1.0, [])

    def test_workers_agree_with_serial(self):
        serial = asym.errors_table(3.0, 1.0, [8, 16, 32], workers=1)
        parallel = asym.errors_table(3.0, 1.0, [8, 16, 32], workers=3)
        for a, b in zip(serial, parallel):
            assert a == b
