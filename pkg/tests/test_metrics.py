import numpy as np
import pytest

from subarray_cs.errors import InvalidArgumentError
from subarray_cs.metrics import (XiEvaluator, chi_metric, extract_layout, layout_from_weights,
                                 measure_sll, metric_grid, xi_metric)
from subarray_cs.model import ArrayGeometry, uniform_geometry
from subarray_cs.omp import SparseSolution
from subarray_cs.patterns import PatternSpec, chebyshev_excitations, make_desired


@pytest.fixture(scope="module")
def desired():
    return make_desired(PatternSpec("chebyshev", 20, 20.0), metric_grid())


class TestXi:
    def test_exact_match_is_zero(self, desired):
        assert xi_metric(desired, desired.values) == 0.0

    def test_zero_pattern_is_one(self, desired):
        assert xi_metric(desired, np.zeros(len(desired.grid))) == pytest.approx(1.0, rel=1e-14)

    def test_scaled_pattern(self, desired):
        assert xi_metric(desired, 1.1 * desired.values) == pytest.approx(0.01, rel=1e-10)

    def test_doubling_the_error_quadruples_xi(self, desired):
        rng = np.random.default_rng(3)
        e = 0.01 * (rng.standard_normal(len(desired.grid)) + 1j * rng.standard_normal(len(desired.grid)))
        x1 = xi_metric(desired, desired.values + e)
        x2 = xi_metric(desired, desired.values + 2 * e)
        assert x2 == pytest.approx(4 * x1, rel=1e-12)

    def test_negative_angles_ignored(self):
        from subarray_cs.model import AngleGrid
        grid = AngleGrid.uniform_degrees(1.0, -90.0, 90.0)
        fbar = np.ones(len(grid))
        f = np.where(grid.deg < 0, 5.0, 1.0)
        assert xi_metric(fbar, f, grid) == 0.0

    def test_achieved_denominator(self, desired):
        xi = xi_metric(desired, 1.1 * desired.values, denominator="achieved")
        assert xi == pytest.approx(0.01 / 1.21, rel=1e-10)

    def test_achieved_denominator_zero_pattern(self, desired):
        assert xi_metric(desired, np.zeros(len(desired.grid)), denominator="achieved") == np.inf

    def test_zero_energy_target(self):
        grid = metric_grid(1.0)
        with pytest.raises(InvalidArgumentError):
            xi_metric(np.zeros(len(grid)), np.ones(len(grid)), grid)

    def test_length_mismatch(self, desired):
        with pytest.raises(InvalidArgumentError):
            xi_metric(desired, np.ones(5))

    def test_grid_refinement_converges(self):
        spec = PatternSpec("chebyshev", 20, 20.0)
        w = chebyshev_excitations(20, 20.0)
        pos = uniform_geometry(20).positions * 1.01
        vals = []
        for step in (0.2, 0.1, 0.05, 0.025):
            ev = XiEvaluator(make_desired(spec, metric_grid(step)))
            vals.append(ev(pos, w))
        # halving the step changes xi by less than 1e-6 relative
        np.testing.assert_allclose(vals[:-1], vals[1:], rtol=1e-6)


class TestChi:
    @pytest.mark.parametrize("K, N, chi", [(5, 20, 0.25), (20, 20, 1.0), (9, 100, 0.09)])
    def test_values(self, K, N, chi):
        assert chi_metric(K, N) == pytest.approx(chi)

    @pytest.mark.parametrize("K, N", [(0, 20), (21, 20), (2.5, 20)])
    def test_out_of_range(self, K, N):
        with pytest.raises(InvalidArgumentError):
            chi_metric(K, N)


class TestSll:
    def test_chebyshev_equiripple(self):
        sll, peak = measure_sll(uniform_geometry(20), chebyshev_excitations(20, 20.0))
        assert sll == pytest.approx(-20.0, abs=0.1)
        assert peak == 0.0

    def test_single_element(self):
        sll, _ = measure_sll(ArrayGeometry([0.0]), [1.0])
        assert sll == -np.inf

    def test_uniform_sixteen(self):
        sll, _ = measure_sll(uniform_geometry(16), np.ones(16))
        assert sll == pytest.approx(-13.1, abs=0.3)

    def test_scale_invariant(self):
        w = chebyshev_excitations(20, 20.0)
        a, _ = measure_sll(uniform_geometry(20), w)
        b, _ = measure_sll(uniform_geometry(20), (3 - 2j) * w)
        assert a == pytest.approx(b, abs=1e-10)

    def test_steered_beam(self):
        pos = uniform_geometry(16).positions
        w = np.exp(-2j * np.pi * pos * np.sin(np.radians(20.0)))
        sll, peak = measure_sll(pos, w)
        assert peak == pytest.approx(20.0, abs=0.01)
        assert sll == pytest.approx(-13.1, abs=0.3)

    def test_zero_excitations(self):
        with pytest.raises(InvalidArgumentError):
            measure_sll(uniform_geometry(4), np.zeros(4))


class TestLayout:
    def test_single_breakpoint(self):
        sol = SparseSolution((0,), np.array([0.7 + 0j]), 0.0, 12)
        layout = extract_layout(sol, 12)
        assert layout.K == 1 and layout.sizes == [12]
        assert layout.runs[0].weight == 0.7

    def test_five_breakpoints(self):
        sol = SparseSolution((0, 5, 13, 18, 19), np.array([1.0, 0.5, -0.3, 0.4, 0.2]), 0.0, 20)
        layout = extract_layout(sol, 20)
        assert layout.sizes == [5, 8, 5, 1, 1]
        assert layout.K == 5
        assert [r.first for r in layout.runs] == [1, 6, 14, 19, 20]

    def test_published_symmetric_array(self):
        w = np.array([1.0] + [0.5804] * 5 + [0.8583] * 8 + [0.5804] * 5 + [1.0])
        layout = layout_from_weights(w)
        assert layout.K == 5
        assert layout.sizes == [1, 5, 8, 5, 1]
        assert [r.weight.real for r in layout.runs] == [1.0, 0.5804, 0.8583, 0.5804, 1.0]

    def test_merges_within_tolerance(self):
        layout = layout_from_weights([1.0, 1.0 + 1e-12, 2.0])
        assert layout.sizes == [2, 1]

    def test_zero_coefficient_does_not_split(self):
        sol = SparseSolution((0, 4), np.array([1.0, 0.0]), 0.0, 8)
        assert extract_layout(sol, 8).sizes == [8]
