import itertools

import numpy as np
import pytest

from conftest import CHEB20, CHEB100
from subarray_cs.errors import InfeasibleError, InvalidArgumentError
from subarray_cs.model import default_solver_grid, dictionary, steering_matrix, uniform_geometry
from subarray_cs.omp import omp_iterations, omp_mode1, omp_mode2
from subarray_cs.synthesis import SolverConfig, build_problem, synthesize


def subarray_dictionary(N):
    return dictionary(steering_matrix(uniform_geometry(N), default_solver_grid(N)))


def best_residual(A, fbar, K):
    """Smallest LS residual over every support of size K (brute force)."""
    best = np.inf
    for S in itertools.combinations(range(A.shape[1]), K):
        x, *_ = np.linalg.lstsq(A[:, S], fbar, rcond=None)
        best = min(best, np.linalg.norm(fbar - A[:, S] @ x))
    return best


class TestModeOne:
    def test_single_atom_recovery(self):
        A = subarray_dictionary(20)
        fbar = A[:, 4]
        sol, trace = omp_mode1(A, fbar, 1)
        assert sol.support == (4,)
        assert sol.residual_norm <= 1e-10 * np.linalg.norm(fbar)
        assert trace.steps[0].index == 4

    def test_full_support_square(self):
        rng = np.random.default_rng(1)
        N = 12
        A = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        fbar = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        sol, _ = omp_mode1(A, fbar, N)
        assert sol.residual_norm <= 1e-8 * np.linalg.norm(fbar)

    def test_chebyshev_seven_subarrays(self, cheb20_problem):
        sol, _ = omp_mode1(subarray_dictionary(20), cheb20_problem.fbar, 7)
        assert sol.K == 7
        assert cheb20_problem.xi(uniform_geometry(20).positions, sol.excitations()) <= 1e-2

    @pytest.mark.parametrize("K", [0, 21, 2.5])
    def test_bad_K(self, K):
        with pytest.raises(InvalidArgumentError):
            omp_mode1(subarray_dictionary(20), np.ones(81), K)

    def test_target_length_checked(self):
        with pytest.raises(InvalidArgumentError):
            omp_mode1(subarray_dictionary(8), np.ones(5), 1)

    def test_deterministic(self, cheb20_problem):
        A = subarray_dictionary(20)
        a, _ = omp_mode1(A, cheb20_problem.fbar, 9)
        b, _ = omp_mode1(A, cheb20_problem.fbar, 9)
        assert a.support == b.support
        np.testing.assert_array_equal(a.coeffs, b.coeffs)

    def test_tie_breaks_to_lowest_index(self):
        A = np.eye(4, dtype=complex)
        sol, _ = omp_mode1(A, np.array([1.0, 1.0, 0.5, 1.0]), 1)
        assert sol.support == (0,)

    def test_selected_index_not_reused(self):
        A = np.eye(3, dtype=complex)
        sol, trace = omp_mode1(A, np.array([3.0, 2.0, 1.0]), 3)
        assert [s.index for s in trace.steps] == [0, 1, 2]
        assert sol.residual_norm == 0.0

    def test_normalized_columns_change_selection(self):
        A = np.array([[10.0, 0.0], [0.0, 1.0]], dtype=complex)
        b = np.array([0.2, 1.0])
        assert omp_mode1(A, b, 1)[0].support == (0,)
        assert omp_mode1(A, b, 1, normalize_columns=True)[0].support == (1,)


class TestIterationInvariants:
    def test_residual_orthogonal_to_support(self, cheb20_problem):
        A = subarray_dictionary(20)
        for _, sol in itertools.islice(omp_iterations(A, cheb20_problem.fbar), 12):
            r = cheb20_problem.fbar - A[:, list(sol.support)] @ sol.coeffs
            corr = A[:, list(sol.support)].conj().T @ r
            assert np.max(np.abs(corr)) <= 1e-9 * np.linalg.norm(A) * np.linalg.norm(cheb20_problem.fbar)

    def test_residual_non_increasing_and_support_nested(self, cheb20_problem):
        A = subarray_dictionary(20)
        prev_norm, prev_support = np.inf, ()
        for _, sol in omp_iterations(A, cheb20_problem.fbar):
            assert sol.residual_norm <= prev_norm * (1 + 1e-12)
            assert sol.support[:-1] == prev_support
            prev_norm, prev_support = sol.residual_norm, sol.support


class TestBruteForce:
    @pytest.mark.parametrize("seed", range(6))
    def test_residual_not_below_optimum(self, seed):
        rng = np.random.default_rng(seed)
        N = int(rng.integers(5, 13))
        A = subarray_dictionary(N)
        fbar = rng.standard_normal(A.shape[0]) + 1j * rng.standard_normal(A.shape[0])
        for K in (1, 2, 3):
            sol, _ = omp_mode1(A, fbar, K)
            assert sol.residual_norm >= best_residual(A, fbar, K) * (1 - 1e-10)

    def test_first_step_is_optimal(self):
        rng = np.random.default_rng(11)
        A = subarray_dictionary(10)
        # for a single atom the matched filter is optimal when columns have equal norms
        A = A / np.linalg.norm(A, axis=0)
        fbar = rng.standard_normal(A.shape[0]) + 1j * rng.standard_normal(A.shape[0])
        sol, _ = omp_mode1(A, fbar, 1)
        assert sol.residual_norm == pytest.approx(best_residual(A, fbar, 1), rel=1e-10)


class TestModeTwo:
    def test_loose_epsilon_stops_after_one(self, cheb20_problem):
        fbar = cheb20_problem.fbar
        sol, trace = omp_mode2(subarray_dictionary(20), fbar, epsilon=np.linalg.norm(fbar))
        assert sol.K == 1 and len(trace.steps) == 1

    @pytest.mark.parametrize("target, chi", [(1e-2, 0.35), (1e-3, 0.65), (1e-4, 0.85)])
    def test_chebyshev_20(self, target, chi):
        res = synthesize(CHEB20, SolverConfig(solver="omp", mode=2, xi_target=target))
        assert res.metrics.chi == pytest.approx(chi, abs=0.1 + 1e-12)
        assert res.metrics.xi <= target

    def test_chebyshev_100(self):
        res = synthesize(CHEB100, SolverConfig(solver="omp", mode=2, xi_target=1e-2))
        assert res.metrics.chi == pytest.approx(0.09, abs=1e-12)

    def test_stops_at_first_sparsity_meeting_target(self, cheb20_problem):
        A = subarray_dictionary(20)
        xi_of = lambda w: cheb20_problem.xi(uniform_geometry(20).positions, w)
        sol, trace = omp_mode2(A, cheb20_problem.fbar, xi_target=1e-3, xi_of=xi_of)
        xis = [s.xi for s in trace.steps]
        assert xis[-1] <= 1e-3
        assert all(x > 1e-3 for x in xis[:-1])

    def test_unreachable_epsilon(self, cheb20_problem):
        with pytest.raises(InfeasibleError) as info:
            omp_mode2(subarray_dictionary(20)[:, :3], cheb20_problem.fbar, epsilon=1e-14)
        sol, trace = info.value.best
        assert sol.K == 3 and len(trace.steps) == 3
        assert info.value.best_residual == pytest.approx(sol.residual_norm)

    def test_needs_one_threshold(self):
        with pytest.raises(InvalidArgumentError):
            omp_mode2(subarray_dictionary(4), np.ones(17), epsilon=1.0, xi_target=1.0)
        with pytest.raises(InvalidArgumentError):
            omp_mode2(subarray_dictionary(4), np.ones(17))
