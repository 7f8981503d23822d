import numpy as np
import pytest

from shelldec.optimize import BoundedProblem, MinimizeStatus, minimize


def quadratic(center):
    center = np.asarray(center, dtype=float)

    def evaluate(x):
        d = x - center
        return float(np.dot(d, d)), 2.0 * d

    return evaluate


class TestMinimize:
    def test_unbounded_quadratic(self):
        c = np.array([1.0, -2.0, 0.5])
        problem = BoundedProblem(dimension=3, initial_point=np.zeros(3))
        x, val, status = minimize(problem, quadratic(c))
        assert status is MinimizeStatus.CONVERGED
        np.testing.assert_allclose(x, c, atol=1e-8)
        assert val < 1e-14

    def test_active_lower_bound_pins_coordinate(self):
        # KKT solution of the bounded quadratic: x0 at its bound, x1 free
        c = np.array([-1.0, 2.0])
        problem = BoundedProblem(
            dimension=2, initial_point=np.array([1.0, 1.0]), lower_bounds=[0.5, None]
        )
        x, _, status = minimize(problem, quadratic(c))
        assert status is MinimizeStatus.CONVERGED
        assert x[0] == pytest.approx(0.5, abs=1e-12)
        assert x[1] == pytest.approx(2.0, abs=1e-8)

    def test_rosenbrock(self):
        def evaluate(x):
            a, b = x
            val = (1 - a) ** 2 + 100.0 * (b - a * a) ** 2
            grad = np.array(
                [-2.0 * (1 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]
            )
            return val, grad

        problem = BoundedProblem(
            dimension=2, initial_point=np.array([-1.2, 1.0]), max_iterations=200
        )
        x, _, status = minimize(problem, evaluate)
        assert status is MinimizeStatus.CONVERGED
        np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-6)

    def test_never_worse_than_start(self):
        evaluate = quadratic([3.0])
        problem = BoundedProblem(
            dimension=1, initial_point=np.array([0.0]), max_iterations=1
        )
        x, val, _ = minimize(problem, evaluate)
        assert val <= evaluate(problem.initial_point)[0]

    def test_every_callback_point_is_feasible(self):
        lo = np.array([0.0, -1.0, 0.25])
        seen = []

        def evaluate(x):
            seen.append(x.copy())
            return quadratic([-1.0, -5.0, 0.1])(x)

        problem = BoundedProblem(
            dimension=3, initial_point=np.array([1.0, 1.0, 1.0]), lower_bounds=list(lo)
        )
        minimize(problem, evaluate)
        assert seen
        for x in seen:
            assert np.all(x >= lo - 1e-12)

    def test_returned_value_is_the_best_evaluation(self):
        # line-search probes may overshoot, but the result must be the lowest
        # value the callback ever produced
        values = []

        def wrapped(x):
            val, grad = quadratic([2.0, -3.0])(x)
            values.append(val)
            return val, grad

        problem = BoundedProblem(dimension=2, initial_point=np.array([10.0, 10.0]))
        _, val, _ = minimize(problem, wrapped)
        assert val == min(values)

    def test_evaluation_failure_returns_best_point(self):
        calls = {"n": 0}

        def evaluate(x):
            calls["n"] += 1
            if calls["n"] > 3:
                return float("nan"), np.zeros_like(x)
            return quadratic([5.0])(x)

        problem = BoundedProblem(dimension=1, initial_point=np.array([0.0]))
        x, val, status = minimize(problem, evaluate)
        assert status is MinimizeStatus.EVALUATION_FAILURE
        assert np.isfinite(val)

    def test_max_iterations_status(self):
        def evaluate(x):
            a, b = x
            val = (1 - a) ** 2 + 100.0 * (b - a * a) ** 2
            grad = np.array(
                [-2.0 * (1 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]
            )
            return val, grad

        problem = BoundedProblem(
            dimension=2, initial_point=np.array([-1.2, 1.0]), max_iterations=2
        )
        _, _, status = minimize(problem, evaluate)
        assert status is MinimizeStatus.MAX_ITERATIONS

    def test_infeasible_start_is_projected(self):
        problem = BoundedProblem(
            dimension=2, initial_point=np.array([-5.0, 0.0]), lower_bounds=[1.0, None]
        )
        assert problem.initial_point[0] == 1.0

    def test_deterministic(self):
        problem_kwargs = dict(
            dimension=2, initial_point=np.array([-1.2, 1.0]), max_iterations=50
        )

        def run():
            def evaluate(x):
                a, b = x
                val = (1 - a) ** 2 + 100.0 * (b - a * a) ** 2
                grad = np.array(
                    [-2.0 * (1 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]
                )
                return val, grad

            return minimize(BoundedProblem(**problem_kwargs), evaluate)

        x1, v1, s1 = run()
        x2, v2, s2 = run()
        assert np.array_equal(x1, x2) and v1 == v2 and s1 == s2

    def test_validates_shapes(self):
        with pytest.raises(ValueError):
            BoundedProblem(dimension=2, initial_point=np.zeros(3))
        with pytest.raises(ValueError):
            BoundedProblem(dimension=2, initial_point=np.zeros(2), lower_bounds=[0.0])
        with pytest.raises(ValueError):
            BoundedProblem(dimension=1, initial_point=np.zeros(1), memory_depth=0)
