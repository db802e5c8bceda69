import itertools
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.spatial import ConvexHull

from cosched.errors import ModelError, UnboundedSet
from cosched.optkernel import (
    LinearExpr,
    OptModel,
    Polytope,
    Sense,
    Status,
    VarKind,
    dualize_lp,
    enumerate_extreme_points,
    solve,
    solve_by_enumeration,
    solve_lp,
    solve_milp,
    write_lp,
)
from cosched.scenario.synthetic import rng_for


def _random_lp(rng: np.random.Generator, n: int = 4, m: int = 5) -> OptModel:
    """Feasible and bounded by construction: box-bounded variables, rows slack at a known point."""
    model = OptModel("random-lp")
    xs = [model.add_var(f"x{j}", lb=0.0, ub=float(rng.integers(3, 10))) for j in range(n)]
    point = [rng.uniform(0.0, 1.0) for _ in range(n)]
    for i in range(m):
        coefs = rng.integers(-5, 6, size=n)
        expr = LinearExpr.total(float(c) * x for c, x in zip(coefs, xs))
        lhs = float(sum(c * p for c, p in zip(coefs, point)))
        if rng.random() < 0.5:
            model.add_constraint(expr.le(lhs + 1.0, name=f"r{i}"))
        else:
            model.add_constraint(expr.ge(lhs - 1.0, name=f"r{i}"))
    model.set_objective(LinearExpr.total(float(c) * x for c, x in zip(rng.integers(-4, 5, size=n), xs)))
    return model


def _random_milp(rng: np.random.Generator, n_bin: int, n_cont: int = 2) -> OptModel:
    model = OptModel("random-milp")
    ys = [model.add_var(f"y{j}", VarKind.BINARY) for j in range(n_bin)]
    xs = [model.add_var(f"x{j}", lb=0.0, ub=5.0) for j in range(n_cont)]
    for i in range(3):
        expr = LinearExpr.total(float(c) * v for c, v in zip(rng.integers(-3, 4, size=n_bin + n_cont), ys + xs))
        model.add_constraint(expr.le(float(rng.integers(1, 6)), name=f"r{i}"))
    costs = rng.integers(-6, 7, size=n_bin + n_cont)
    model.set_objective(LinearExpr.total(float(c) * v for c, v in zip(costs, ys + xs)))
    return model


class TestSimplex:
    def test_textbook_lp(self):
        """max 3x + 5y  s.t.  x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)."""
        model = OptModel()
        x = model.add_var("x")
        y = model.add_var("y")
        model.add_constraint(x.le(4, name="a"))
        model.add_constraint((2 * y).le(12, name="b"))
        model.add_constraint((3 * x + 2 * y).le(18, name="c"))
        model.set_objective(3 * x + 5 * y, Sense.MAX)
        solution = solve_lp(model)
        assert solution.status is Status.OPTIMAL
        assert_allclose(solution.objective_value, 36.0, atol=1e-9)
        assert_allclose([solution["x"], solution["y"]], [2.0, 6.0], atol=1e-9)

    def test_infeasible(self):
        model = OptModel()
        x = model.add_var("x")
        model.add_constraint(x.ge(3, name="lo"))
        model.add_constraint(x.le(1, name="hi"))
        model.set_objective(x)
        assert solve_lp(model).status is Status.INFEASIBLE

    def test_unbounded(self):
        model = OptModel()
        x = model.add_var("x")
        y = model.add_var("y")
        model.add_constraint((x - y).le(1, name="r"))
        model.set_objective(x, Sense.MAX)
        assert solve_lp(model).status is Status.UNBOUNDED

    def test_free_variable_and_constant(self):
        model = OptModel()
        z = model.add_var("z", VarKind.FREE)
        model.add_constraint(z.ge(-7, name="floor"))
        model.set_objective(z + 2.5)
        solution = solve_lp(model)
        assert_allclose(solution["z"], -7.0, atol=1e-9)
        assert_allclose(solution.objective_value, -4.5, atol=1e-9)

    def test_binaries_rejected(self):
        model = OptModel()
        model.add_var("b", VarKind.BINARY)
        with pytest.raises(ModelError):
            solve_lp(model)


class TestModel:
    def test_duplicate_variable(self):
        model = OptModel()
        model.add_var("x")
        with pytest.raises(ModelError):
            model.add_var("x")

    def test_undeclared_variable_in_row(self):
        model = OptModel()
        model.add_var("x")
        with pytest.raises(ModelError):
            model.add_constraint((LinearExpr.var("x") + LinearExpr.var("ghost")).le(1))

    def test_products_are_not_linear(self):
        with pytest.raises(ModelError):
            LinearExpr.var("x") * LinearExpr.var("y")

    def test_violated_reports_rows_and_bounds(self):
        model = OptModel()
        x = model.add_var("x", ub=2.0)
        model.add_constraint(x.ge(1, name="lo"))
        assert model.violated({"x": 0.0}) == ["lo"]
        assert model.violated({"x": 3.0}) == ["bound:x"]

    def test_write_lp(self):
        model = OptModel("demo")
        x = model.add_var("x[0]")
        b = model.add_var("b", VarKind.BINARY)
        model.add_constraint((x + 2 * b).le(3, name="cap[0]"))
        model.set_objective(x - b, Sense.MAX)
        text = write_lp(model)
        assert text.startswith("\\ Problem: demo\nMaximize\n")
        assert " obj: 1 x(0) - 1 b" in text
        assert " cap(0): 1 x(0) + 2 b <= 3" in text
        assert "Binaries\n b\nEnd\n" in text


class TestBranchAndBound:
    def test_knapsack(self):
        """Weights 5, 4, 3 and values 10, 40, 30 under capacity 7: take items 2 and 3 for 70."""
        model = OptModel()
        ys = [model.add_var(f"y{i}", VarKind.BINARY) for i in range(3)]
        model.add_constraint(LinearExpr.total(w * y for w, y in zip((5, 4, 3), ys)).le(7, name="cap"))
        model.set_objective(LinearExpr.total(v * y for v, y in zip((10, 40, 30), ys)), Sense.MAX)
        solution = solve(model)
        assert_allclose(solution.objective_value, 70.0, atol=1e-9)
        assert [solution[f"y{i}"] for i in range(3)] == [0.0, 1.0, 1.0]

    def test_infeasible_milp(self):
        model = OptModel()
        y = model.add_var("y", VarKind.BINARY)
        model.add_constraint(y.ge(0.4, name="lo"))
        model.add_constraint(y.le(0.6, name="hi"))
        model.set_objective(y)
        assert solve_milp(model).status is Status.INFEASIBLE

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_enumeration(self, seed):
        rng = rng_for(seed)
        model = _random_milp(rng, n_bin=int(rng.integers(2, 7)))
        bb = solve_milp(model)
        brute = solve_by_enumeration(model)
        assert bb.status is brute.status
        if bb.is_optimal:
            assert_allclose(bb.objective_value, brute.objective_value, atol=1e-6)

    @pytest.mark.slow
    def test_matches_enumeration_fuzz(self):
        for seed in range(1000):
            rng = rng_for(10_000 + seed)
            model = _random_milp(rng, n_bin=int(rng.integers(2, 13)))
            bb = solve_milp(model)
            brute = solve_by_enumeration(model)
            assert bb.status is brute.status, seed
            if bb.is_optimal:
                assert abs(bb.objective_value - brute.objective_value) <= 1e-6, seed


class TestDuality:
    @pytest.mark.parametrize("seed", range(25))
    def test_strong_duality(self, seed):
        model = _random_lp(rng_for(seed))
        primal = solve_lp(model)
        dual = solve_lp(dualize_lp(model))
        assert primal.status is Status.OPTIMAL
        assert dual.status is Status.OPTIMAL
        assert abs(primal.objective_value - dual.objective_value) <= 1e-6

    def test_dual_of_dual_is_primal(self):
        model = _random_lp(rng_for(99))
        twice = dualize_lp(dualize_lp(model))
        assert_allclose(solve_lp(twice).objective_value, solve_lp(model).objective_value, atol=1e-6)

    def test_mip_cannot_be_dualized(self):
        model = OptModel()
        model.add_var("b", VarKind.BINARY)
        with pytest.raises(ModelError):
            dualize_lp(model)

    @pytest.mark.slow
    def test_strong_duality_fuzz(self):
        for seed in range(500):
            model = _random_lp(rng_for(20_000 + seed), n=int(3 + seed % 4), m=int(3 + seed % 5))
            primal = solve_lp(model)
            dual = solve_lp(dualize_lp(model))
            assert abs(primal.objective_value - dual.objective_value) <= 1e-6, seed


class TestVertices:
    def test_box(self):
        points = enumerate_extreme_points(Polytope.box([0.0, -1.0], [2.0, 1.0]))
        assert [tuple(p) for p in points] == [(0.0, -1.0), (0.0, 1.0), (2.0, -1.0), (2.0, 1.0)]

    def test_interval(self):
        points = enumerate_extreme_points(Polytope.box([3.5], [4.25]))
        assert_allclose([p[0] for p in points], [3.5, 4.25])

    def test_degenerate_interval(self):
        points = enumerate_extreme_points(Polytope.box([2.0], [2.0]))
        assert len(points) == 1

    def test_empty(self):
        A = np.array([[1.0], [-1.0]])
        assert enumerate_extreme_points(Polytope(A, np.array([1.0, -2.0]))) == []

    def test_unbounded(self):
        with pytest.raises(UnboundedSet):
            enumerate_extreme_points(Polytope(np.array([[1.0, 0.0]]), np.array([1.0])))

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_convex_hull(self, seed):
        rng = rng_for(seed)
        # a random polygon containing the unit box
        angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, size=7))
        normals = np.column_stack([np.cos(angles), np.sin(angles)])
        A = np.vstack([normals, np.eye(2), -np.eye(2)])
        b = np.concatenate([rng.uniform(1.5, 3.0, size=7), [4.0, 4.0, 4.0, 4.0]])
        points = enumerate_extreme_points(Polytope(A, b))
        hull = ConvexHull(np.array(points))
        assert len(hull.vertices) == len(points)
        assert all(Polytope(A, b).contains(p) for p in points)

    def test_equality_constrained(self):
        A = np.vstack([-np.eye(3)])
        polytope = Polytope(A, np.zeros(3), np.ones((1, 3)), np.array([1.0]))
        points = enumerate_extreme_points(polytope)
        assert sorted(tuple(p) for p in np.round(points, 12)) == [(0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (1.0, 0.0, 0.0)]

    def test_unit_cube(self):
        points = enumerate_extreme_points(Polytope.box([0.0] * 3, [1.0] * 3))
        assert {tuple(p) for p in points} == set(itertools.product((0.0, 1.0), repeat=3))
