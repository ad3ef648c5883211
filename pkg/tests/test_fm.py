import pytest

from ldbfn import (
    ChannelParams,
    IneqSystem,
    InfeasibleSystemError,
    LinearIneq,
    Regime,
    SystemParseError,
    constraint_system,
    eliminate,
    enumerate_integer_projection,
    integer_points,
    parse_system,
    project_to_rates,
    rate_definitions,
    regions_equal,
)
from ldbfn.fm import EnumerationLimitError
from ldbfn.regions import RateRegion, hs


def ineq(coeffs, bound):
    return LinearIneq.of(coeffs, bound)


class TestEliminate:
    def test_absent_variable_passthrough(self):
        system = IneqSystem(("x", "y"), (ineq({"x": 1}, 3),))
        out = eliminate(system, "y")
        assert out.vars == ("x",)
        assert out.ineqs == (ineq({"x": 1}, 3),)

    def test_pairs_with_nonnegativity(self):
        system = IneqSystem(("x", "y"), (ineq({"x": 1, "y": 1}, 3),))
        out = eliminate(system, "y")
        assert out.ineqs == (ineq({"x": 1}, 3),)

    def test_never_reintroduces_variable(self):
        system = IneqSystem(
            ("x", "y", "z"),
            (ineq({"x": 1, "y": 2, "z": 1}, 5), ineq({"y": 1, "z": 3}, 4)),
        )
        out = eliminate(system, "y")
        assert "y" not in out.vars
        assert all("y" not in q.coeffs for q in out.ineqs)

    def test_full_elimination_of_feasible_system_is_silent(self):
        system = constraint_system(Regime.A, ChannelParams(2, 1, 3, 0))
        for v in system.vars:
            system = eliminate(system, v)
        assert system.vars == ()
        assert system.ineqs == ()

    def test_full_elimination_detects_infeasibility(self):
        system = IneqSystem(("x",), (ineq({"x": 1}, 2), ineq({"x": -1}, -3)))
        with pytest.raises(InfeasibleSystemError):
            eliminate(system, "x")

    def test_undeclared_variable_rejected(self):
        with pytest.raises(ValueError):
            eliminate(IneqSystem(("x",), (ineq({"x": 1}, 1),)), "zz")


class TestProjectToRates:
    def test_regime_a_formulas(self):
        nc, ns, nr = 2, 1, 3
        system = constraint_system(Regime.A, ChannelParams(nc, ns, nr, 0))
        region = project_to_rates(system, *rate_definitions(Regime.A))
        expected = RateRegion((hs(1, 0, ns), hs(0, 1, ns), hs(1, 1, nr)))
        assert regions_equal(region, expected)

    def test_regime_b_at_1_2_3(self):
        # Frozen from the enumeration oracle; equals the regime B closed form
        # min(ns + nc, nr + nc, nr + ns - nc) = min(3, 4, 4) = 3 for the sum.
        system = constraint_system(Regime.B, ChannelParams(1, 2, 3, 0))
        region = project_to_rates(system, *rate_definitions(Regime.B))
        assert {(int(h.a1), int(h.a2), int(h.b)) for h in region.halfspaces} == {
            (1, 0, 2), (0, 1, 2), (1, 1, 3),
        }
        oracle = enumerate_integer_projection(system, *rate_definitions(Regime.B))
        assert oracle == integer_points(region)

    def test_regime_c_net_gain_params(self):
        system = constraint_system(Regime.C, ChannelParams(6, 3, 1, 1))
        region = project_to_rates(system, *rate_definitions(Regime.C))
        assert {(int(h.a1), int(h.a2), int(h.b)) for h in region.halfspaces} == {
            (1, 0, 2), (0, 1, 2),
        }

    def test_single_variable_diagonal(self):
        system = IneqSystem(("x",), (ineq({"x": 1}, 2),))
        region = project_to_rates(system, {"x": 1}, {"x": 1})
        assert region.contains((2, 2)) and region.contains((1, 1))
        assert not region.contains((2, 1)) and not region.contains((1, 2))

    def test_infeasible_reported_distinctly(self):
        system = IneqSystem(("x",), (ineq({"x": 1}, -1),))
        with pytest.raises(InfeasibleSystemError):
            project_to_rates(system, {"x": 1}, {"x": 1})

    def test_negative_definition_coefficients_rejected(self):
        system = IneqSystem(("x",), (ineq({"x": 1}, 1),))
        with pytest.raises(ValueError):
            project_to_rates(system, {"x": -1}, {"x": 1})


class TestEnumeration:
    def test_empty_system(self):
        system = IneqSystem((), ())
        assert enumerate_integer_projection(system, {}, {}) == {(0, 0)}

    def test_single_cap(self):
        system = IneqSystem(("x",), (ineq({"x": 1}, 1),))
        assert enumerate_integer_projection(system, {"x": 1}, {"x": 1}) == {(0, 0), (1, 1)}

    def test_regime_a_points_are_box(self):
        system = constraint_system(Regime.A, ChannelParams(2, 1, 3, 0))
        pts = enumerate_integer_projection(system, *rate_definitions(Regime.A))
        assert pts == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_combination_budget_guard(self):
        system = IneqSystem(tuple(f"x{i}" for i in range(12)), ())
        with pytest.raises(EnumerationLimitError):
            enumerate_integer_projection(system, {}, {}, bound=10)


FIXTURE = """
# comment line
Rc1 + Rc2 + R1d + R2d <= 1
Rc1 + 2*Rc2 + R1d + R2d <= 2
Rc1 <= 1
R1 = Rc1 + Rc2 + R1d
R2 = Rc1 + Rc2 + R2d
"""


class TestParse:
    def test_round_trip(self):
        system, r1_def, r2_def = parse_system(FIXTURE)
        assert system.vars == ("Rc1", "Rc2", "R1d", "R2d")
        assert len(system.ineqs) == 3
        assert r1_def == {"Rc1": 1, "Rc2": 1, "R1d": 1}
        region = project_to_rates(system, r1_def, r2_def)
        assert enumerate_integer_projection(system, r1_def, r2_def) == integer_points(region)

    def test_parse_error_carries_line_number(self):
        with pytest.raises(SystemParseError) as err:
            parse_system("Rc1 + <= 2\nR1 = Rc1\nR2 = Rc1")
        assert "line 1" in str(err.value)

    def test_missing_rate_definition(self):
        with pytest.raises(SystemParseError):
            parse_system("x <= 1\nR1 = x")

    def test_zero_rate_definitions(self):
        system, r1_def, r2_def = parse_system("x <= 1\nR1 = 0\nR2 = 0")
        assert enumerate_integer_projection(system, r1_def, r2_def) == {(0, 0)}
