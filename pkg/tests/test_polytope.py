from fractions import Fraction

import pytest

from coopmac.polytope import (
    ConeInfeasibleError,
    FloatCoefficientError,
    HalfPlane,
    Inequality,
    InvalidParameterValueError,
    MissingParameterError,
    NumericRegion,
    RationalInequalitySystem,
    RowLimitExceeded,
    SerializationError,
    SideRelationCone,
    UndeclaredVariableError,
    eliminate,
    format_inequality,
    format_system,
    implies,
    instantiate,
    parse_inequality,
    parse_system,
    rational,
    rational_or_exact,
    remove_redundant,
)

EMPTY_CONE = SideRelationCone([])


def system(variables, parameters, rows):
    return RationalInequalitySystem(variables, parameters, rows)


class TestInequality:
    def test_rational_accepts_exact_values(self):
        assert rational(3) == 3
        assert rational(Fraction(1, 3)) == Fraction(1, 3)
        assert rational("2/5") == Fraction(2, 5)

    def test_rational_rejects_floats(self):
        with pytest.raises(FloatCoefficientError):
            rational(0.5)
        with pytest.raises(FloatCoefficientError):
            rational(True)
        with pytest.raises(FloatCoefficientError):
            Inequality({"x": 0.1}, 1)

    def test_zero_coefficients_are_dropped(self):
        row = Inequality({"x": 1, "y": 0}, 2, {"I1": 0})
        assert row.lhs == {"x": Fraction(1)}
        assert row.rhs == {}

    def test_normalized_scales_leading_coefficient(self):
        row = Inequality({"x": 2, "y": 4}, 6).normalized(["x", "y"], [])
        assert row == Inequality({"x": 1, "y": 2}, 3)

    def test_undeclared_variable(self):
        with pytest.raises(UndeclaredVariableError):
            system(["x"], [], [Inequality({"y": 1}, 1)])


class TestEliminate:
    def test_interval(self):
        # 0 <= x <= y <= 1, project out y
        rows = [
            Inequality({"x": -1}, 0),
            Inequality({"x": 1, "y": -1}, 0),
            Inequality({"y": 1}, 1),
        ]
        projected = eliminate(system(["x", "y"], [], rows), ["y"])
        assert projected.variables == ["x"]
        assert set(projected.rows) == {Inequality({"x": -1}, 0), Inequality({"x": 1}, 1)}

    def test_parameters_flow_to_right_hand_side(self):
        # x + y <= I1, y >= 0
        rows = [Inequality({"x": 1, "y": 1}, 0, {"I1": 1}), Inequality({"y": -1}, 0)]
        projected = eliminate(system(["x", "y"], ["I1"], rows), ["y"])
        assert projected.rows == [Inequality({"x": 1}, 0, {"I1": 1})]

    def test_no_negative_rows_drops_variable(self):
        rows = [Inequality({"x": 1, "y": 1}, 1), Inequality({"x": -1}, 0)]
        projected = eliminate(system(["x", "y"], [], rows), ["y"])
        assert projected.rows == [Inequality({"x": -1}, 0)]

    def test_empty_drop_is_canonical(self):
        rows = [Inequality({"x": 2}, 2), Inequality({"x": 1}, 3)]
        projected = eliminate(system(["x"], [], rows), [])
        assert projected.rows == [Inequality({"x": 1}, 1)]

    def test_unknown_variable(self):
        with pytest.raises(UndeclaredVariableError):
            eliminate(system(["x"], [], []), ["z"])

    def test_row_limit(self):
        names = ["x", "y"]
        rows = [Inequality({"x": 1, "y": k}, k) for k in range(1, 6)]
        rows += [Inequality({"x": -1, "y": k}, k) for k in range(1, 6)]
        with pytest.raises(RowLimitExceeded) as info:
            eliminate(system(names, [], rows), ["x"], row_limit=10)
        assert info.value.limit == 10
        assert info.value.count == 25

    def test_deterministic(self):
        rows = [
            Inequality({"a": 1, "b": 1, "c": 1}, 3),
            Inequality({"a": -1}, 0),
            Inequality({"b": -1}, 0),
            Inequality({"c": -1}, 0),
        ]
        s = system(["a", "b", "c"], [], rows)
        assert format_system(eliminate(s, ["a", "b"])) == format_system(
            eliminate(s, ["a", "b"])
        )


class TestImplies:
    def test_sum_of_rows(self):
        s = system(
            ["x", "y"],
            ["I1", "I2"],
            [Inequality({"x": 1}, 0, {"I1": 1}), Inequality({"y": 1}, 0, {"I2": 1})],
        )
        target = Inequality({"x": 1, "y": 1}, 0, {"I1": 1, "I2": 1})
        certificate = implies(s, EMPTY_CONE, target)
        assert certificate is not None
        assert certificate.row_multipliers == [1, 1]
        assert not certificate.vacuous

    def test_needs_cone(self):
        s = system(["x"], ["I1", "I2"], [Inequality({"x": 1}, 0, {"I1": 1})])
        target = Inequality({"x": 1}, 0, {"I2": 1})
        assert implies(s, EMPTY_CONE, target) is None
        cone = SideRelationCone([Inequality({"I1": 1, "I2": -1}, 0)])
        assert implies(s, cone, target) is not None

    def test_not_implied(self):
        s = system(["x"], [], [Inequality({"x": 1}, 2)])
        assert implies(s, EMPTY_CONE, Inequality({"x": 1}, 1)) is None

    def test_infeasible_premises_are_vacuous(self):
        s = system(["x"], [], [Inequality({"x": 1}, 0), Inequality({"x": -1}, -1)])
        certificate = implies(s, EMPTY_CONE, Inequality({"x": 1}, -5))
        assert certificate is not None
        assert certificate.vacuous


class TestRemoveRedundant:
    def test_drops_implied_row(self):
        rows = [
            Inequality({"x": 1}, 0, {"I1": 1}),
            Inequality({"x": 1}, 0, {"I2": 1}),
        ]
        s = system(["x"], ["I1", "I2"], rows)
        cone = SideRelationCone([Inequality({"I1": 1, "I2": -1}, 0)])
        pruned = remove_redundant(s, cone)
        assert pruned.rows == [Inequality({"x": 1}, 0, {"I1": 1})]

    def test_keeps_independent_rows(self):
        rows = [Inequality({"x": 1}, 1), Inequality({"x": -1}, 0)]
        pruned = remove_redundant(system(["x"], [], rows), EMPTY_CONE)
        assert len(pruned) == 2

    def test_infeasible_cone(self):
        cone = SideRelationCone(
            [Inequality({"I1": 1}, -1), Inequality({"I1": -1}, 0)]
        )
        with pytest.raises(ConeInfeasibleError):
            remove_redundant(system(["x"], ["I1"], []), cone)


class TestInstantiate:
    def template(self):
        return system(
            ["R1", "R2"],
            ["I1", "I2", "I3"],
            [
                Inequality({"R1": 1}, 0, {"I1": 1}),
                Inequality({"R2": 1}, 0, {"I2": 1}),
                Inequality({"R1": 1, "R2": 1}, 0, {"I3": 1}),
                Inequality({"R1": -1}, 0),
                Inequality({"R2": -1}, 0),
            ],
        )

    def test_pentagon(self):
        region = instantiate(self.template(), {"I1": 2, "I2": 2, "I3": 3})
        assert region.vertices() == [(0, 0), (0, 2), (1, 2), (2, 0), (2, 1)]

    def test_slack_sum_gives_rectangle(self):
        region = instantiate(self.template(), {"I1": 1, "I2": 1, "I3": 10})
        assert region.vertices() == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_zero_bounds(self):
        region = instantiate(self.template(), {"I1": 0, "I2": 0, "I3": 0})
        assert region.vertices() == [(0, 0)]

    def test_maximize_and_binding(self):
        region = instantiate(self.template(), {"I1": 2, "I2": 2, "I3": 3})
        point, value = region.maximize((Fraction(3, 4), Fraction(1, 4)))
        assert point == (2, 1)
        assert value == Fraction(7, 4)
        assert region.contains((1.0, 1.0))
        assert not region.contains((2.5, 0.0))

    def test_missing_parameter(self):
        with pytest.raises(MissingParameterError) as info:
            instantiate(self.template(), {"I1": 1, "I2": 1})
        assert info.value.name == "I3"

    def test_non_finite_value(self):
        with pytest.raises(InvalidParameterValueError):
            instantiate(self.template(), {"I1": 1, "I2": 1, "I3": float("nan")})

    def test_parameter_only_rows(self):
        region = instantiate(self.template(), {"I1": 2, "I2": 2, "I3": 3})
        one, zero = Fraction(1), Fraction(0)
        slack = NumericRegion(region.variables, region.halfplanes + [HalfPlane(zero, zero, one)])
        assert slack.vertices() == region.vertices()
        broken = NumericRegion(region.variables, region.halfplanes + [HalfPlane(zero, zero, -one)])
        assert broken.vertices() == []

    def test_exact_values_pass_through(self):
        third = Fraction(1, 3)
        assert rational_or_exact(third) is third
        assert rational_or_exact(0.5) == Fraction(1, 2)
        assert rational_or_exact(2) == 2


class TestSerialization:
    def test_format_inequality(self):
        row = Inequality({"R1": 1, "R2": 1}, 0, {"I4": 1, "I8": 1}, "sum")
        assert format_inequality(row, ["R1", "R2"], ["I4", "I8"]) == (
            "R1 + R2 <= 0 + I4 + I8  # sum"
        )

    def test_parse_inequality(self):
        row = parse_inequality("2*R1 - R2 + 1 <= 3 + 1/2*I1  # label")
        assert row.lhs == {"R1": 2, "R2": -1}
        assert row.const == 2
        assert row.rhs == {"I1": Fraction(1, 2)}
        assert row.label == "label"

    def test_parse_system_restores_format(self):
        s = system(
            ["R1", "R2"],
            ["I1"],
            [Inequality({"R1": 1, "R2": -2}, Fraction(1, 3), {"I1": 1}, "a")],
        )
        text = format_system(s)
        assert format_system(parse_system(text)) == text

    def test_parse_errors(self):
        with pytest.raises(SerializationError):
            parse_inequality("R1 >= 0")
        with pytest.raises(SerializationError):
            parse_inequality("R1 <= x*y")
