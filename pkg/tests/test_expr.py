import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shelldec.expr import (
    ExpressionError,
    evaluate,
    format_expression,
    parse,
    sample,
)
from tests.conftest import interference_values

INTERFERENCE = "3*(sin(2*pi*x) - (2*pi*x)*cos(2*pi*x))/((2*pi*x)^3)"


class TestParse:
    def test_precedence(self):
        assert parse("2+3*4")(0.0) == 14.0

    def test_power_binds_tighter_than_unary_minus(self):
        assert parse("-2^2")(0.0) == -4.0

    def test_power_right_associative(self):
        assert parse("2^3^2")(0.0) == 512.0

    def test_both_power_spellings(self):
        assert parse("2**5")(0.0) == parse("2^5")(0.0) == 32.0

    def test_interference_expression(self):
        expr = parse(INTERFERENCE)
        x = np.array([0.25, 0.5, 1.0, 2.7])
        np.testing.assert_allclose(expr(x), interference_values(x), rtol=1e-14)

    def test_scientific_literals(self):
        assert parse("1.5e-3")(0.0) == pytest.approx(1.5e-3)
        assert parse("2E2")(0.0) == 200.0

    def test_pi_constant(self):
        assert parse("cos(pi)")(0.0) == pytest.approx(-1.0)

    def test_functions(self):
        for text, x, want in [
            ("sin(x)", 0.3, math.sin(0.3)),
            ("exp(-x^2)", 1.2, math.exp(-1.44)),
            ("sqrt(x)", 4.0, 2.0),
            ("abs(-x)", 3.0, 3.0),
            ("log(x)", math.e, 1.0),
            ("tan(x)", 0.4, math.tan(0.4)),
        ]:
            assert parse(text)(x) == pytest.approx(want, rel=1e-14)

    def test_unknown_identifier_with_offset(self):
        with pytest.raises(ExpressionError) as err:
            parse("2*y + 1")
        assert err.value.offset == 2

    def test_unbalanced_parentheses_at_offset(self):
        with pytest.raises(ExpressionError, match="unbalanced") as err:
            parse("sin(")
        assert err.value.offset == 4

    def test_missing_closing_paren(self):
        with pytest.raises(ExpressionError, match="unbalanced"):
            parse("(1 + 2")

    def test_empty_operand(self):
        with pytest.raises(ExpressionError, match="empty operand"):
            parse("2+")

    def test_empty_expression(self):
        with pytest.raises(ExpressionError):
            parse("   ")

    def test_stray_closing_paren(self):
        with pytest.raises(ExpressionError):
            parse("1+2)")

    def test_unexpected_character(self):
        with pytest.raises(ExpressionError) as err:
            parse("1 @ 2")
        assert err.value.offset == 2


class TestRoundTrip:
    CASES = [
        "2+3*4",
        "-x^2 + 1",
        "sin(2*pi*x)/x",
        INTERFERENCE,
        "exp(-x^2)*cos(x) - 1/(x+2)",
    ]

    @pytest.mark.parametrize("text", CASES)
    def test_format_then_parse_evaluates_identically(self, text):
        expr = parse(text)
        again = parse(format_expression(expr))
        x = np.linspace(0.1, 3.0, 37)
        np.testing.assert_array_equal(expr(x), again(x))

    @settings(max_examples=80, deadline=None)
    @given(
        a=st.floats(-5, 5, allow_nan=False),
        b=st.floats(0.1, 5, allow_nan=False),
        op=st.sampled_from(["+", "-", "*", "/"]),
        fn=st.sampled_from(["sin", "cos", "exp", "abs"]),
    )
    def test_random_small_expressions_round_trip(self, a, b, op, fn):
        text = f"{fn}({a!r}*x) {op} {b!r}"
        expr = parse(text)
        again = parse(format_expression(expr))
        x = np.linspace(0.0, 2.0, 11)
        np.testing.assert_array_equal(expr(x), again(x))


class TestSample:
    def test_gaussian_samples(self):
        curve = sample(parse("exp(-x^2)"), r_max=5.0, step=0.5)
        np.testing.assert_allclose(curve.f, np.exp(-curve.r**2), rtol=1e-15)

    def test_interference_origin_rule(self):
        curve = sample(parse(INTERFERENCE), r_max=8.0, step=0.01, origin_value=1.0)
        assert curve.f[0] == 1.0
        np.testing.assert_allclose(
            curve.f[1:], interference_values(curve.r[1:]), rtol=1e-12
        )

    def test_singular_origin_without_rule_is_an_error(self):
        with pytest.raises(ExpressionError, match="singular"):
            sample(parse("1/x"), r_max=1.0, step=0.1)

    def test_origin_rule_ignored_when_value_finite(self):
        curve = sample(parse("x+2"), r_max=1.0, step=0.5, origin_value=99.0)
        assert curve.f[0] == 2.0

    def test_nonfinite_away_from_origin_is_an_error(self):
        with pytest.raises(ExpressionError, match="not finite"):
            sample(parse("1/(x-1)"), r_max=2.0, step=0.5)

    def test_constant_expression_broadcasts(self):
        curve = sample(parse("3"), r_max=1.0, step=0.25)
        assert np.all(curve.f == 3.0)

    def test_matches_constant_scatterer_image_after_scaling(self):
        # the sampled interference expression equals the point-scatterer
        # image at resolution D once scaled by (4 pi / 3) D^-3
        from shelldec.atoms import AtomImageSpec, ScatteringFactor, atom_image

        D = 3.0
        expr_curve = sample(parse(INTERFERENCE), r_max=3.0, step=0.01, origin_value=1.0)
        sf = ScatteringFactor("point", ((1.0, 0.0),), convention="s")
        img = atom_image(sf, AtomImageSpec("point", resolution=D, r_max=9.0, step=0.03))
        scaled = (4.0 * np.pi / 3.0) / D**3 * expr_curve.f
        np.testing.assert_allclose(img.f, scaled, rtol=1e-6, atol=1e-9 * img.f[0])
