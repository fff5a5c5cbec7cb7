import numpy as np
import pytest

from umwkit.errors import DomainError
from umwkit.formula import build_design, parse_formula


class TestParse:
    def test_simple(self):
        f = parse_formula("y ~ x1 + x2")
        assert f.response == "y"
        assert f.intercept
        assert f.column_names == ("intercept", "x1", "x2")

    def test_powers_and_interactions(self):
        f = parse_formula("accuracy ~ iq^2 + dyslexia:iq^2")
        assert f.column_names == ("intercept", "iq^2", "dyslexia:iq^2")
        assert f.terms[0].factors == (("iq", 2),)
        assert f.terms[1].factors == (("dyslexia", 1), ("iq", 2))

    def test_remove_intercept(self):
        f = parse_formula("y ~ x1 - 1")
        assert not f.intercept
        assert f.column_names == ("x1",)

    def test_intercept_only(self):
        f = parse_formula("y ~ 1")
        assert f.intercept
        assert f.column_names == ("intercept",)

    def test_dotted_names(self):
        f = parse_formula("rate.obs ~ col_1.a")
        assert f.response == "rate.obs"

    @pytest.mark.parametrize("text", [
        "y x1",                 # no tilde
        "y ~ x1 ~ x2",          # two tildes
        "~ x1",                 # missing response
        "y ~",                  # empty rhs
        "y ~ x1 - x2",          # minus on a term
        "y ~ - 1",              # nothing left
        "y ~ x^0",              # zero power
        "y ~ x^-1",             # negative power
        "y ~ x1 + x1",          # duplicate
        "y ~ x1::x2",           # empty factor
        "y ~ 2x",               # bad name
    ])
    def test_rejects(self, text):
        with pytest.raises(DomainError):
            parse_formula(text)


class TestBuildDesign:
    def test_matrix(self):
        cols = {"iq": np.array([1.0, 2.0, -1.0]), "dys": np.array([1.0, -1.0, 1.0])}
        f = parse_formula("acc ~ iq^2 + dys:iq^2")
        x = build_design(f, cols)
        expected = np.column_stack([np.ones(3), [1, 4, 1], [1, -4, 1]])
        assert np.array_equal(x, expected)

    def test_no_intercept(self):
        cols = {"a": np.array([2.0, 3.0])}
        x = build_design(parse_formula("y ~ a - 1"), cols)
        assert np.array_equal(x, [[2.0], [3.0]])

    def test_missing_column(self):
        with pytest.raises(DomainError):
            build_design(parse_formula("y ~ bogus"), {"a": np.ones(3)})
