from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import MODELS, model_path
from superholonomy.errors import ModelError, ParityError, ParseSyntaxError, UnknownSymbol
from superholonomy.functions import SuperFunction
from superholonomy.grassmann import GeneratorContext
from superholonomy.models import load_model, load_model_file
from superholonomy.parser import Environment, format_function, parse_expression

CTX = GeneratorContext((("th", 2), ("etaS", 2), ("etaT", 1)))
ENV = Environment(CTX, ("x1", "x2"))


def parse(text):
    return parse_expression(text, ENV)


def test_expression_examples():
    x1 = SuperFunction.variable(CTX, ENV.evens, "x1")
    th1 = SuperFunction.generator(CTX, ENV.evens, "th", 1)
    s1 = SuperFunction.generator(CTX, ENV.evens, "etaS", 1)
    s2 = SuperFunction.generator(CTX, ENV.evens, "etaS", 2)
    assert parse("1 + etaS1*etaS2") == ENV.constant(1) + s1 * s2
    assert parse("3/2*x1*x1 - th1") == x1 * x1 * Fraction(3, 2) - th1
    assert parse("-(x1 - 1)*etaS2") == (ENV.constant(1) - x1) * s2
    assert parse("etaS2*etaS1") == -(s1 * s2)
    assert parse("th1*th1").is_zero()


@pytest.mark.parametrize("text,col", [("1 +", 4), ("x1 x2", 4), ("2 $ 3", 3), ("(x1", 4)])
def test_syntax_errors_report_column(text, col):
    with pytest.raises(ParseSyntaxError) as err:
        parse_expression(text, ENV, line=7)
    assert err.value.line == 7
    assert err.value.column == col


def test_unknown_symbol():
    with pytest.raises(UnknownSymbol) as err:
        parse("x1 + etaS3")
    assert err.value.column == 6


@st.composite
def functions(draw):
    names = ["x1", "x2", "th1", "th2", "etaS1", "etaS2", "etaT1"]
    out = ENV.constant(0)
    for _ in range(draw(st.integers(0, 4))):
        c = Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 4)))
        term = ENV.constant(c)
        for n in draw(st.lists(st.sampled_from(names), max_size=4)):
            term = term * ENV.resolve(n)
        out = out + term
    return out


@given(functions())
def test_format_parse_round_trip(f):
    assert parse(format_function(f)) == f


@pytest.mark.parametrize("path", sorted(MODELS.glob("*.model")), ids=lambda p: p.stem)
def test_shipped_models_load(path):
    m = load_model_file(path)
    assert m.patch is not None


def test_example_model_contents():
    m = load_model_file(model_path("example"))
    assert (m.patch.p, m.patch.q, m.patch.L, m.kmax) == (0, 1, 2, 3)
    assert sorted(m.paths) == ["g", "h", "k", "l"]
    assert m.paths["l"][1].is_loop()
    assert m.submodules == {"full": ["unit"]}


BASE = "manifold p=1 q=1\nbase L=2\n"


@pytest.mark.parametrize("body,cls,line", [
    ("gamma x1 th1 th1 = etaS1\n", ParityError, 3),
    ("gamma x1 th1 = 1\n", ParseSyntaxError, 3),
    ("gamma x1 th1 th9 = 1\n", ParseSyntaxError, 3),
    ("frobnicate\n", ParseSyntaxError, 3),
    ("point x = 0\n", ModelError, 3),
    ("\n\nvector v = 1 ; q1\n", UnknownSymbol, 5),
    ("gamma x1 x1 x1 = etaT1*etaS1*th1\n", ModelError, 3),
])
def test_model_errors_carry_line(body, cls, line):
    with pytest.raises(cls) as err:
        load_model(BASE + "functor lprime=1\n" * 0 + body)
    assert err.value.line == line


def test_error_column_points_into_expression():
    with pytest.raises(UnknownSymbol) as err:
        load_model(BASE + "gamma x1 x1 x1 = 1 + zz\n")
    assert err.value.line == 3
    assert err.value.column == len("gamma x1 x1 x1 = 1 + ") + 1


def test_levi_civita_header_validation():
    with pytest.raises(ModelError):
        load_model(BASE + "connection levi-civita\n")
    with pytest.raises(ModelError):
        load_model(BASE + "connection levi-civita\nmetric x1 x1 = 1\nmetric th1 th1 = 1\n")


def test_factors_resolve_relative_to_model():
    m = load_model_file(model_path("drw"))
    f1, f2 = m.factor_models()
    assert (f1.patch.p, f1.patch.q) == (0, 2)
    assert (f2.patch.p, f2.patch.q) == (1, 0)


def test_segments_must_join():
    with pytest.raises(ModelError):
        load_model(BASE + "spath g = t ; 0 | 2 + t ; 0\n")
