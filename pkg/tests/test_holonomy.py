import pytest

from conftest import model_path
from superholonomy.errors import NotFree, SpecInsufficient
from superholonomy.fppf import bare_context
from superholonomy.geometry import PatchModel
from superholonomy.grassmann import GrassmannMorphism
from superholonomy.holonomy import (
    HolonomyEngine,
    SampleSpec,
    comparison_check,
    conjugated_curvature,
    conjugation_check,
    degree_decomposition_check,
    functoriality_check,
    holonomy_report,
    inclusion_check,
    invariance_submodule,
    invariance_vector,
    sheaf_audit_holonomy,
    stabilization_threshold,
)
from superholonomy.models import load_model, load_model_file
from superholonomy.superlinalg import span_equal
from superholonomy.transport import PathModel, SPoint, pull_back_tensor, pullback_covariant_derivative


def setup(name):
    m = load_model_file(model_path(name))
    c = m.connection()
    spec = m.sample_spec()
    return m, c, spec, HolonomyEngine(c, spec)


# golden value


def _golden_paths(patch):
    ctx = patch.context
    s1, s2 = ctx.generator("etaS", 1), ctx.generator("etaS", 2)
    origin = SPoint.origin(patch)
    there = SPoint(patch, [s1])
    loop = PathModel.linear(origin, there).then(PathModel.linear(there, SPoint(patch, [s2]))).then(
        PathModel.linear(SPoint(patch, [s2]), origin))
    return {"constant": PathModel.constant(origin), "loop": loop, "open": PathModel.linear(origin, there)}


@pytest.mark.parametrize("kind", ["constant", "loop", "open"])
def test_golden_conjugated_curvature(kind):
    m = load_model_file(model_path("example"))
    patch = PatchModel(0, 1, 2, 2)
    c = m.connection().with_patch(patch)
    ctx = patch.context
    s1, s2 = ctx.generator("etaS", 1), ctx.generator("etaS", 2)
    t1, t2 = ctx.generator("etaT", 1), ctx.generator("etaT", 2)
    got = conjugated_curvature(c, _golden_paths(patch)[kind], [t1], [t2])
    assert got.entries == [[s1 * s2 * t1 * t2 * -2]]


# dimensions and the comparison


DIMS = {
    "example": (1, 1, 2),
    "product": (1, 1, 2),
    "rank11": (3, 3, 2),
    "drw": (3, 3, 2),
    "flat": (0, 0, 0),
}


@pytest.mark.parametrize("name", sorted(DIMS))
def test_report_dimensions(name):
    _, c, spec, eng = setup(name)
    rep = holonomy_report(c, spec, engine=eng)
    assert (rep.galaev.dim, rep.coefficient.dim, rep.threshold) == DIMS[name]
    assert rep.comparison


def test_threshold_dimension_sequence():
    _, c, spec, eng = setup("rank11")
    threshold, dims = stabilization_threshold(c, spec, engine=eng)
    assert threshold == 2
    assert dims == {0: 0, 1: 2, 2: 3, 3: 3, 4: 3}


@pytest.mark.parametrize("name", ["example", "product", "rank11"])
def test_comparison_details(name):
    _, c, spec, eng = setup(name)
    res = comparison_check(c, spec, engine=eng)
    assert res["equal"] and res["galaev_in_coefficient"] and res["coefficient_in_galaev"]
    assert res["eta_derivatives_in_tower_span"]


def test_comparison_needs_enough_generators():
    _, c, spec, eng = setup("product")
    with pytest.raises(SpecInsufficient):
        comparison_check(c, spec, lprime=1, engine=eng)


def test_full_and_generator_methods_agree():
    for name in ["example", "rank11"]:
        _, c, spec, eng = setup(name)
        for lp in (2, 3):
            assert span_equal(eng.coefficient_algebra(lp), eng.coefficient_algebra(lp, "full"))


@pytest.mark.parametrize("name", ["example", "product", "rank11", "drw"])
def test_degree_decomposition_and_inclusion(name):
    _, c, spec, eng = setup(name)
    threshold, _ = stabilization_threshold(c, spec, engine=eng)
    assert degree_decomposition_check(c, spec, threshold, threshold + 2, engine=eng)["holds"]
    assert inclusion_check(c, spec, threshold + 2, engine=eng)["holds"]


@pytest.mark.parametrize("name", ["example", "rank11"])
def test_functoriality(name):
    _, c, spec, eng = setup(name)
    for lp in (1, 2, 3):
        assert functoriality_check(c, spec, lp, engine=eng)


@pytest.mark.parametrize("name", ["example", "product", "rank11"])
def test_conjugation_along_s_paths(name):
    m, c, spec, eng = setup(name)
    for kind, p in m.paths.values():
        if kind == "spath":
            assert conjugation_check(c, spec, p, engine=eng)["equal"]


# the eta-derivative tower


@pytest.mark.parametrize("name", ["example", "rank11"])
def test_holk_structure(name):
    """k-fold eta-derivatives of conjugated curvature differ from conjugated
    pullback covariant derivatives by elements of the order k-1 algebra."""
    _, c, spec, eng = setup(name)
    lp = 3
    algebras = [eng.holk_algebra(lp, 0), eng.holk_algebra(lp, 1)]
    R = eng.curvature(lp)
    conn = eng.connection(lp)
    ctx = conn.patch.context
    checked = 0
    for _, path in eng.t_samples(lp):
        P, Pinv = eng.transport(path, lp)
        y = path.end
        Ry = pull_back_tensor(y, R.components)
        for i in range(1, lp + 1):
            bi = ctx.index("etaT", i)
            d1 = pullback_covariant_derivative(conn, y, Ry, 0, i)
            for ab, m in Ry.items():
                X = (Pinv @ m @ P).map(lambda e: e.left_partial(bi)).row_signs(1)
                assert algebras[0].contains(X - Pinv @ d1[ab] @ P)
                for j in range(1, lp + 1):
                    bj = ctx.index("etaT", j)
                    d2 = pullback_covariant_derivative(conn, y, d1, 1, j)
                    X2 = X.map(lambda e: e.left_partial(bj)).row_signs(1)
                    assert algebras[1].contains(X2 - Pinv @ d2[ab] @ P)
                    checked += 1
    assert checked > 0


def test_holk_algebras_grow():
    _, c, spec, eng = setup("rank11")
    h0, h1 = eng.holk_algebra(2, 0), eng.holk_algebra(2, 1)
    assert h1.contains_all(h0)


# the twofold invariance criterion

INVARIANCE = {
    "example": ({"zero": True, "unit": False, "nil1": True, "nil2": True}, {"full": True}),
    "product": ({"ex": True, "eth": False, "mixed": False, "nil": True},
                {"first": True, "second": True, "rotated": False}),
    "rank11": ({"e1": False, "e2": False, "nil": True}, {"top": False}),
    "flat": ({"v": True, "w": True}, {"line": True}),
}


@pytest.mark.parametrize("name", sorted(INVARIANCE))
def test_invariance_conditions_agree(name):
    m, c, spec, eng = setup(name)
    rep = holonomy_report(c, spec, engine=eng)
    vectors, subs = INVARIANCE[name]
    for vname, want in vectors.items():
        res = invariance_vector(c, spec, m.vectors[vname], rep.lprime, engine=eng)
        assert (res["A"], res["B"]) == (want, want), vname
    for sname, want in subs.items():
        res = invariance_submodule(c, spec, [m.vectors[v] for v in m.submodules[sname]], rep.lprime, engine=eng)
        assert (res["A"], res["B"]) == (want, want), sname


def test_dependent_submodule_rejected():
    m, c, spec, eng = setup("product")
    with pytest.raises(NotFree):
        invariance_submodule(c, spec, [m.vectors["ex"], m.vectors["ex"]], 2, engine=eng)


# the auxiliary connection only enters through higher derivatives


AUX_LINES = """aux th1 th1 x1 = 1 + x1*etaS1*etaS2
aux x1 th1 th1 = etaS1*etaS2 + x1
aux th1 x1 th1 = x1*th1*etaS1
"""


def test_holonomy_independent_of_aux():
    text = model_path("product").read_text()
    plain = load_model(text)
    twisted = load_model(text + AUX_LINES)
    assert twisted.connection().aux
    e1 = HolonomyEngine(plain.connection(), plain.sample_spec())
    e2 = HolonomyEngine(twisted.connection(), twisted.sample_spec())
    assert span_equal(e1.galaev_algebra(), e2.galaev_algebra())
    for lp in (2, 3):
        assert span_equal(e1.coefficient_algebra(lp), e2.coefficient_algebra(lp))


# gluing over fppf covers


def _cover():
    one, two, three = bare_context(1), bare_context(2), bare_context(3)
    e = [None] + [three.generator("eta", i) for i in (1, 2, 3)]
    return [
        GrassmannMorphism(one, two, [two.generator("eta", 1)]),
        GrassmannMorphism(one, three, [e[1] + e[1] * e[2] * e[3]]),
        GrassmannMorphism.identity(one),
    ]


@pytest.mark.parametrize("name", ["example", "rank11"])
def test_sheaf_audit(name):
    _, c, spec, eng = setup(name)
    res = sheaf_audit_holonomy(c, spec, _cover(), engine=eng)
    assert res["holds"]
    for part in ("algebra", "group"):
        assert res[part]["glued"] > 0
        assert res[part]["unique"] and res[part]["corruption_rejected"]


def test_spec_defaults():
    m = load_model_file(model_path("example"))
    spec = SampleSpec(m.base)
    assert spec.kmax == 3
