import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import model_path
from superholonomy.errors import NonInvertibleMetric, ParityMismatch
from superholonomy.functions import SuperFunction
from superholonomy.geometry import (
    ConnectionModel,
    CurvatureTypeTensor,
    MetricModel,
    PatchModel,
    curvature,
    higher_covariant_derivative,
    is_torsion_free,
    levi_civita,
    metric_defect,
    product_connection,
    torsion,
)
from superholonomy.models import load_model, load_model_file


def conn_of(name):
    return load_model_file(model_path(name)).connection()


def gen(patch, fam, i):
    return SuperFunction.generator(patch.context, patch.evens, fam, i)


ALL = ["example", "product", "rank11", "drw", "drw_odd", "hybrid"]


def test_example_curvature_value():
    # Gamma = eta1 eta2 th gives omega = -eta1 eta2 th; R(th, th) = 2 J d_th omega = 2 eta1 eta2
    c = conn_of("example")
    R = curvature(c)
    s = gen(c.patch, "etaS", 1) * gen(c.patch, "etaS", 2)
    assert R[(0, 0)].entries == [[s * 2]]


@pytest.mark.parametrize("name", ALL)
def test_curvature_graded_antisymmetric(name):
    c = conn_of(name)
    R = curvature(c)
    P = c.patch.parities
    for a in range(c.patch.dim):
        for b in range(c.patch.dim):
            s = 1 if (P[a] and P[b]) else -1
            assert R[(a, b)] == R[(b, a)].scale(s)


@pytest.mark.parametrize("name", ALL)
def test_curvature_parity(name):
    c = conn_of(name)
    R = curvature(c)
    P = c.patch.parities
    for (a, b), m in R.components.items():
        assert m.is_zero() or m.parity() == P[a] ^ P[b]


def test_product_curvature_is_block_diagonal():
    first, second = conn_of("drw_odd"), conn_of("drw_line")
    prod, (c1, move1), (c2, _) = product_connection(first, second)
    R = curvature(prod)
    R1 = curvature(first)
    for (a, b), m in R.components.items():
        for i in range(prod.rank):
            for j in range(prod.rank):
                e = m.entries[i][j]
                if not e.is_zero():
                    assert i in c1.values() and j in c1.values()
                    assert a in c1.values() and b in c1.values()
    for (a, b), m in R1.components.items():
        for i in range(first.rank):
            for j in range(first.rank):
                got = R[(c1[a], c1[b])].entries[c1[i]][c1[j]]
                assert got == move1(m.entries[i][j])


def test_torsion():
    c = conn_of("example")
    T = torsion(c)
    g = c.gamma[(0, 0, 0)]
    assert T[(0, 0)] == [g * 2]
    assert not is_torsion_free(c)
    assert is_torsion_free(conn_of("drw"))


def test_torsion_requires_tangent():
    with pytest.raises(ValueError):
        torsion(ConnectionModel(PatchModel(1, 1, 2), (0, 0), {}))


def test_constant_symplectic_plane_is_flat():
    patch = PatchModel(0, 2, 2)
    metric = MetricModel(patch, {(0, 1): patch.constant(1), (1, 0): patch.constant(-1)})
    lc = levi_civita(metric)
    assert lc.gamma == {}
    assert all(m.is_zero() for m in curvature(lc).components.values())


def test_levi_civita_of_model_metric():
    m = load_model_file(model_path("drw_odd"))
    c = m.connection()
    assert is_torsion_free(c)
    assert all(v.is_zero() for v in metric_defect(c, m.metric_model()).values())


def test_degenerate_metric_rejected():
    patch = PatchModel(1, 0, 2)
    s = gen(patch, "etaS", 1) * gen(patch, "etaS", 2)
    with pytest.raises(NonInvertibleMetric):
        levi_civita(MetricModel(patch, {(0, 0): s}))


def test_metric_must_be_supersymmetric():
    patch = PatchModel(0, 2, 2)
    with pytest.raises(ParityMismatch):
        MetricModel(patch, {(0, 1): patch.constant(1), (1, 0): patch.constant(1)})


def test_gamma_parity_checked():
    patch = PatchModel(0, 1, 2)
    with pytest.raises(ParityMismatch):
        ConnectionModel.tangent(patch, {(0, 0, 0): patch.constant(1)})


@st.composite
def perturbed_metric(draw):
    patch = PatchModel(1, 2, 2)
    x = patch.coordinate(0)
    t1, t2 = patch.coordinate(1), patch.coordinate(2)
    s1, s2 = gen(patch, "etaS", 1), gen(patch, "etaS", 2)
    c = lambda: draw(st.sampled_from([-1, 0, 1, 2]))
    gxx = patch.constant(draw(st.sampled_from([1, -1, 2]))) + s1 * s2 * x * c() + t1 * t2 * c() + x * x * s1 * s2 * c()
    gxt1 = s1 * c() + t1 * s1 * s2 * c() + t2 * c() * x
    gxt2 = s2 * c() + t2 * c()
    w = patch.constant(draw(st.sampled_from([1, 3]))) + s1 * s2 * c() + x * s1 * s2 * c() + t1 * t2 * c()
    gram = {(0, 0): gxx, (0, 1): gxt1, (1, 0): gxt1, (0, 2): gxt2, (2, 0): gxt2,
            (1, 2): w, (2, 1): -w}
    return MetricModel(patch, gram)


@given(perturbed_metric())
def test_levi_civita_is_metric_and_torsion_free(metric):
    lc = levi_civita(metric)
    assert is_torsion_free(lc)
    assert all(v.is_zero() for v in metric_defect(lc, metric).values())


def test_higher_derivative_order_zero():
    c = conn_of("rank11")
    R = curvature(c)
    H = higher_covariant_derivative(c, R, 0)
    assert {(a, b): m for ((), a, b), m in H.components.items()} == R.components


@pytest.mark.parametrize("name", ["example", "rank11", "drw_odd"])
def test_higher_derivative_parity(name):
    c = conn_of(name)
    P = c.patch.parities
    H = higher_covariant_derivative(c, curvature(c), 2)
    for (dirs, a, b), m in H.components.items():
        if not m.is_zero():
            assert m.parity() == (sum(P[d] for d in dirs) + P[a] + P[b]) % 2


def test_higher_derivative_is_additive():
    c = conn_of("rank11")
    R = curvature(c).as_tensor()
    twice = CurvatureTypeTensor(c, 0, {k: m.scale(2) for k, m in R.components.items()})
    one = higher_covariant_derivative(c, R, 2)
    two = higher_covariant_derivative(c, twice, 2)
    summed = CurvatureTypeTensor(c, 0, {k: m + twice.components[k] for k, m in R.components.items()})
    three = higher_covariant_derivative(c, summed, 2)
    for k, m in one.components.items():
        assert two.components[k] == m.scale(2)
        assert three.components[k] == m.scale(3)


AUX_MODEL = """
manifold p=1 q=1
base L=2
bundle tangent
gamma th1 th1 th1 = etaS1*etaS2*th1
gamma x1 th1 x1 = etaS1
aux th1 x1 th1 = etaS1*etaS2 + x1*th1*etaS1
aux th1 th1 x1 = 1 + th1*etaS1
"""


def test_conventions_agree_without_aux():
    for name in ["example", "rank11", "drw"]:
        c = conn_of(name)
        R = curvature(c)
        lit = higher_covariant_derivative(c, R, 2)
        pos = higher_covariant_derivative(c, R, 2, convention="positional")
        assert lit.components == pos.components


def test_first_derivative_independent_of_convention():
    c = load_model(AUX_MODEL).connection()
    R = curvature(c)
    lit = higher_covariant_derivative(c, R, 1)
    pos = higher_covariant_derivative(c, R, 1, convention="positional")
    assert lit.components == pos.components
