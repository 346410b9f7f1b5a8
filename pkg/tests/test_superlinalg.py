from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from superholonomy.errors import DegenerateRestriction, InhomogeneousInput, NoSolution, PreconditionViolated
from superholonomy.grassmann import GeneratorContext, GrassmannElement
from superholonomy.superlinalg import (
    SuperBilinearForm,
    SuperMatrix,
    exp_nilpotent,
    gram_of,
    lie_closure,
    log_unipotent,
    orthogonal_complement,
    osp_complete,
    solve_over_grassmann,
    span_equal,
    span_of,
    supercommutator,
)

CTX = GeneratorContext((("etaS", 3),))
Z = CTX.zero()
s1, s2, s3 = (CTX.generator("etaS", i) for i in (1, 2, 3))


def E(par, i, j, value=None):
    return SuperMatrix.elementary(par, i, j, CTX.one() if value is None else value)


def closure(gens):
    return lie_closure(gens, gens[0].row_par, CTX)


# brackets


def test_bracket_examples():
    par = (0, 0)
    X = E(par, 0, 1) + E(par, 1, 0, s1 * s2)
    assert supercommutator(X, X).is_zero()
    odd = E((0, 1), 0, 1)
    assert supercommutator(odd, odd) == (odd @ odd).scale(2)
    assert supercommutator(E(par, 0, 1), E(par, 1, 0)) == E(par, 0, 0) - E(par, 1, 1)


def test_bracket_rejects_inhomogeneous():
    par = (0, 1)
    mixed = E(par, 0, 0) + E(par, 0, 1)
    with pytest.raises(InhomogeneousInput):
        supercommutator(mixed, E(par, 0, 0))


PAR = (0, 0, 1)
cells = [(i, j) for i in range(3) for j in range(3)]
masks = list(range(8))


@st.composite
def homogeneous_matrix(draw):
    p = draw(st.integers(0, 1))
    m = SuperMatrix.zero(PAR, PAR, Z)
    for i, j in draw(st.lists(st.sampled_from(cells), max_size=4)):
        want = p ^ PAR[i] ^ PAR[j]
        mask = draw(st.sampled_from([k for k in masks if bin(k).count("1") % 2 == want]))
        c = draw(st.sampled_from([-2, -1, 1, 3]))
        m.entries[i][j] = m.entries[i][j] + CTX.monomial(mask, c)
    return m


def _sign(a, b):
    return -1 if (a.parity() and b.parity()) else 1


@given(homogeneous_matrix(), homogeneous_matrix(), homogeneous_matrix())
def test_super_jacobi(x, y, z):
    lhs = supercommutator(x, supercommutator(y, z))
    rhs = supercommutator(supercommutator(x, y), z) + supercommutator(y, supercommutator(x, z)).scale(_sign(x, y))
    assert lhs == rhs


@given(homogeneous_matrix(), homogeneous_matrix())
def test_graded_antisymmetry(x, y):
    assert supercommutator(x, y) == supercommutator(y, x).scale(-_sign(x, y))


# closure and spans


def test_closure_examples():
    assert closure([E((0, 0), 0, 1)]).dim == 1
    assert closure([E((0, 0), 0, 1), E((0, 0), 1, 0)]).dim == 3
    par = (0, 0, 0)
    alg = closure([E(par, 0, 1), E(par, 1, 2)])
    assert alg.dim == 3
    assert span_equal(alg, span_of([E(par, 0, 1), E(par, 1, 2), E(par, 0, 2)], par, CTX))


def test_span_equal_examples():
    par = (0, 0)
    a = span_of([E(par, 0, 0)], par, CTX)
    assert span_equal(a, a)
    assert span_equal(a, span_of([E(par, 0, 0).scale(2)], par, CTX))
    assert not span_equal(a, span_of([E(par, 1, 1)], par, CTX))


@given(st.lists(homogeneous_matrix(), min_size=1, max_size=3), st.randoms())
def test_closure_canonical(gens, rnd):
    a = closure(gens)
    shuffled = list(gens)
    rnd.shuffle(shuffled)
    b = closure([g.scale(Fraction(rnd.choice([1, 2, -3]))) for g in shuffled])
    assert span_equal(a, b)
    assert a.is_closed()
    assert span_equal(closure(a.basis()) if a.dim else a, a)


# solving


def test_solve_examples():
    par = (0, 0)
    ident = SuperMatrix.identity(par, Z)
    b = [1 + s1 * s2, s3]
    assert solve_over_grassmann(ident, b) == b
    scalar = SuperMatrix((0,), (0,), [[1 + s1 * s2]], Z)
    assert solve_over_grassmann(scalar, [CTX.one()]) == [1 - s1 * s2]


def test_solve_inconsistent():
    A = SuperMatrix((0, 0), (0,), [[CTX.one()], [Z]], Z)
    with pytest.raises(NoSolution):
        solve_over_grassmann(A, [CTX.one(), CTX.one()])


def test_solve_needs_full_column_rank():
    A = SuperMatrix((0, 0), (0, 0), [[s1, Z], [Z, CTX.one()]], Z)
    with pytest.raises(PreconditionViolated):
        solve_over_grassmann(A, [Z, Z])


@given(homogeneous_matrix(), st.lists(st.sampled_from(masks), min_size=3, max_size=3))
def test_solve_multiplies_back(n, rhs_masks):
    body = [[2, 1, 0], [0, 1, 0], [1, 0, -1]]
    A = SuperMatrix.from_rational(PAR, body, Z) + n.map(lambda e: e.soul())
    b = [CTX.monomial(m) for m in rhs_masks]
    x = solve_over_grassmann(A, b)
    assert A.apply(x) == b


# exponential and logarithm


@given(homogeneous_matrix())
def test_exp_matches_series_oracle(x):
    x = x.part(0).map(lambda e: e.soul())
    got = exp_nilpotent(x)
    want = oracle.mat_exp_nilpotent([[oracle.from_element(e) for e in row] for row in x.entries])
    assert [[oracle.from_element(e) for e in row] for row in got.entries] == want
    assert log_unipotent(got) == x


def test_log_rejects_non_unipotent():
    with pytest.raises(PreconditionViolated):
        log_unipotent(SuperMatrix.identity((0,), Z).scale(2))


# bilinear forms


def _vec(*entries):
    return [e if isinstance(e, GrassmannElement) else CTX.scalar(e) for e in entries]


def _gram_matches_normal_form(form, basis):
    gram = gram_of(form, basis.vectors)
    nf = basis.normal_form()
    return all(gram[i][j] == CTX.scalar(nf[i][j]) for i in range(len(nf)) for j in range(len(nf)))


def test_euclidean_completion():
    form = SuperBilinearForm(SuperMatrix.identity((0, 0), Z))
    basis = osp_complete(form, [_vec(1, 0)])
    assert basis.vectors == [_vec(1, 0), _vec(0, 1)]
    assert orthogonal_complement(form, [_vec(1, 0)]) == [_vec(0, 1)]


def test_symplectic_completion():
    omega = SuperMatrix.from_rational((1, 1), [[0, 1], [-1, 0]], Z)
    form = SuperBilinearForm(omega)
    basis = osp_complete(form, [])
    assert basis.vectors == [_vec(1, 0), _vec(0, 1)]
    assert _gram_matches_normal_form(form, basis)


def test_isotropic_candidate_rejected():
    form = SuperBilinearForm(SuperMatrix.from_rational((0, 0), [[1, 0], [0, -1]], Z))
    with pytest.raises(DegenerateRestriction):
        orthogonal_complement(form, [_vec(1, 1)])


def test_perturbed_form():
    par = (0, 0, 1, 1)
    g = SuperMatrix.from_rational(par, [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], Z)
    g.entries[0][1] = g.entries[1][0] = s1 * s2
    g.entries[0][2] = s3
    g.entries[2][0] = s3
    g.entries[2][3] = 1 + s1 * s2
    g.entries[3][2] = -(1 + s1 * s2)
    form = SuperBilinearForm(g)
    W = [_vec(1, 0, 0, 0)]
    basis = osp_complete(form, W)
    assert _gram_matches_normal_form(form, basis)
    comp = orthogonal_complement(form, W)
    assert len(comp) == 3
    assert all(form(w, c).is_zero() for w in W for c in comp)
    assert any(not e.soul().is_zero() for c in comp for e in c)
