"""Supermatrices over Grassmann and function rings, Lie closure, OSp bases.

Conventions.  A supermatrix acts on column vectors of right components:
row ``C`` and column ``B`` have block parities, a homogeneous matrix of parity
``p`` has entries of parity ``p + |C| + |B|``, and products are ordinary
matrix products.  Multiplying by a scalar ``f`` from the left means
``(f . M)[C][B] = (-1)^(|f||C|) f M[C][B]``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

from .errors import (
    DegenerateRestriction,
    InhomogeneousInput,
    NoSolution,
    NotInvertible,
    PreconditionViolated,
)
from .grassmann import GrassmannElement, coefficient_split_left, parity_of
from .linalg import Echelon, inverse_dense, solve_dense


def _constant_terms(entry):
    """Mask -> coefficient for a generator-only entry."""
    if isinstance(entry, GrassmannElement):
        return entry.terms
    if not entry.is_constant():
        raise ValueError("entry depends on even variables")
    return {m: c for (_, m), c in entry.terms.items()}


class SuperMatrix:
    __slots__ = ("row_par", "col_par", "entries", "proto")

    def __init__(self, row_par, col_par, entries, proto=None):
        self.row_par = tuple(row_par)
        self.col_par = tuple(col_par)
        self.entries = [list(r) for r in entries]
        if proto is None:
            proto = self.entries[0][0].zero_like()
        self.proto = proto
        if len(self.entries) != len(self.row_par) or any(len(r) != len(self.col_par) for r in self.entries):
            raise ValueError("entry table does not match block shape")

    # constructors

    @classmethod
    def zero(cls, row_par, col_par, proto):
        z = proto.zero_like()
        return cls(row_par, col_par, [[z for _ in col_par] for _ in row_par], proto=z)

    @classmethod
    def identity(cls, par, proto):
        z = proto.zero_like()
        one = proto.one_like()
        return cls(par, par, [[one if i == j else z for j in range(len(par))] for i in range(len(par))], proto=z)

    @classmethod
    def elementary(cls, par, i, j, value):
        m = cls.zero(par, par, value)
        m.entries[i][j] = value
        return m

    @classmethod
    def from_rational(cls, par, rows, proto):
        return cls(par, par, [[proto.scalar_like(v) for v in r] for r in rows], proto=proto.zero_like())

    @property
    def shape(self):
        return len(self.row_par), len(self.col_par)

    @property
    def is_square(self):
        return self.row_par == self.col_par

    def copy(self):
        return SuperMatrix(self.row_par, self.col_par, [list(r) for r in self.entries], self.proto)

    def map(self, fn):
        return SuperMatrix(self.row_par, self.col_par, [[fn(e) for e in r] for r in self.entries],
                           fn(self.proto))

    # arithmetic

    def _same_shape(self, other):
        if self.row_par != other.row_par or self.col_par != other.col_par:
            raise ValueError("block shapes differ")

    def __add__(self, other):
        self._same_shape(other)
        return SuperMatrix(self.row_par, self.col_par,
                           [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
                           self.proto)

    def __sub__(self, other):
        self._same_shape(other)
        return SuperMatrix(self.row_par, self.col_par,
                           [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
                           self.proto)

    def __neg__(self):
        return SuperMatrix(self.row_par, self.col_par, [[-a for a in r] for r in self.entries], self.proto)

    def __matmul__(self, other):
        if self.col_par != other.row_par:
            raise ValueError("inner block shapes differ")
        n = len(self.col_par)
        out = []
        for i in range(len(self.row_par)):
            row = []
            ri = self.entries[i]
            for j in range(len(other.col_par)):
                acc = self.proto
                for k in range(n):
                    a = ri[k]
                    if a:
                        b = other.entries[k][j]
                        if b:
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        return SuperMatrix(self.row_par, other.col_par, out, self.proto)

    def scale(self, c):
        """Multiply by a rational."""
        c = Fraction(c)
        return SuperMatrix(self.row_par, self.col_par, [[a * c for a in r] for r in self.entries], self.proto)

    def left_scale(self, f):
        """f . M with the row sign; f may be inhomogeneous."""
        out = [[self.proto for _ in self.col_par] for _ in self.row_par]
        for p in (0, 1):
            fp = f.part(p)
            if fp.is_zero():
                continue
            for i, rp in enumerate(self.row_par):
                s = -1 if (p and rp) else 1
                for j, a in enumerate(self.entries[i]):
                    if a:
                        out[i][j] = out[i][j] + (fp * a) * s
        return SuperMatrix(self.row_par, self.col_par, out, self.proto)

    def row_signs(self, p):
        """Multiply row C by (-1)^(p|C|)."""
        if not p:
            return self
        return SuperMatrix(self.row_par, self.col_par,
                           [[-a for a in r] if rp else list(r) for r, rp in zip(self.entries, self.row_par)],
                           self.proto)

    def apply(self, vec):
        """Matrix times a column of right components."""
        out = []
        for r in self.entries:
            acc = self.proto
            for a, v in zip(r, vec):
                if a and v:
                    acc = acc + a * v
            out.append(acc)
        return out

    def __eq__(self, other):
        if not isinstance(other, SuperMatrix):
            return NotImplemented
        return (self.row_par == other.row_par and self.col_par == other.col_par
                and all(a == b for r1, r2 in zip(self.entries, other.entries) for a, b in zip(r1, r2)))

    def __hash__(self):
        return hash((self.row_par, self.col_par, tuple(tuple(r) for r in self.entries)))

    def __repr__(self):
        from .parser import format_any

        rows = "; ".join(", ".join(format_any(e) for e in r) for r in self.entries)
        return f"SuperMatrix[{rows}]"

    # structure

    def is_zero(self):
        return all(a.is_zero() for r in self.entries for a in r)

    def parity(self):
        """Block parity of a homogeneous matrix (zero counts as even); None otherwise."""
        seen = set()
        for i, rp in enumerate(self.row_par):
            for j, cp in enumerate(self.col_par):
                a = self.entries[i][j]
                if a.is_zero():
                    continue
                p = a.parity()
                if p is None:
                    return None
                seen.add(p ^ rp ^ cp)
        if not seen:
            return 0
        return seen.pop() if len(seen) == 1 else None

    def part(self, p):
        out = []
        for i, rp in enumerate(self.row_par):
            out.append([a.part(p ^ rp ^ cp) for a, cp in zip(self.entries[i], self.col_par)])
        return SuperMatrix(self.row_par, self.col_par, out, self.proto)

    def body(self):
        """Rational body matrix; None when a body depends on even variables."""
        out = []
        for r in self.entries:
            row = []
            for a in r:
                if isinstance(a, GrassmannElement):
                    row.append(a.body())
                else:
                    b = a.body_constant()
                    if b is None:
                        return None
                    row.append(b)
            out.append(row)
        return out

    def transpose_entries(self):
        return SuperMatrix(self.col_par, self.row_par,
                           [[self.entries[i][j] for i in range(len(self.row_par))] for j in range(len(self.col_par))],
                           self.proto)

    def flatten(self):
        """Rational coordinates keyed by (row, column, monomial mask)."""
        out = {}
        for i, r in enumerate(self.entries):
            for j, a in enumerate(r):
                for m, c in _constant_terms(a).items():
                    out[(i, j, m)] = c
        return out

    @classmethod
    def from_flat(cls, vec, row_par, col_par, context):
        rows = [[{} for _ in col_par] for _ in row_par]
        for (i, j, m), c in vec.items():
            rows[i][j][m] = c
        return cls(row_par, col_par, [[GrassmannElement(context, t) for t in r] for r in rows],
                   proto=context.zero())

    def to_grassmann(self, context=None):
        def conv(a):
            if isinstance(a, GrassmannElement):
                return a
            return a.to_grassmann()
        return SuperMatrix(self.row_par, self.col_par, [[conv(a) for a in r] for r in self.entries],
                           conv(self.proto))

    def inverse(self):
        """Exact inverse for a square matrix with invertible constant body."""
        if not self.is_square:
            raise ValueError("not square")
        body = self.body()
        if body is None:
            raise NotInvertible("body depends on even variables")
        inv0 = inverse_dense(body)
        if inv0 is None:
            raise NotInvertible("body matrix is singular")
        b_inv = SuperMatrix.from_rational(self.row_par, inv0, self.proto)
        ident = SuperMatrix.identity(self.row_par, self.proto)
        # self = B (1 + B^-1 N), N nilpotent
        nil = b_inv @ self - ident
        result = ident
        power = ident
        while True:
            power = -(power @ nil)
            if power.is_zero():
                break
            result = result + power
        return result @ b_inv


def supercommutator(x, y):
    px, py = x.parity(), y.parity()
    if px is None or py is None:
        raise InhomogeneousInput("supercommutator needs homogeneous matrices")
    xy = x @ y
    yx = y @ x
    return xy + yx if px and py else xy - yx


def left_scale(f, m):
    return m.left_scale(f)


def homogeneous_parts(m):
    return [m.part(p) for p in (0, 1) if not m.part(p).is_zero()]


@dataclass
class LieSubalgebra:
    """A rational subspace of gl(r|s) over a Grassmann algebra, in echelon form."""

    row_par: tuple
    context: object
    echelon: Echelon = field(default_factory=Echelon)
    provenance: list = field(default_factory=list)
    closed: bool = False

    @property
    def dim(self):
        return self.echelon.rank

    def basis(self):
        return [SuperMatrix.from_flat(v, self.row_par, self.row_par, self.context) for v in self.echelon.basis()]

    def contains(self, m):
        return self.echelon.contains(m.flatten())

    def contains_all(self, other):
        return all(self.echelon.contains(v) for v in other.echelon.rows.values())

    def canonical(self):
        return self.echelon.canonical()

    def copy(self):
        return LieSubalgebra(self.row_par, self.context, self.echelon.copy(), list(self.provenance), self.closed)

    def is_closed(self):
        b = self.basis()
        for i, a in enumerate(b):
            for c in b[i:]:
                if not self.contains(supercommutator(a, c)):
                    return False
        return True


def span_of(matrices, row_par, context, provenance=None):
    """Rational span (no closure) of homogeneous parts of the given matrices."""
    alg = LieSubalgebra(tuple(row_par), context)
    for m in matrices:
        alg.echelon.add(m.flatten())
    if provenance:
        alg.provenance.extend(provenance)
    return alg


def lie_closure(generators, row_par=None, context=None, provenance=None):
    """Smallest bracket-closed rational span containing the generators.

    Breadth-first rounds: every new element is bracketed against everything
    found so far; a round that adds nothing ends the loop.
    """
    gens = list(generators)
    if row_par is None:
        row_par = gens[0].row_par
        context = gens[0].proto.context
    alg = LieSubalgebra(tuple(row_par), context)
    ech = alg.echelon
    elems = []
    frontier = []
    for g in gens:
        g = g.to_grassmann() if not isinstance(g.proto, GrassmannElement) else g
        for part in homogeneous_parts(g):
            if ech.add(part.flatten()):
                frontier.append(part)
    rounds = 0
    while frontier:
        rounds += 1
        old = elems
        elems = elems + frontier
        nxt = []
        for i, a in enumerate(frontier):
            for b in old + frontier[i:]:
                c = supercommutator(a, b)
                if not c.is_zero() and ech.add(c.flatten()):
                    nxt.append(c)
        frontier = nxt
    alg.closed = True
    alg.provenance = list(provenance or []) + [("rounds", rounds)]
    return alg


def span_equal(a, b):
    if a.row_par != b.row_par:
        return False
    return a.canonical() == b.canonical()


def dress(matrices, monomials):
    """All m . X for the given monomial masks (as Grassmann elements)."""
    out = []
    for x in matrices:
        for m in monomials:
            y = x.left_scale(m)
            if not y.is_zero():
                out.append(y)
    return out


# Solving over a Grassmann algebra


def _solve_body(body, rhs_terms, ncols):
    """Per-monomial rational solve; rhs_terms: list over rows of {mask: c}."""
    masks = sorted({m for t in rhs_terms for m in t})
    out = [dict() for _ in range(ncols)]
    for m in masks:
        b = [t.get(m, Fraction(0)) for t in rhs_terms]
        x = solve_dense(body, b)
        if x is None:
            raise NoSolution("system has no solution")
        for j, v in enumerate(x):
            if v:
                out[j][m] = v
    return out


def solve_over_grassmann(a, b):
    """Solve a x = b for a column x of right components.

    The body of `a` must have full column rank; the solution is then unique
    and built order by order in the nilpotent part.
    """
    body = a.body()
    if body is None:
        raise PreconditionViolated("system body depends on even variables")
    ncols = len(a.col_par)
    if ncols and Echelon([{i: row[j] for i, row in enumerate(body) if row[j]} for j in range(ncols)]).rank < ncols:
        raise PreconditionViolated("body matrix lacks full column rank")
    ctx = a.proto.context
    x = [ctx.zero() for _ in range(ncols)]
    for _ in range(ctx.total + 2):
        res = [bi - ai for bi, ai in zip(b, a.apply(x))]
        if all(r.is_zero() for r in res):
            return x
        corr = _solve_body(body, [r.terms for r in res], ncols)
        x = [xi + GrassmannElement(ctx, c) for xi, c in zip(x, corr)]
    raise NoSolution("system has no solution")


# Bilinear forms and OSp bases


def pair(gram, par, u, v):
    """g(u, v) for vectors given by left components u = sum u^a e_a."""
    acc = gram.proto
    for a, ua in enumerate(u):
        if ua.is_zero():
            continue
        for b, vb in enumerate(v):
            if vb.is_zero() or gram.entries[a][b].is_zero():
                continue
            s = -1 if (par[a] and vb.parity()) else 1
            acc = acc + ua * vb * gram.entries[a][b] * s
    return acc


@dataclass
class SuperBilinearForm:
    gram: SuperMatrix

    def __post_init__(self):
        g = self.gram
        if g.parity() != 0:
            raise PreconditionViolated("form must be even")
        par = g.row_par
        for a in range(len(par)):
            for b in range(len(par)):
                s = -1 if (par[a] and par[b]) else 1
                if g.entries[a][b] != g.entries[b][a] * s:
                    raise PreconditionViolated("form is not supersymmetric")
        body = g.body()
        if body is None or inverse_dense(body) is None:
            raise PreconditionViolated("form body is degenerate")

    @property
    def parities(self):
        return self.gram.row_par

    def __call__(self, u, v):
        return pair(self.gram, self.parities, u, v)


def _vector_parity(vec, par):
    ps = set()
    for a, c in zip(par, vec):
        if not c.is_zero():
            p = c.parity()
            if p is None:
                return None
            ps.add(p ^ a)
    if not ps:
        return 0
    return ps.pop() if len(ps) == 1 else None


def _scale_vec(c, vec):
    return [c * x for x in vec]


def _sub_vec(u, v):
    return [a - b for a, b in zip(u, v)]


def _add_vec(u, v):
    return [a + b for a, b in zip(u, v)]


def _sqrt_rational(q):
    q = Fraction(q)
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn != n or rd * rd != d:
        return None
    return Fraction(rn, rd)


def _grassmann_sqrt_inverse(a):
    """1/sqrt(a) for a with positive rational square body."""
    b = a.body()
    root = _sqrt_rational(b)
    if root is None:
        raise PreconditionViolated(f"normalising needs sqrt({b}), which is irrational")
    n = a * (1 / b) - 1
    # (1 + n)^(-1/2) = sum binom(-1/2, k) n^k
    out = a.one_like()
    power = a.one_like()
    coeff = Fraction(1)
    k = 0
    while True:
        k += 1
        coeff = coeff * (Fraction(-1, 2) - (k - 1)) / k
        power = power * n
        if power.is_zero():
            break
        out = out + power * coeff
    return out * (1 / root)


@dataclass
class OSpBasis:
    vectors: list
    roles: list  # ("even", +1 / -1) or ("odd", k, 1 / 2)
    w_count: int

    def normal_form(self):
        n = len(self.vectors)
        out = [[Fraction(0)] * n for _ in range(n)]
        partner = {}
        for i, r in enumerate(self.roles):
            if r[0] == "even":
                out[i][i] = Fraction(r[1])
            else:
                partner.setdefault(r[1], {})[r[2]] = i
        for pairs in partner.values():
            i, j = pairs[1], pairs[2]
            out[i][j] = Fraction(1)
            out[j][i] = Fraction(-1)
        return out


class _Builder:
    """Super Gram-Schmidt against an already normalised family."""

    def __init__(self, form):
        self.form = form
        self.par = form.parities
        self.vectors = []
        self.roles = []
        self.pair_count = 0

    def project(self, v):
        pv = _vector_parity(v, self.par)
        out = list(v)
        index = {}
        for i, r in enumerate(self.roles):
            if r[0] == "odd":
                index[(r[1], r[2])] = i
        for i, (r, e) in enumerate(zip(self.roles, self.vectors)):
            gv = self.form(e, v)
            if gv.is_zero():
                continue
            if r[0] == "even":
                # g(e, c e) = c * eps with c of parity pv
                c = gv * r[1]
                out = _sub_vec(out, _scale_vec(c, e))
            else:
                k, slot = r[1], r[2]
                other = self.vectors[index[(k, 3 - slot)]]
                cpar = pv ^ 1
                sign = -1 if cpar else 1
                # g(f1, c f2) = (-1)^|c| c;  g(f2, c f1) = -(-1)^|c| c
                c = gv * sign if slot == 1 else gv * (-sign)
                out = _sub_vec(out, _scale_vec(c, other))
        return out

    def add_even(self, v):
        gvv = self.form(v, v)
        b = gvv.body()
        if not b:
            return False
        eps = 1 if b > 0 else -1
        scale = _grassmann_sqrt_inverse(gvv * eps)
        self.vectors.append(_scale_vec(scale, v))
        self.roles.append(("even", eps))
        return True

    def add_odd_pair(self, v, w):
        gvw = self.form(v, w)
        if not gvw.body():
            return False
        self.pair_count += 1
        k = self.pair_count
        self.vectors.append(v)
        self.roles.append(("odd", k, 1))
        w2 = _scale_vec(gvw.invert(), w)
        self.vectors.append(w2)
        self.roles.append(("odd", k, 2))
        return True


def _absorb(builder, cands, strict):
    """Normalise a candidate family; strict means every candidate must be used."""
    par = builder.par
    evens = [c for c in cands if _vector_parity(c, par) == 0]
    odds = [c for c in cands if _vector_parity(c, par) == 1]
    if any(_vector_parity(c, par) is None for c in cands):
        raise PreconditionViolated("vectors must be homogeneous")
    # even vectors, combining with later ones when isotropic
    pending = list(evens)
    while pending:
        v = builder.project(pending.pop(0))
        if all(x.is_zero() for x in v):
            if strict:
                raise DegenerateRestriction("vectors are not independent")
            continue
        if builder.add_even(v):
            continue
        fixed = False
        for j, w in enumerate(pending):
            for s in (1, -1):
                trial = builder.project(_add_vec(v, _scale_vec(Fraction(s), w)))
                if builder.form(trial, trial).body():
                    builder.add_even(trial)
                    pending[j] = v  # the span is kept: v stays a candidate
                    fixed = True
                    break
            if fixed:
                break
        if not fixed and strict:
            raise DegenerateRestriction("restricted form is degenerate on the even part")
    pending = list(odds)
    while pending:
        v = builder.project(pending.pop(0))
        if all(x.is_zero() for x in v):
            if strict:
                raise DegenerateRestriction("vectors are not independent")
            continue
        found = None
        for j, w in enumerate(pending):
            w = builder.project(w)
            if builder.form(v, w).body():
                found = j
                break
        if found is None:
            if strict:
                raise DegenerateRestriction("restricted form is degenerate on the odd part")
            continue
        w = builder.project(pending.pop(found))
        builder.add_odd_pair(v, w)


def _unit_vectors(form, proto):
    par = form.parities
    n = len(par)
    ctx = proto.context
    return [[ctx.one() if i == j else ctx.zero() for i in range(n)] for j in range(n)]


def osp_complete(form, w_vectors):
    """OSp basis whose leading vectors span the free submodule W."""
    proto = form.gram.proto
    builder = _Builder(form)
    w_vectors = [list(v) for v in w_vectors]
    _absorb(builder, w_vectors, strict=True)
    w_count = len(builder.vectors)
    # independence of W's body vectors is enforced by strictness above
    _absorb(builder, _unit_vectors(form, proto), strict=False)
    n = len(form.parities)
    if len(builder.vectors) != n:
        raise DegenerateRestriction("could not complete to a full basis")
    return OSpBasis(builder.vectors, builder.roles, w_count)


def orthogonal_complement(form, w_vectors):
    basis = osp_complete(form, w_vectors)
    return basis.vectors[basis.w_count:]


def gram_of(form, vectors):
    return [[form(u, v) for v in vectors] for u in vectors]


def body_rank(vectors):
    rows = [{a: c.body() for a, c in enumerate(v) if c.body()} for v in vectors]
    return Echelon(rows).rank


__all__ = [
    "SuperMatrix", "supercommutator", "left_scale", "LieSubalgebra", "lie_closure", "span_of",
    "span_equal", "dress", "solve_over_grassmann", "SuperBilinearForm", "osp_complete",
    "orthogonal_complement", "OSpBasis", "gram_of", "body_rank", "pair", "parity_of",
]


def coefficient_matrices(m, family):
    """Split M = sum_I eta^I . M^I over a generator family (left convention)."""
    out = {}
    for i, row in enumerate(m.entries):
        rp = m.row_par[i]
        for j, e in enumerate(row):
            for fmask, h in coefficient_split_left(e, family).items():
                mat = out.get(fmask)
                if mat is None:
                    mat = out[fmask] = SuperMatrix.zero(m.row_par, m.col_par, m.proto)
                s = -1 if (rp and parity_of(fmask)) else 1
                mat.entries[i][j] = h if s == 1 else -h
    return out


def drop_family(m, family):
    """Set all generators of a family to zero."""
    def cut(e):
        fm = e.context.family_mask(family)
        return GrassmannElement(e.context, {k: c for k, c in e.terms.items() if not k & fm})
    return m.map(cut)


def exp_nilpotent(x):
    """exp(X) for X with nilpotent entries (terminating series)."""
    ident = SuperMatrix.identity(x.row_par, x.proto)
    total = ident
    term = ident
    k = 0
    while True:
        k += 1
        term = (term @ x).scale(Fraction(1, k))
        if term.is_zero():
            return total
        total = total + term


def log_unipotent(u):
    """log(U) for U - 1 nilpotent (terminating series)."""
    ident = SuperMatrix.identity(u.row_par, u.proto)
    n = u - ident
    if n.body() is None or any(any(v for v in r) for r in n.body()):
        raise PreconditionViolated("matrix is not unipotent")
    total = SuperMatrix.zero(u.row_par, u.col_par, u.proto)
    power = ident
    k = 0
    while True:
        k += 1
        power = power @ n
        if power.is_zero():
            return total
        total = total + power.scale(Fraction((-1) ** (k + 1), k))
