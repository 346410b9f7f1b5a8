"""Coordinate patches, S-connections, curvature and covariant derivatives.

Frames and coordinates carry parities.  Christoffel symbols are left
coefficients, ``nabla_a e_B = sum_C Gamma[a, B, C] e_C``; the connection
matrix acting on right components is

    omega_a[C][B] = (-1)^(|C| |Gamma[a, B, C]|) Gamma[a, B, C].

A covariant derivative along coordinate ``a`` acts on a column ``s`` of right
components as ``omega_a s + J_a d_a s`` where ``J_a`` flips the sign of odd
rows when ``a`` is odd.  All sign choices below follow from these two rules.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product

from .errors import NonInvertibleMetric, NotInvertible, ParityMismatch
from .functions import SuperFunction
from .grassmann import GeneratorContext
from .superlinalg import SuperMatrix, supercommutator


@dataclass(frozen=True)
class PatchModel:
    """R^{p|q} with L generators for S and L' for T."""

    p: int
    q: int
    L: int
    Lprime: int = 0

    @cached_property
    def context(self):
        return GeneratorContext((("th", self.q), ("etaS", self.L), ("etaT", self.Lprime)))

    @property
    def evens(self):
        return tuple(f"x{j}" for j in range(1, self.p + 1))

    @property
    def dim(self):
        return self.p + self.q

    @property
    def parities(self):
        return (0,) * self.p + (1,) * self.q

    @property
    def names(self):
        return self.evens + tuple(f"th{i}" for i in range(1, self.q + 1))

    def index_of(self, name):
        return self.names.index(name)

    def theta_bit(self, a):
        return self.context.index("th", a - self.p + 1)

    def coordinate(self, a):
        if a < self.p:
            return SuperFunction.variable(self.context, self.evens, self.evens[a])
        return SuperFunction.generator(self.context, self.evens, "th", a - self.p + 1)

    def constant(self, c):
        return SuperFunction.constant(self.context, self.evens, c)

    def zero(self):
        return SuperFunction.constant(self.context, self.evens, 0)

    def partial(self, a, f):
        if a < self.p:
            return f.partial_even(self.evens[a])
        return f.left_partial(self.theta_bit(a))

    def with_lprime(self, lprime):
        return PatchModel(self.p, self.q, self.L, lprime)

    def lift(self, f):
        """Move a function into this patch's context (family sizes may differ)."""
        if f.context == self.context:
            return f
        return f.embed(self.context)


def partial_matrix(patch, a, m):
    return m.map(lambda e: patch.partial(a, e))


@dataclass
class ConnectionModel:
    """S-connection on a trivial bundle over a patch, plus an auxiliary TM connection."""

    patch: PatchModel
    frame_par: tuple
    gamma: dict
    aux: dict = field(default_factory=dict)

    def __post_init__(self):
        self.frame_par = tuple(self.frame_par)
        P = self.patch.parities
        for (a, B, C), f in self.gamma.items():
            self._check(f, P[a] ^ self.frame_par[B] ^ self.frame_par[C], ("Gamma", a, B, C))
        for (a, b, c), f in self.aux.items():
            self._check(f, P[a] ^ P[b] ^ P[c], ("aux", a, b, c))
        self.gamma = {k: self.patch.lift(v) for k, v in self.gamma.items() if not v.is_zero()}
        self.aux = {k: self.patch.lift(v) for k, v in self.aux.items() if not v.is_zero()}
        self._omega = {}

    @staticmethod
    def _check(f, want, where):
        p = f.parity()
        if p is None or (not f.is_zero() and p != want):
            raise ParityMismatch(f"{where} must have parity {want}")

    @classmethod
    def tangent(cls, patch, gamma, aux=None):
        return cls(patch, patch.parities, gamma, aux if aux is not None else {})

    @property
    def rank(self):
        return len(self.frame_par)

    def with_patch(self, patch):
        """Same data in a patch with a different T size."""
        return ConnectionModel(patch, self.frame_par,
                               {k: v.embed(patch.context) for k, v in self.gamma.items()},
                               {k: v.embed(patch.context) for k, v in self.aux.items()})

    def with_aux(self, aux):
        return ConnectionModel(self.patch, self.frame_par, dict(self.gamma), aux)

    def christoffel(self, a, B, C):
        return self.gamma.get((a, B, C), self.patch.zero())

    def aux_christoffel(self, a, b, c):
        return self.aux.get((a, b, c), self.patch.zero())

    def omega(self, a):
        got = self._omega.get(a)
        if got is None:
            fp = self.frame_par
            rows = []
            for C in range(self.rank):
                row = []
                for B in range(self.rank):
                    g = self.christoffel(a, B, C)
                    if fp[C] and g.parity():
                        g = -g
                    row.append(g)
                rows.append(row)
            got = SuperMatrix(fp, fp, rows, proto=self.patch.zero())
            self._omega[a] = got
        return got

    def is_tangent(self):
        return self.frame_par == self.patch.parities


@dataclass
class CurvatureTensor:
    """Components R[(a, b)] as endomorphism matrices over SuperFunction."""

    connection: ConnectionModel
    components: dict

    def __getitem__(self, ab):
        return self.components[ab]

    def as_tensor(self):
        return CurvatureTypeTensor(self.connection, 0, {((), a, b): m for (a, b), m in self.components.items()})


def curvature(conn):
    """R(d_a, d_b) = [nabla_a, nabla_b] as a super commutator."""
    patch = conn.patch
    P = patch.parities
    n = patch.dim
    comps = {}
    for a in range(n):
        for b in range(n):
            wa, wb = conn.omega(a), conn.omega(b)
            ab = wa @ wb + partial_matrix(patch, a, wb).row_signs(P[a])
            ba = wb @ wa + partial_matrix(patch, b, wa).row_signs(P[b])
            comps[(a, b)] = ab + ba if (P[a] and P[b]) else ab - ba
    return CurvatureTensor(conn, comps)


@dataclass
class CurvatureTypeTensor:
    """Components of nabla^k F: key (c_k, ..., c_1), a, b -> matrix."""

    connection: ConnectionModel
    order: int
    components: dict

    def component(self, dirs, a, b):
        return self.components[(tuple(dirs), a, b)]

    def two_tensor(self, dirs):
        """Fix the direction slots, leaving a 2-tensor of parity sum |c|."""
        P = self.connection.patch.parities
        n = self.connection.patch.dim
        comps = {(a, b): self.components[(tuple(dirs), a, b)] for a in range(n) for b in range(n)}
        return comps, sum(P[c] for c in dirs) & 1


def first_order_rule(comps, p_tensor, dir_par, bracket, derivative, lam, coord_par):
    """One covariant derivative of a 2-tensor G of parity p_tensor.

    comps: (a, b) -> matrix; bracket: the connection matrix of the direction;
    derivative(M): the row-signed coordinate derivative J d M; lam(a): dict h ->
    left coefficient of nabla_dir d_a along d_h.
    """
    out = {}
    d = dir_par
    for (a, b), m in comps.items():
        res = derivative(m)
        if not m.is_zero() and not bracket.is_zero():
            res = res + supercommutator(bracket, m)
        s1 = -1 if (d and p_tensor) else 1
        for h, coef in lam(a).items():
            mh = comps[(h, b)]
            if mh.is_zero():
                continue
            sg = -1 if (coef.parity() and p_tensor) else 1
            res = res - mh.left_scale(coef).scale(s1 * sg)
        s2 = -1 if (d and (p_tensor ^ coord_par[a])) else 1
        for h, coef in lam(b).items():
            mh = comps[(a, h)]
            if mh.is_zero():
                continue
            sg = -1 if (coef.parity() and (p_tensor ^ coord_par[a])) else 1
            res = res - mh.left_scale(coef).scale(s2 * sg)
        out[(a, b)] = res
    return out


def covariant_derivative_2tensor(conn, comps, p_tensor, z):
    """(nabla_z G)(d_a, d_b) for a 2-tensor field G given by components."""
    patch = conn.patch
    P = patch.parities

    def derivative(m):
        return partial_matrix(patch, z, m).row_signs(P[z])

    def lam(a):
        return {h: conn.aux_christoffel(z, a, h) for h in range(patch.dim)
                if not conn.aux_christoffel(z, a, h).is_zero()}

    return first_order_rule(comps, p_tensor, P[z], conn.omega(z), derivative, lam, P)


def higher_covariant_derivative(conn, F, k, convention="literal"):
    """All components of nabla^k F for a curvature-type tensor F.

    F may be a CurvatureTensor or an order-0 CurvatureTypeTensor.  The
    correction terms for derivatives falling on direction slots carry the sign
    (-1)^(|Y_{k+1}| (|Y_k| + ... + |Y_1|)) by default; convention="positional"
    uses only the directions to the left of the slot hit.
    """
    if isinstance(F, CurvatureTensor):
        F = F.as_tensor()
    patch = conn.patch
    P = patch.parities
    n = patch.dim
    current = F
    for level in range(F.order, k):
        comps = {}
        for dirs in product(range(n), repeat=level):
            two, p_g = current.two_tensor(dirs)
            for z in range(n):
                derived = covariant_derivative_2tensor(conn, two, p_g, z)
                for (a, b), m in derived.items():
                    res = m
                    for j in range(level):
                        # dirs = (c_level, ..., c_1); slot position j counts from the left
                        cj = dirs[j]
                        if convention == "literal":
                            sj = -1 if (P[z] and p_g) else 1
                        else:
                            sj = -1 if (P[z] and sum(P[c] for c in dirs[:j]) & 1) else 1
                        before = sum(P[c] for c in dirs[:j]) & 1
                        for h in range(n):
                            coef = conn.aux_christoffel(z, cj, h)
                            if coef.is_zero():
                                continue
                            nd = dirs[:j] + (h,) + dirs[j + 1:]
                            mh = current.components[(nd, a, b)]
                            if mh.is_zero():
                                continue
                            sg = -1 if (coef.parity() and before) else 1
                            res = res - mh.left_scale(coef).scale(sj * sg)
                    comps[((z,) + dirs, a, b)] = res
        current = CurvatureTypeTensor(conn, level + 1, comps)
    return current


def evaluate_two_tensor(comps, p_tensor, coord_par, u, v, proto):
    """G(u, v) for left-component vectors u, v (lists of ring elements)."""
    out = None
    for (a, b), m in comps.items():
        ua, vb = u[a], v[b]
        if ua.is_zero() or vb.is_zero() or m.is_zero():
            continue
        pu, pv = ua.parity(), vb.parity()
        s = -1 if ((pu and p_tensor) ^ (pv and (p_tensor ^ coord_par[a]))) else 1
        term = m.left_scale(ua * vb).scale(s)
        out = term if out is None else out + term
    if out is None:
        any_m = next(iter(comps.values()))
        out = SuperMatrix.zero(any_m.row_par, any_m.col_par, proto)
    return out


def right_to_left(vec, coord_par):
    """Convert right components (e_a u^a) to left components (u^a e_a)."""
    out = []
    for a, c in enumerate(vec):
        if coord_par[a] and c.parity():
            out.append(-c)
        else:
            out.append(c)
    return out


def torsion(conn):
    """T(d_a, d_b) as left components over the coordinate frame."""
    if not conn.is_tangent():
        raise ValueError("torsion needs a connection on TM")
    patch = conn.patch
    P = patch.parities
    n = patch.dim
    out = {}
    for a in range(n):
        for b in range(n):
            s = -1 if (P[a] and P[b]) else 1
            out[(a, b)] = [conn.christoffel(a, b, c) - conn.christoffel(b, a, c) * s for c in range(n)]
    return out


def is_torsion_free(conn):
    return all(c.is_zero() for v in torsion(conn).values() for c in v)


@dataclass
class MetricModel:
    """Gram components g[(a, b)] = g(d_a, d_b) on the tangent bundle."""

    patch: PatchModel
    gram: dict

    def __post_init__(self):
        P = self.patch.parities
        n = self.patch.dim
        self.gram = {k: self.patch.lift(v) for k, v in self.gram.items()}
        for a in range(n):
            for b in range(n):
                g = self.entry(a, b)
                if g.parity() not in (None, P[a] ^ P[b]) and not g.is_zero():
                    raise ParityMismatch(f"g[{a},{b}] has the wrong parity")
                if g.parity() is None:
                    raise ParityMismatch(f"g[{a},{b}] is inhomogeneous")
                s = -1 if (P[a] and P[b]) else 1
                if g != self.entry(b, a) * s:
                    raise ParityMismatch("metric is not supersymmetric")

    def entry(self, a, b):
        return self.gram.get((a, b), self.patch.zero())

    def matrix(self):
        P = self.patch.parities
        n = self.patch.dim
        return SuperMatrix(P, P, [[self.entry(a, b) for b in range(n)] for a in range(n)], proto=self.patch.zero())

    def inverse(self):
        try:
            return self.matrix().inverse()
        except NotInvertible as exc:
            raise NonInvertibleMetric(str(exc)) from exc

    def with_patch(self, patch):
        return MetricModel(patch, {k: v.embed(patch.context) for k, v in self.gram.items()})

    def pair(self, u, v):
        """g(u, v) for left-component vector fields."""
        P = self.patch.parities
        acc = self.patch.zero()
        for a, ua in enumerate(u):
            if ua.is_zero():
                continue
            for b, vb in enumerate(v):
                if vb.is_zero():
                    continue
                g = self.entry(a, b)
                if g.is_zero():
                    continue
                s = -1 if (P[a] and vb.parity()) else 1
                acc = acc + ua * vb * g * s
        return acc


def levi_civita(metric, aux=None):
    """Torsion-free metric connection via the Koszul formula.

    Lowered symbols Gamma_abc = g(nabla_a d_b, d_c) are
    (X_abc + (-1)^(|a||b|) X_bac - (-1)^(|c|(|a|+|b|)) X_cab) / 2 with X_abc = d_a g_bc.
    """
    patch = metric.patch
    P = patch.parities
    n = patch.dim
    inv = metric.inverse()
    X = {(a, b, c): patch.partial(a, metric.entry(b, c)) for a in range(n) for b in range(n) for c in range(n)}
    gamma = {}
    half = Fraction(1, 2)
    for a in range(n):
        for b in range(n):
            low = []
            for c in range(n):
                s1 = -1 if (P[a] and P[b]) else 1
                s2 = -1 if (P[c] and (P[a] ^ P[b])) else 1
                low.append((X[(a, b, c)] + X[(b, a, c)] * s1 - X[(c, a, b)] * s2) * half)
            for e in range(n):
                acc = patch.zero()
                for c in range(n):
                    h = inv.entries[c][e]
                    if not low[c].is_zero() and not h.is_zero():
                        acc = acc + low[c] * h
                if not acc.is_zero():
                    gamma[(a, b, e)] = acc
    return ConnectionModel.tangent(patch, gamma, aux)


def metric_defect(conn, metric):
    """d_a g_bc - g(nabla_a d_b, d_c) - (-1)^(|a||b|) g(d_b, nabla_a d_c); all zero iff metric."""
    patch = conn.patch
    P = patch.parities
    n = patch.dim
    out = {}
    for a in range(n):
        for b in range(n):
            for c in range(n):
                lhs = patch.partial(a, metric.entry(b, c))
                nab = [conn.christoffel(a, b, d) for d in range(n)]
                nac = [conn.christoffel(a, c, d) for d in range(n)]
                eb = [patch.constant(int(d == b)) for d in range(n)]
                ec = [patch.constant(int(d == c)) for d in range(n)]
                s = -1 if (P[a] and P[b]) else 1
                out[(a, b, c)] = lhs - metric.pair(nab, ec) - metric.pair(eb, nac) * s
    return out


def product_patch(p1, p2):
    if p1.L != p2.L:
        raise ValueError("factors must share S")
    return PatchModel(p1.p + p2.p, p1.q + p2.q, p1.L, max(p1.Lprime, p2.Lprime))


def factor_embedding(src, dst, even_shift, odd_shift):
    """Coordinate map and function transport from a factor patch into a product patch."""
    coords = {}
    for a in range(src.dim):
        coords[a] = a + even_shift if a < src.p else dst.p + odd_shift + (a - src.p)
    bit_map = {}
    for b in range(src.context.total):
        fam, i = src.context.locate(b)
        bit_map[b] = dst.context.index(fam, i + odd_shift if fam == "th" else i)

    def move(f):
        out = {}
        for (e, m), c in f.terms.items():
            ne = [0] * dst.p
            for i, k in enumerate(e):
                ne[even_shift + i] = k
            g = src.context.monomial(m, c).embed(dst.context, bit_map)
            for nm, nc in g.terms.items():
                key = (tuple(ne), nm)
                out[key] = out.get(key, 0) + nc
        return SuperFunction(dst.context, dst.evens, out)

    return coords, move


def product_connection(first, second):
    """Tangent connection of a product; even coordinates first, then odd, factor by factor."""
    p1, p2 = first.patch, second.patch
    patch = product_patch(p1, p2)
    maps = [factor_embedding(p1, patch, 0, 0), factor_embedding(p2, patch, p1.p, p1.q)]
    gamma = {}
    aux = {}
    for conn, (m, move) in zip((first, second), maps):
        for (a, b, c), f in conn.gamma.items():
            gamma[(m[a], m[b], m[c])] = move(f)
        for (a, b, c), f in conn.aux.items():
            aux[(m[a], m[b], m[c])] = move(f)
    return ConnectionModel.tangent(patch, gamma, aux), maps[0], maps[1]


def product_metric(first, second):
    p1, p2 = first.patch, second.patch
    patch = product_patch(p1, p2)
    maps = [factor_embedding(p1, patch, 0, 0), factor_embedding(p2, patch, p1.p, p1.q)]
    gram = {}
    for met, (m, move) in zip((first, second), maps):
        for (a, b), f in met.gram.items():
            gram[(m[a], m[b])] = move(f)
    return MetricModel(patch, gram), maps[0], maps[1]
