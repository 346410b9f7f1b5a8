"""Holonomy algebras of an S-connection, their comparison and invariance tests.

Three algebras are computed from finite samples of points and paths:

* the functorial algebra hol_x(T) inside gl(O_{S x T}), generated by
  conjugated curvature P^-1 R_y(u, v) P with even vectors u, v;
* Galaev's algebra inside gl(O_S), generated by conjugated higher covariant
  derivatives of the curvature at S-points;
* the coefficient algebra, spanned by the T-coefficient matrices of the first.

Generators are sampled along user paths and along straight lines to the
special points, which is what makes the finite samples complete.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .errors import NotFree, PreconditionViolated, SpecInsufficient
from .geometry import curvature, evaluate_two_tensor, higher_covariant_derivative
from .grassmann import bits, parity_of
from .linalg import Echelon
from .superlinalg import (
    SuperMatrix,
    coefficient_matrices,
    exp_nilpotent,
    lie_closure,
    log_unipotent,
    solve_over_grassmann,
    span_equal,
    span_of,
)
from .transport import (
    PathModel,
    SPoint,
    parallel_transport,
    pull_back_tensor,
    pullback_covariant_derivative,
    special_point,
    special_point_size,
)


@dataclass
class SampleSpec:
    """Finite sample of the data quantified over in the holonomy definitions.

    s_paths/s_loops live over S only; t_paths/t_loops may use etaT generators.
    The constant path at the base point is always included.
    """

    base: SPoint
    s_paths: list = field(default_factory=list)
    s_loops: list = field(default_factory=list)
    t_paths: list = field(default_factory=list)
    t_loops: list = field(default_factory=list)
    kmax: int = 3
    special_points: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.base.depends_on_T():
            raise PreconditionViolated("the base point must be an S-point")
        base0 = _strip_T_point(self.base)
        for p in list(self.s_paths) + list(self.s_loops) + list(self.t_paths) + list(self.t_loops):
            if _strip_T_point(p.start) != base0:
                raise PreconditionViolated("every sampled path must start at the base point")
        for p in list(self.s_loops) + list(self.t_loops):
            if not p.is_loop():
                raise PreconditionViolated("loop sample is not closed")
        for p in list(self.s_paths) + list(self.s_loops):
            if _uses_T(p):
                raise PreconditionViolated("S-paths must not involve etaT generators")


def _strip_T_point(pt):
    patch0 = pt.patch.with_lprime(0)
    return pt.restrict_T().with_patch(patch0)


def _uses_T(path):
    tm = path.patch.context.family_mask("etaT")
    return any(f.odd_support() & tm for seg in path.segments for f in seg)


def _max_T_index(path):
    ctx = path.patch.context
    tm = ctx.family_mask("etaT")
    top = 0
    for seg in path.segments:
        for f in seg:
            for b in bits(f.odd_support() & tm):
                top = max(top, ctx.locate(b)[1])
    return top


def _fit_path(path, patch):
    if _max_T_index(path) > patch.Lprime:
        return None
    return path.with_patch(patch)


def _valid_masks(full, pi, delta):
    """Monomials m with parity pi and degree >= delta inside `full`."""
    idx = bits(full)
    out = []
    for r in range(len(idx) + 1):
        if (r & 1) != pi or r < delta:
            continue
        for combo in combinations(idx, r):
            m = 0
            for b in combo:
                m |= 1 << b
            out.append(m)
    return out


def _exists_valid_disjoint(full, avoid, pi, delta):
    """Is there a valid monomial inside full that misses `avoid`?"""
    free = (full & ~avoid).bit_count()
    if pi:
        return free >= 1
    return free >= delta


class HolonomyEngine:
    """Caches connections, transports and curvature for one sample spec."""

    def __init__(self, conn, spec, convention="literal"):
        patch0 = conn.patch.with_lprime(0)
        self.conn0 = conn if conn.patch == patch0 else conn.with_patch(patch0)
        self.spec = spec
        self.convention = convention
        self._conns = {0: self.conn0}
        self._curv = {}
        self._tower = [curvature(self.conn0).as_tensor()]
        self._transports = {}

    # plumbing

    @property
    def patch0(self):
        return self.conn0.patch

    @property
    def frame(self):
        return self.conn0.frame_par

    @property
    def context0(self):
        return self.patch0.context

    def patch(self, lp):
        return self.patch0.with_lprime(lp)

    def connection(self, lp):
        got = self._conns.get(lp)
        if got is None:
            got = self._conns[lp] = self.conn0.with_patch(self.patch(lp))
        return got

    def curvature(self, lp):
        got = self._curv.get(lp)
        if got is None:
            got = self._curv[lp] = curvature(self.connection(lp))
        return got

    def base(self, lp=0):
        return _strip_T_point(self.spec.base).with_patch(self.patch(lp))

    def s_paths(self):
        return [PathModel.constant(self.base(0))] + [p.with_patch(self.patch0) for p in self.spec.s_paths]

    def transport(self, path, lp):
        key = (lp, id(path))
        got = self._transports.get(key)
        if got is None or got[0] is not path:
            op = parallel_transport(self.connection(lp), path, mode="exact")
            got = (path, op.matrix, op.matrix.inverse())
            self._transports[key] = got
        return got[1], got[2]

    def to_base(self, m):
        ctx = self.context0
        return m.map(lambda e: e.embed(ctx))

    def s_monomials(self, ctx=None):
        ctx = ctx or self.context0
        return [ctx.monomial(m) for m in ctx.monomials("etaS")]

    def tower(self, k):
        while len(self._tower) <= k:
            nxt = higher_covariant_derivative(self.conn0, self._tower[-1], len(self._tower), self.convention)
            self._tower.append(nxt)
        return self._tower[: k + 1]

    # Galaev

    def galaev_generators(self, kmax=None):
        kmax = self.spec.kmax if kmax is None else kmax
        out = []
        tensors = self.tower(kmax)
        for pi, path in enumerate(self.s_paths()):
            P, Pinv = self.transport(path, 0)
            y0 = path.end
            for F in tensors:
                for (dirs, a, b), m in F.components.items():
                    if m.is_zero():
                        continue
                    g = Pinv @ y0.pull_back_matrix(m) @ P
                    if not g.is_zero():
                        out.append(((pi, dirs, a, b), g))
        return out

    def galaev_algebra(self, kmax=None, dressed=True):
        gens = [g for _, g in self.galaev_generators(kmax)]
        if dressed:
            gens = [g.left_scale(m) for g in gens for m in self.s_monomials()]
            gens = [g for g in gens if not g.is_zero()]
        return _close(gens, self.frame, self.context0)

    # functorial samples

    def t_samples(self, lp):
        patch = self.patch(lp)
        out = []
        p, q = patch.p, patch.q
        if self.spec.special_points:
            ks = range(self.spec.kmax + 1) if p else range(1)
            for pi, path0 in enumerate(self.s_paths()):
                pT = path0.with_patch(patch)
                for k in ks:
                    if special_point_size(p, q, k) > lp:
                        continue
                    y = special_point(pT.end, k)
                    if y == pT.end:
                        out.append((("special", pi, k), pT))
                    else:
                        out.append((("special", pi, k), pT.then(PathModel.linear(pT.end, y))))
        for ti, path in enumerate(self.spec.t_paths):
            fitted = _fit_path(path, patch)
            if fitted is not None:
                out.append((("user", ti), fitted))
        return out

    def curvature_conjugates(self, lp):
        """(label, a, b, Z) with Z = P^-1 R_ab(y) P over S x T."""
        R = self.curvature(lp)
        out = []
        for label, path in self.t_samples(lp):
            P, Pinv = self.transport(path, lp)
            y = path.end
            for (a, b), m in R.components.items():
                if m.is_zero():
                    continue
                z = Pinv @ y.pull_back_matrix(m) @ P
                if not z.is_zero():
                    out.append((label, a, b, z))
        return out

    def _dressing_rule(self, a, b):
        par = self.patch0.parities
        pi = par[a] ^ par[b]
        delta = 2 if (par[a] and par[b]) else 0
        return pi, delta

    def _gen_mask(self, lp):
        ctx = self.patch(lp).context
        return ctx.family_mask("etaS") | ctx.family_mask("etaT")

    def functorial_generators(self, lp):
        """m . Z for every monomial m that arises as a product u^a v^b of even vectors."""
        full = self._gen_mask(lp)
        ctx = self.patch(lp).context
        out = []
        for label, a, b, z in self.curvature_conjugates(lp):
            pi, delta = self._dressing_rule(a, b)
            for m in _valid_masks(full, pi, delta):
                g = z.left_scale(ctx.monomial(m))
                if not g.is_zero():
                    out.append(g)
        return out

    def functorial_algebra(self, lp):
        return _close(self.functorial_generators(lp), self.frame, self.patch(lp).context)

    def coefficient_algebra(self, lp, method="generators"):
        if method == "full":
            H = self.functorial_algebra(lp)
            coeffs = []
            for h in H.basis():
                for _, c in coefficient_matrices(h, "etaT").items():
                    if not c.is_zero():
                        coeffs.append(self.to_base(c))
            return _close(coeffs, self.frame, self.context0)
        ctx0 = self.context0
        s_bits = bits(ctx0.family_mask("etaS"))
        pairs = [ctx0.monomial((1 << i) | (1 << j)) for i, j in combinations(s_bits, 2)]
        singles = [ctx0.monomial(1 << i) for i in s_bits]
        one = [ctx0.one()]
        tfull = self.patch(lp).context.family_mask("etaT")
        gens = []
        for _, a, b, z in self.curvature_conjugates(lp):
            pi, delta = self._dressing_rule(a, b)
            for J, zj in coefficient_matrices(z, "etaT").items():
                if zj.is_zero():
                    continue
                free = (tfull & ~J).bit_count()
                if pi:
                    factors = one if free >= 1 else singles
                elif delta:
                    factors = one if free >= 2 else pairs + (singles if free >= 1 else [])
                else:
                    factors = one
                base = self.to_base(zj)
                for f in factors:
                    g = base.left_scale(f)
                    if not g.is_zero():
                        gens.append(g)
        dressed = [g.left_scale(m) for g in gens for m in self.s_monomials()]
        return _close([g for g in dressed if not g.is_zero()], self.frame, ctx0)

    # eta-derivative generators

    def eta_derivative_conjugates(self, lp, order):
        """P^-1 ((y^*nabla)_{eta^{i_l}} ... (y^*nabla)_{eta^{i_1}} R_y)_ab P for l <= order."""
        R = self.curvature(lp)
        conn = self.connection(lp)
        out = []
        for label, path in self.t_samples(lp):
            P, Pinv = self.transport(path, lp)
            y = path.end
            level = [((), pull_back_tensor(y, R.components), 0)]
            for l in range(order + 1):
                nxt = []
                for seq, comps, ptens in level:
                    for (a, b), m in comps.items():
                        z = Pinv @ m @ P
                        if not z.is_zero():
                            out.append(((label, seq, a, b), z))
                    if l < order:
                        for i in range(1, lp + 1):
                            nxt.append((seq + (i,), pullback_covariant_derivative(conn, y, comps, ptens, i), ptens ^ 1))
                level = nxt
        return out

    def holk_algebra(self, lp, k):
        ctx = self.patch(lp).context
        full = self._gen_mask(lp)
        monos = [ctx.monomial(m) for m in _submasks(full)]
        gens = []
        for _, z in self.eta_derivative_conjugates(lp, k):
            for m in monos:
                g = z.left_scale(m)
                if not g.is_zero():
                    gens.append(g)
        return _close(gens, self.frame, ctx)

    def conjugated_tower(self, lp, order):
        """P^-1 (y^* nabla^k R)_{dirs; ab} P over the T samples, k <= order."""
        out = []
        tensors = self.tower(order)
        conn = self.connection(lp)
        for label, path in self.t_samples(lp):
            P, Pinv = self.transport(path, lp)
            y = path.end
            for F in tensors:
                for (dirs, a, b), m in F.components.items():
                    m = m.map(lambda e: conn.patch.lift(e))
                    z = Pinv @ y.pull_back_matrix(m) @ P
                    if not z.is_zero():
                        out.append(((label, dirs, a, b), z))
        return out


def _submasks(full):
    idx = bits(full)
    out = []
    for r in range(len(idx) + 1):
        for combo in combinations(idx, r):
            m = 0
            for b in combo:
                m |= 1 << b
            out.append(m)
    return out


def _close(gens, frame, ctx):
    if not gens:
        return span_of([], frame, ctx)
    return lie_closure(gens, frame, ctx)


# public entry points


def galaev_algebra(conn, spec, kmax=None, dressed=True, engine=None):
    engine = engine or HolonomyEngine(conn, spec)
    return engine.galaev_algebra(kmax, dressed)


def coefficient_algebra(conn, spec, lprime, method="generators", engine=None):
    engine = engine or HolonomyEngine(conn, spec)
    return engine.coefficient_algebra(lprime, method)


def functorial_generators(conn, spec, lprime, engine=None):
    engine = engine or HolonomyEngine(conn, spec)
    return engine.functorial_generators(lprime)


def holk_algebra(conn, spec, lprime, k, engine=None):
    engine = engine or HolonomyEngine(conn, spec)
    return engine.holk_algebra(lprime, k)


def required_lprime(patch, kmax):
    return special_point_size(patch.p, patch.q, kmax if patch.p else 0)


def stabilization_threshold(conn, spec, lprime_max=8, engine=None, method="generators"):
    """Smallest L' whose coefficient-algebra dimension holds for L'+1 and L'+2.

    Returns (threshold or None, {L': dim}).
    """
    engine = engine or HolonomyEngine(conn, spec)
    dims = {}
    for lp in range(lprime_max + 1):
        dims[lp] = engine.coefficient_algebra(lp, method).dim
        if lp >= 2 and dims[lp] == dims[lp - 1] == dims[lp - 2]:
            return lp - 2, dims
    return None, dims


def comparison_check(conn, spec, lprime=None, engine=None, mechanism_order=2):
    """Span equality of the coefficient algebra and Galaev's algebra."""
    engine = engine or HolonomyEngine(conn, spec)
    patch0 = engine.patch0
    need = required_lprime(patch0, spec.kmax)
    if not spec.special_points:
        raise SpecInsufficient("special points are required for the comparison")
    if lprime is not None and lprime < need:
        raise SpecInsufficient(f"special points up to k={spec.kmax} need L' >= {need}")
    threshold, dims = stabilization_threshold(conn, spec, engine=engine,
                                              lprime_max=max(need, 2) + 4)
    lp = lprime if lprime is not None else max(need, threshold if threshold is not None else need)
    hc = engine.coefficient_algebra(lp)
    hg = engine.galaev_algebra()
    mech = eta_derivative_mechanism(engine, order=mechanism_order)
    return {
        "lprime": lp,
        "threshold": threshold,
        "coefficient_dims": dims,
        "coefficient": hc,
        "galaev": hg,
        "galaev_in_coefficient": hc.contains_all(hg),
        "coefficient_in_galaev": hg.contains_all(hc),
        "equal": span_equal(hc, hg),
        "eta_derivatives_in_tower_span": mech,
    }


def _module_span(matrices, ctx, monomial_masks):
    ech = Echelon()
    for g in matrices:
        for m in monomial_masks:
            h = g.left_scale(ctx.monomial(m))
            if not h.is_zero():
                ech.add(h.flatten())
    return ech


def eta_derivative_mechanism(engine, order=2, lp=None):
    """Each eta-derivative conjugate lies in the O_{SxT}-span of the conjugated tower."""
    patch0 = engine.patch0
    if lp is None:
        lp = max(patch0.q, min(special_point_size(patch0.p, patch0.q, 1), 3))
    ctx = engine.patch(lp).context
    masks = _submasks(engine._gen_mask(lp))
    towers = engine.conjugated_tower(lp, order)
    by_label = {}
    for (label, dirs, a, b), z in towers:
        by_label.setdefault(label, []).append((len(dirs), z))
    spans = {}
    ok = True
    for (label, seq, a, b), z in engine.eta_derivative_conjugates(lp, order):
        key = (label, len(seq))
        ech = spans.get(key)
        if ech is None:
            ech = spans[key] = _module_span([g for k, g in by_label.get(label, []) if k <= len(seq)], ctx, masks)
        if not ech.contains(z.flatten()):
            ok = False
    return ok


def degree_decomposition_check(conn, spec, N, lprime, engine=None, galaev=None):
    """hol_x(T) = hol_x(T)_{deg <= N} + (hol^Gal (x) O_T^{deg > N})_even as spans."""
    engine = engine or HolonomyEngine(conn, spec)
    H = engine.functorial_algebra(lprime)
    G = galaev if galaev is not None else engine.galaev_algebra()
    ctx = engine.patch(lprime).context
    tbits = bits(ctx.family_mask("etaT"))
    V = Echelon()
    for X in G.basis():
        px = X.parity()
        Xl = X.map(lambda e: e.embed(ctx))
        for r in range(N + 1, len(tbits) + 1):
            if (r & 1) != px:
                continue
            for combo in combinations(tbits, r):
                m = 0
                for b in combo:
                    m |= 1 << b
                g = Xl.left_scale(ctx.monomial(m))
                if not g.is_zero():
                    V.add(g.flatten())
    tm = ctx.family_mask("etaT")

    def split(h):
        low, high = {}, {}
        for (i, j, m), c in h.flatten().items():
            (high if (m & tm).bit_count() > N else low)[(i, j, m)] = c
        return low, high

    v_in_h = all(H.echelon.contains(v) for v in V.rows.values())
    high_in_v = True
    low_in_h = True
    for h in H.basis():
        low, high = split(h)
        high_in_v &= V.contains(high)
        low_in_h &= H.echelon.contains(low)
    return {
        "N": N,
        "lprime": lprime,
        "dim": H.dim,
        "tail_dim": V.rank,
        "tail_in_algebra": v_in_h,
        "high_parts_in_tail": high_in_v,
        "low_parts_in_algebra": low_in_h,
        "holds": v_in_h and high_in_v and low_in_h,
    }


def inclusion_check(conn, spec, lprime, engine=None, galaev=None):
    """hol_x(T) inside (hol^Gal (x) O_T)_even, and loop transports factor through soul scaling."""
    engine = engine or HolonomyEngine(conn, spec)
    G = galaev if galaev is not None else engine.galaev_algebra()
    ctx = engine.patch(lprime).context
    tmasks = [m for m in _submasks(ctx.family_mask("etaT"))]
    ech = Echelon()
    for X in G.basis():
        px = X.parity()
        Xl = X.map(lambda e: e.embed(ctx))
        for m in tmasks:
            if parity_of(m) == px:
                g = Xl.left_scale(ctx.monomial(m))
                if not g.is_zero():
                    ech.add(g.flatten())
    H = engine.functorial_algebra(lprime)
    alg_ok = all(ech.contains(v) for v in H.echelon.rows.values())
    group_ok = True
    for loop in _t_loops(engine, lprime):
        P, _ = engine.transport(loop, lprime)
        under = loop.restrict_T()
        P0, P0inv = engine.transport(under, lprime)
        Q = P @ P0inv
        scaled = loop.scale_T(0)
        if engine.transport(scaled, lprime)[0] != P0:
            group_ok = False
        group_ok &= ech.contains(log_unipotent(Q).flatten())
    return {"algebra": alg_ok, "group": group_ok, "holds": alg_ok and group_ok}


def functoriality_check(conn, spec, lprime, engine=None):
    """Generators for T push forward into the algebra for a larger T."""
    engine = engine or HolonomyEngine(conn, spec)
    big = engine.functorial_algebra(lprime + 1)
    ctx = engine.patch(lprime + 1).context
    return all(big.contains(g.map(lambda e: e.embed(ctx))) for g in engine.functorial_generators(lprime))


def conjugation_check(conn, spec, path, lprime=None, engine=None):
    """Coefficient algebra at x equals P^-1 (algebra at y) P for an S-path x -> y."""
    engine = engine or HolonomyEngine(conn, spec)
    if lprime is None:
        need = required_lprime(engine.patch0, spec.kmax)
        threshold, _ = stabilization_threshold(conn, spec, engine=engine, lprime_max=max(need, 2) + 4)
        lprime = max(need, threshold or 0)
    lp = lprime
    path = path.with_patch(engine.patch0)
    if path not in spec.s_paths and not any(_same_path(path, p) for p in spec.s_paths):
        spec = SampleSpec(spec.base, list(spec.s_paths) + [path], spec.s_loops, spec.t_paths, spec.t_loops,
                          spec.kmax, spec.special_points, spec.seed)
        engine = HolonomyEngine(conn, spec, engine.convention)
    back = path.reverse()
    spec_y = SampleSpec(path.end, [back] + [back.then(p.with_patch(engine.patch0)) for p in spec.s_paths],
                        [], [], [], spec.kmax, spec.special_points, spec.seed)
    eng_y = HolonomyEngine(conn, spec_y, engine.convention)
    at_x = engine.coefficient_algebra(lp)
    at_y = eng_y.coefficient_algebra(lp)
    P, Pinv = engine.transport(path, 0)
    moved = span_of([Pinv @ b @ P for b in at_y.basis()], engine.frame, engine.context0)
    return {"equal": span_equal(at_x, moved), "dim_x": at_x.dim, "dim_y": at_y.dim}


def _same_path(a, b):
    return a.patch == b.patch and all(
        all(f == g for f, g in zip(s1, s2)) for s1, s2 in zip(a.segments, b.segments)
    ) and len(a.segments) == len(b.segments)


# invariance under both definitions


def _t_loops(engine, lp):
    """User S x T loops plus S-loops detoured through the special points."""
    patch = engine.patch(lp)
    out = []
    for loop in engine.spec.t_loops:
        fitted = _fit_path(loop, patch)
        if fitted is not None:
            out.append(fitted)
    x = engine.base(lp)
    loops0 = [PathModel.constant(engine.base(0))] + [l.with_patch(engine.patch0) for l in engine.spec.s_loops]
    ks = range(engine.spec.kmax + 1) if patch.p else range(1)
    one = PathModel.constant(x).segments[0][0].one_like()
    for loop in loops0:
        lT = loop.with_patch(patch)
        for k in ks:
            if special_point_size(patch.p, patch.q, k) > lp:
                continue
            y = special_point(x, k)
            if y == x:
                continue
            soul = [b - a for a, b in zip(x.images, y.images)]
            out.append(PathModel.linear(x, y).then(lT.shift_by(soul, one)).then(PathModel.linear(y, x)))
    for loop in engine.spec.s_loops:
        out.append(loop.with_patch(patch))
    return out


def _lift_vector(vec, ctx):
    return [c.embed(ctx) for c in vec]


def _vec_eq(u, v):
    return all(a == b for a, b in zip(u, v))


def _annihilated_by_dressings(w, full, pi, delta):
    """m . w = 0 for every valid monomial m."""
    for c in w:
        for mask in c.terms:
            if _exists_valid_disjoint(full, mask, pi, delta):
                return False
    return True


def invariance_vector(conn, spec, vector, lprime, engine=None):
    """Conditions A (S-level) and B (S x T level) for a single vector of right components."""
    engine = engine or HolonomyEngine(conn, spec)
    ctx0 = engine.context0
    X = _lift_vector(vector, ctx0)
    # condition A
    loops_a = True
    for loop in [l.with_patch(engine.patch0) for l in spec.s_loops]:
        P, _ = engine.transport(loop, 0)
        loops_a &= _vec_eq(P.apply(X), X)
    gens_a = [g for _, g in engine.galaev_generators()]
    alg_a = all(all(c.is_zero() for c in g.apply(X)) for g in gens_a)
    exp_a = True
    if alg_a:
        for g in gens_a:
            if all(all(c.body() == 0 for c in r) for r in g.entries):
                exp_a &= _vec_eq(exp_nilpotent(g).apply(X), X)
    cond_a = loops_a and alg_a and exp_a
    # condition B
    ctx = engine.patch(lprime).context
    XT = _lift_vector(vector, ctx)
    loops_b = True
    for loop in _t_loops(engine, lprime):
        P, _ = engine.transport(loop, lprime)
        loops_b &= _vec_eq(P.apply(XT), XT)
    full = engine._gen_mask(lprime)
    alg_b = True
    for _, a, b, z in engine.curvature_conjugates(lprime):
        pi, delta = engine._dressing_rule(a, b)
        alg_b &= _annihilated_by_dressings(z.apply(XT), full, pi, delta)
    cond_b = loops_b and alg_b
    return {
        "A": cond_a,
        "B": cond_b,
        "A_loops": loops_a,
        "A_algebra": alg_a,
        "B_loops": loops_b,
        "B_algebra": alg_b,
        "agree": cond_a == cond_b,
    }


class _Submodule:
    """Free submodule with body-independent basis, completed to a full basis."""

    def __init__(self, basis, frame, ctx):
        self.ctx = ctx
        self.frame = frame
        self.basis = [_lift_vector(v, ctx) for v in basis]
        n = len(frame)
        r = len(self.basis)
        ech = Echelon()
        for v in self.basis:
            if not ech.add({i: c.body() for i, c in enumerate(v) if c.body()}):
                raise NotFree("submodule basis is dependent at the body")
        extra = []
        for i in range(n):
            if len(self.basis) + len(extra) == n:
                break
            if ech.add({i: Fraction(1)}):
                extra.append([ctx.one() if j == i else ctx.zero() for j in range(n)])
        self.rank = r
        cols = self.basis + extra
        # column parities: follow the body support of each vector
        col_par = []
        for v in cols:
            ps = {frame[i] ^ (c.parity() or 0) for i, c in enumerate(v) if not c.is_zero()}
            col_par.append(min(ps) if ps else 0)
        entries = [[cols[j][i] for j in range(n)] for i in range(n)]
        self.matrix = SuperMatrix(frame, tuple(col_par), entries, ctx.zero())

    def outside_part(self, w):
        coords = solve_over_grassmann(self.matrix, w)
        return coords[self.rank:]

    def contains(self, w):
        return all(c.is_zero() for c in self.outside_part(w))

    def with_context(self, ctx):
        return _Submodule(self.basis, self.frame, ctx)


def invariance_submodule(conn, spec, basis, lprime, engine=None):
    """Conditions A and B for a free submodule given by body-independent basis vectors."""
    engine = engine or HolonomyEngine(conn, spec)
    frame = engine.frame
    F0 = _Submodule(basis, frame, engine.context0)
    loops_a = True
    for loop in [l.with_patch(engine.patch0) for l in spec.s_loops]:
        P, _ = engine.transport(loop, 0)
        loops_a &= all(F0.contains(P.apply(f)) for f in F0.basis)
    alg_a = all(F0.contains(g.apply(f)) for _, g in engine.galaev_generators() for f in F0.basis)
    cond_a = loops_a and alg_a
    ctx = engine.patch(lprime).context
    FT = _Submodule(basis, frame, ctx)
    loops_b = True
    for loop in _t_loops(engine, lprime):
        P, _ = engine.transport(loop, lprime)
        loops_b &= all(FT.contains(P.apply(f)) for f in FT.basis)
    full = engine._gen_mask(lprime)
    alg_b = True
    for _, a, b, z in engine.curvature_conjugates(lprime):
        pi, delta = engine._dressing_rule(a, b)
        for f in FT.basis:
            alg_b &= _annihilated_by_dressings(FT.outside_part(z.apply(f)), full, pi, delta)
    cond_b = loops_b and alg_b
    return {
        "A": cond_a,
        "B": cond_b,
        "A_loops": loops_a,
        "A_algebra": alg_a,
        "B_loops": loops_b,
        "B_algebra": alg_b,
        "agree": cond_a == cond_b,
    }


def conjugated_curvature(conn, path, u, v):
    """P^-1 R_y(u, v) P for left-component vectors u, v at the end point y of path."""
    op = parallel_transport(conn, path, mode="exact")
    P = op.matrix
    R = curvature(conn)
    y = path.end
    comps = {k: y.pull_back_matrix(m) for k, m in R.components.items()}
    F = evaluate_two_tensor(comps, 0, conn.patch.parities, u, v, P.proto)
    return P.inverse() @ F @ P


def tensor_span(engine, galaev, lp):
    """Rational span of (hol^Gal (x) O_T)_even for a T with lp generators."""
    ctx = engine.patch(lp).context
    ech = Echelon()
    for X in galaev.basis():
        px = X.parity()
        Xl = X.map(lambda e: e.embed(ctx))
        for m in _submasks(ctx.family_mask("etaT")):
            if parity_of(m) == px:
                g = Xl.left_scale(ctx.monomial(m))
                if not g.is_zero():
                    ech.add(g.flatten())
    return ech


def sheaf_audit_holonomy(conn, spec, cover, engine=None):
    """Glue compatible families of holonomy sections over an fppf cover of T.

    Two subfunctors are audited: span membership in (hol^Gal (x) O_T)_even and
    the unipotent part of the holonomy group (log in that span).  A corrupted
    family must be rejected.
    """
    from .errors import Incompatible, NoDescent
    from .fppf import glue_sections, push

    engine = engine or HolonomyEngine(conn, spec)
    gal = engine.galaev_algebra()
    spans = {}

    def span_for(value):
        n = value.proto.context.size("etaT")
        if n not in spans:
            spans[n] = tensor_span(engine, gal, n)
        return spans[n]

    def in_algebra(value):
        return span_for(value).contains(value.flatten())

    def in_group(value):
        try:
            return span_for(value).contains(log_unipotent(value).flatten())
        except PreconditionViolated:
            return False

    L = cover[0].source.total
    ctx = engine.patch(L).context
    alg_sections = [h for h in engine.functorial_algebra(L).basis()]
    alg_sections.append(sum(alg_sections[1:], alg_sections[0]) if alg_sections else
                        SuperMatrix.zero(engine.frame, engine.frame, ctx.zero()))
    grp_sections = [engine.transport(loop, L)[0] for loop in _t_loops(engine, L)]
    grp_sections.append(SuperMatrix.identity(engine.frame, ctx.zero()))
    results = {}
    for name, pred, sections in (("algebra", in_algebra, alg_sections), ("group", in_group, grp_sections)):
        glued = 0
        unique = True
        for a in sections:
            if not pred(a):
                raise AssertionError(f"base section outside the {name} subfunctor")
            family = [push(phi, a, "etaT") for phi in cover]
            res = glue_sections(cover, family, pred, "etaT")
            unique &= res.section == a and res.predicate
            glued += 1
        rejected = _corruption_rejected(cover, sections[-1], push, glue_sections, (Incompatible, NoDescent))
        results[name] = {"glued": glued, "unique": unique, "corruption_rejected": rejected}
    results["holds"] = all(r["unique"] and r["corruption_rejected"] for r in results.values())
    return results


def _corruption_rejected(cover, a, push, glue, errors):
    family = [push(phi, a, "etaT") for phi in cover]
    j = len(cover) - 1
    bad = family[j]
    ctx = bad.proto.context
    top = ctx.monomial(1 << ctx.index("etaT", ctx.size("etaT"))) if ctx.size("etaT") else ctx.one()
    family[j] = bad + SuperMatrix.identity(bad.row_par, ctx.zero()).left_scale(top)
    try:
        glue(cover, family, None, "etaT")
    except errors:
        return True
    return False


@dataclass
class HolonomyReport:
    galaev: object
    galaev_real_span: object
    coefficient: object
    functorial_dims: dict
    coefficient_dims: dict
    threshold: object
    comparison: bool
    lprime: int


def holonomy_report(conn, spec, lprime=None, engine=None):
    engine = engine or HolonomyEngine(conn, spec)
    need = required_lprime(engine.patch0, spec.kmax)
    threshold, dims = stabilization_threshold(conn, spec, engine=engine, lprime_max=max(need, 2) + 4)
    lp = lprime if lprime is not None else max(need, threshold if threshold is not None else need)
    hg = engine.galaev_algebra()
    hr = engine.galaev_algebra(dressed=False)
    hc = engine.coefficient_algebra(lp)
    fdims = {}
    for k in range(0, min(lp, 4) + 1):
        fdims[k] = engine.functorial_algebra(k).dim
    return HolonomyReport(hg, hr, hc, fdims, dims, threshold, span_equal(hg, hc), lp)


__all__ = [
    "SampleSpec", "HolonomyEngine", "HolonomyReport", "galaev_algebra", "coefficient_algebra",
    "functorial_generators", "holk_algebra", "stabilization_threshold", "comparison_check",
    "degree_decomposition_check", "inclusion_check", "functoriality_check", "conjugation_check",
    "invariance_vector", "invariance_submodule", "holonomy_report", "eta_derivative_mechanism",
    "sheaf_audit_holonomy", "tensor_span", "conjugated_curvature",
]
