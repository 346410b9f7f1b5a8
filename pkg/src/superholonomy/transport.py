"""S-points, paths, parallel transport and the eta-derivative identities.

Paths are lists of polynomial segments, each parametrised by t in [0, 1].
Transport solves P' = -A P with A(t) = sum_a (d/dt gamma^a) . gamma^* omega_a.
In exact mode A has nilpotent body, so Picard iteration reaches a fixed
point after finitely many rounds.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import HybridModeUnsupported, ParityMismatch, PreconditionViolated, TTooSmall
from .functions import SuperFunction
from .geometry import covariant_derivative_2tensor, evaluate_two_tensor, first_order_rule
from .grassmann import GrassmannElement, bits, merge_sign
from .superlinalg import SuperMatrix, supercommutator

T_VAR = ("t",)


def _theta_mask(patch):
    return patch.context.family_mask("th")


@dataclass
class SPoint:
    """Grassmann values of the coordinates (no theta generators allowed)."""

    patch: object
    images: list

    def __post_init__(self):
        P = self.patch.parities
        ctx = self.patch.context
        if len(self.images) != self.patch.dim:
            raise ValueError("one image per coordinate")
        imgs = []
        for a, im in enumerate(self.images):
            if isinstance(im, SuperFunction):
                im = im.to_grassmann()
            if im.context != ctx:
                im = im.embed(ctx)
            if im.support() & _theta_mask(self.patch):
                raise ParityMismatch("point images must not involve odd coordinates")
            if not im.is_zero() and im.parity() != P[a]:
                raise ParityMismatch(f"image of {self.patch.names[a]} has the wrong parity")
            imgs.append(im)
        self.images = imgs

    @classmethod
    def origin(cls, patch):
        return cls(patch, [patch.context.zero() for _ in range(patch.dim)])

    def with_patch(self, patch):
        return SPoint(patch, [im.embed(patch.context) for im in self.images])

    def _maps(self):
        even = {self.patch.evens[a]: SuperFunction.from_grassmann(self.images[a]) for a in range(self.patch.p)}
        odd = {self.patch.theta_bit(a): SuperFunction.from_grassmann(self.images[a])
               for a in range(self.patch.p, self.patch.dim)}
        return even, odd

    def pull_back(self, f):
        even, odd = self._maps()
        return self.patch.lift(f).compose(even, odd, ()).to_grassmann()

    def pull_back_matrix(self, m):
        even, odd = self._maps()
        return m.map(lambda e: e.compose(even, odd, ()).to_grassmann())

    def restrict_T(self):
        """Set all T generators to zero."""
        return SPoint(self.patch, [_drop_family(im, "etaT") for im in self.images])

    def depends_on_T(self):
        tm = self.patch.context.family_mask("etaT")
        return any(im.support() & tm for im in self.images)

    def __eq__(self, other):
        return isinstance(other, SPoint) and self.patch == other.patch and self.images == other.images


def _drop_family(g, family):
    fm = g.context.family_mask(family)
    return GrassmannElement(g.context, {m: c for m, c in g.terms.items() if not m & fm})


def pull_back(f, point):
    return point.pull_back(f)


def special_point(q, k):
    """Theta^i -> eta^i + q(theta^i); x^j -> sum of k eta pairs + q(x^j)."""
    patch = q.patch
    d0, d1 = patch.p, patch.q
    need = d1 + k * 2 * d0
    if patch.Lprime < need:
        raise TTooSmall(f"special point needs L' >= {need}, have {patch.Lprime}")
    ctx = patch.context
    images = list(q.images)
    for i in range(1, d1 + 1):
        images[d0 + i - 1] = images[d0 + i - 1] + ctx.generator("etaT", i)
    for j in range(1, d0 + 1):
        acc = ctx.zero()
        for n in range(k):
            base = d1 + n * 2 * d0 + 2 * j
            acc = acc + ctx.generator("etaT", base - 1) * ctx.generator("etaT", base)
        images[j - 1] = images[j - 1] + acc
    return SPoint(patch, images)


def special_point_size(p, q, k):
    return q + k * 2 * p


# pullback covariant derivatives along d/d eta^i


def _eta_bit(patch, i):
    return patch.context.index("etaT", i)


def eta_connection_matrix(conn, y, i):
    """B = sum_c d_eta(y^c) . y^* omega_c."""
    patch = conn.patch
    bit = _eta_bit(patch, i)
    total = SuperMatrix.zero(conn.frame_par, conn.frame_par, patch.context.zero())
    for c in range(patch.dim):
        dc = y.images[c].left_partial(bit)
        if dc.is_zero():
            continue
        total = total + y.pull_back_matrix(conn.omega(c)).left_scale(dc)
    return total


def eta_aux_coefficients(conn, y, i):
    """lam[a][h]: left coefficient of (y^* nabla)_eta d_a along d_h."""
    patch = conn.patch
    bit = _eta_bit(patch, i)
    n = patch.dim
    lam = {a: {} for a in range(n)}
    for c in range(n):
        dc = y.images[c].left_partial(bit)
        if dc.is_zero():
            continue
        for (e, a, h), f in conn.aux.items():
            if e != c:
                continue
            val = dc * y.pull_back(f)
            if not val.is_zero():
                lam[a][h] = lam[a].get(h, patch.context.zero()) + val
    return lam


def pull_back_tensor(y, comps):
    return {k: y.pull_back_matrix(m) for k, m in comps.items()}


def pullback_covariant_derivative(conn, y, comps, p_tensor, i):
    """((y^* nabla)_{d eta^i} G)(d_a, d_b) for pulled-back components of G."""
    bit = _eta_bit(conn.patch, i)
    B = eta_connection_matrix(conn, y, i)
    lam = eta_aux_coefficients(conn, y, i)

    def derivative(m):
        return m.map(lambda e: e.left_partial(bit)).row_signs(1)

    return first_order_rule(comps, p_tensor, 1, B, derivative, lambda a: lam[a], conn.patch.parities)


def special_point_identities(conn, q, comps, p_tensor, k=1):
    """Compare coordinate covariant derivatives with eta-derivatives at a special point.

    With y = special_point(q, k): y^*(nabla_{th^i} G) against (y^* nabla)_{eta^i} G_y,
    and eta^e . y^*(nabla_{x^j} G) against (y^* nabla)_{eta^(e-1)} G_y for every
    paired index e.  comps are the function-valued components of G.
    """
    patch = conn.patch
    y = special_point(q, k)
    d0, d1 = patch.p, patch.q
    G_y = pull_back_tensor(y, comps)
    mismatches = []
    checked = 0

    def compare(label, lhs, rhs):
        nonlocal checked
        for key in lhs:
            checked += 1
            if lhs[key] != rhs[key]:
                mismatches.append((label, key))

    for i in range(1, d1 + 1):
        z = d0 + i - 1
        lhs = pull_back_tensor(y, covariant_derivative_2tensor(conn, comps, p_tensor, z))
        rhs = pullback_covariant_derivative(conn, y, G_y, p_tensor, i)
        compare(("theta", i), lhs, rhs)
    ctx = patch.context
    for j in range(1, d0 + 1):
        pulled = pull_back_tensor(y, covariant_derivative_2tensor(conn, comps, p_tensor, j - 1))
        for n in range(k):
            e = d1 + n * 2 * d0 + 2 * j
            eta = ctx.generator("etaT", e)
            lhs = {key: m.left_scale(eta) for key, m in pulled.items()}
            rhs = pullback_covariant_derivative(conn, y, G_y, p_tensor, e - 1)
            compare(("x", j, e), lhs, rhs)
    return {"checked": checked, "mismatches": mismatches, "equal": not mismatches}


def pullback_vector_derivative(conn, y, u, i):
    """(y^* nabla)_{d eta^i} u for left components u."""
    bit = _eta_bit(conn.patch, i)
    lam = eta_aux_coefficients(conn, y, i)
    out = [c.left_partial(bit) for c in u]
    for c, uc in enumerate(u):
        if uc.is_zero():
            continue
        s = -1 if uc.parity() else 1
        for h, coef in lam[c].items():
            out[h] = out[h] + uc * coef * s
    return out


def bracket_with_eta_derivative(conn, y, m, i):
    """[(y^* nabla)_eta, M] = [B, M] + J d_eta M."""
    bit = _eta_bit(conn.patch, i)
    B = eta_connection_matrix(conn, y, i)
    out = m.map(lambda e: e.left_partial(bit)).row_signs(1)
    if not m.is_zero() and not B.is_zero():
        out = out + supercommutator(B, m)
    return out


# paths


@dataclass
class PathModel:
    """Polynomial segments t -> coordinates, each on [0, 1]."""

    patch: object
    segments: list

    def __post_init__(self):
        P = self.patch.parities
        ctx = self.patch.context
        segs = []
        if not self.segments:
            raise ValueError("a path needs at least one segment")
        for seg in self.segments:
            if len(seg) != self.patch.dim:
                raise ValueError("one expression per coordinate")
            out = []
            for a, f in enumerate(seg):
                if isinstance(f, GrassmannElement):
                    f = SuperFunction.from_grassmann(f, T_VAR)
                if f.context != ctx:
                    f = f.embed(ctx)
                if f.evens != T_VAR:
                    f = _as_t_function(f)
                if f.odd_support() & _theta_mask(self.patch):
                    raise ParityMismatch("path images must not involve odd coordinates")
                if not f.is_zero() and f.parity() != P[a]:
                    raise ParityMismatch(f"path image of {self.patch.names[a]} has the wrong parity")
                out.append(f)
            segs.append(out)
        for s1, s2 in zip(segs, segs[1:]):
            for f1, f2 in zip(s1, s2):
                if f1.evaluate("t", 1) != f2.evaluate("t", 0):
                    raise ValueError("path segments do not join")
        self.segments = segs

    def point_at(self, seg, t):
        return SPoint(self.patch, [f.evaluate("t", t).drop_evens(()).to_grassmann() for f in self.segments[seg]])

    @property
    def start(self):
        return self.point_at(0, 0)

    @property
    def end(self):
        return self.point_at(len(self.segments) - 1, 1)

    def is_loop(self):
        return self.start == self.end

    @classmethod
    def constant(cls, point):
        return cls(point.patch, [[SuperFunction.from_grassmann(im, T_VAR) for im in point.images]])

    @classmethod
    def linear(cls, p0, p1):
        t = SuperFunction.variable(p0.patch.context, T_VAR, "t")
        seg = []
        for a, b in zip(p0.images, p1.images):
            fa = SuperFunction.from_grassmann(a, T_VAR)
            fb = SuperFunction.from_grassmann(b, T_VAR)
            seg.append(fa + (fb - fa) * t)
        return cls(p0.patch, [seg])

    def then(self, other):
        """Concatenation: first self, then other."""
        return PathModel(self.patch, self.segments + other.segments)

    def reverse(self):
        segs = [[f.reparametrize("t", -1, 1) for f in seg] for seg in reversed(self.segments)]
        return PathModel(self.patch, segs)

    def split(self, at=Fraction(1, 2)):
        """Cut every segment at parameter `at` (rescaling both halves)."""
        segs = []
        at = Fraction(at)
        for seg in self.segments:
            segs.append([f.reparametrize("t", at, 0) for f in seg])
            segs.append([f.reparametrize("t", 1 - at, at) for f in seg])
        return PathModel(self.patch, segs)

    def with_patch(self, patch):
        return PathModel(patch, [[f.embed(patch.context) for f in seg] for seg in self.segments])

    def restrict_T(self):
        return PathModel(self.patch, [[_drop_family_fn(f, "etaT") for f in seg] for seg in self.segments])

    def scale_T(self, s):
        """Substitute eta^i -> s * eta^i (the soul-scaling homotopy)."""
        s = Fraction(s)
        tm = self.patch.context.family_mask("etaT")
        segs = []
        for seg in self.segments:
            out = []
            for f in seg:
                out.append(SuperFunction(f.context, f.evens,
                                         {(e, m): c * s ** (m & tm).bit_count() for (e, m), c in f.terms.items()}))
            segs.append(out)
        return PathModel(self.patch, segs)

    def shift_by(self, soul, profile):
        """Add profile(t) * soul[a] to every coordinate (soul: Grassmann list)."""
        segs = []
        for seg in self.segments:
            segs.append([f + profile * SuperFunction.from_grassmann(s, T_VAR) for f, s in zip(seg, soul)])
        return PathModel(self.patch, segs)


def _drop_family_fn(f, family):
    fm = f.context.family_mask(family)
    return SuperFunction(f.context, f.evens, {(e, m): c for (e, m), c in f.terms.items() if not m & fm})


def _as_t_function(f):
    if not f.evens:
        return SuperFunction(f.context, T_VAR, {((0,), m): c for (_, m), c in f.terms.items()})
    if f.evens == T_VAR:
        return f
    raise ValueError(f"path expressions may only use t, got {f.evens}")


def _segment_maps(patch, seg):
    even = {patch.evens[a]: seg[a] for a in range(patch.p)}
    odd = {patch.theta_bit(a): seg[a] for a in range(patch.p, patch.dim)}
    return even, odd


def pull_back_along(seg, patch, f):
    even, odd = _segment_maps(patch, seg)
    return patch.lift(f).compose(even, odd, T_VAR)


def pull_back_matrix_along(seg, patch, m):
    even, odd = _segment_maps(patch, seg)
    return m.map(lambda e: e.compose(even, odd, T_VAR))


def connection_matrix(conn, seg, derivative):
    """sum_a derivative(gamma^a) . gamma^* omega_a along one segment."""
    patch = conn.patch
    proto = SuperFunction.constant(patch.context, T_VAR, 0)
    total = SuperMatrix.zero(conn.frame_par, conn.frame_par, proto)
    for a in range(patch.dim):
        da = derivative(seg[a])
        if da.is_zero():
            continue
        w = pull_back_matrix_along(seg, patch, conn.omega(a))
        if w.is_zero():
            continue
        total = total + w.left_scale(da)
    return total


def time_connection_matrix(conn, seg):
    return connection_matrix(conn, seg, lambda f: f.partial_even("t"))


def eta_path_matrix(conn, seg, i):
    bit = _eta_bit(conn.patch, i)
    return connection_matrix(conn, seg, lambda f: f.left_partial(bit))


def _picard(A, left, proto_par):
    """Fixed point of X = I + int_0^t (-A X) (left) or I + int_0^t X A (right)."""
    ident = SuperMatrix.identity(proto_par, A.proto)
    X = ident
    it = 0
    while True:
        prod = (A @ X).scale(-1) if left else X @ A
        nxt = ident + prod.map(lambda e: e.integrate("t"))
        it += 1
        if nxt == X:
            return X, it - 1
        X = nxt
        if it > 200:
            raise RuntimeError("Picard iteration did not terminate")


def _at(m, t):
    return m.map(lambda e: e.evaluate("t", t).drop_evens(()).to_grassmann())


@dataclass
class SegmentTransport:
    A: SuperMatrix
    P: SuperMatrix  # as a function of t
    Pinv: SuperMatrix
    iterations: int


@dataclass
class TransportOperator:
    matrix: object
    mode: str
    iterations: list = field(default_factory=list)
    segments: list = field(default_factory=list)
    numeric: dict = None
    path: object = None

    @property
    def max_iterations(self):
        return max(self.iterations, default=0)

    def inverse(self):
        return self.matrix.inverse()


def is_exact_path(conn, path):
    for seg in path.segments:
        A = time_connection_matrix(conn, seg)
        for row in A.entries:
            for e in row:
                if not e.body().is_zero():
                    return False
    return True


def transport_segment(conn, seg):
    A = time_connection_matrix(conn, seg)
    for row in A.entries:
        for e in row:
            if not e.body().is_zero():
                raise HybridModeUnsupported("connection matrix has a nonzero body along the path")
    P, it = _picard(A, True, conn.frame_par)
    Pinv, it2 = _picard(A, False, conn.frame_par)
    return SegmentTransport(A, P, Pinv, max(it, it2))


def parallel_transport(conn, path, mode="auto", steps=200):
    if path.patch != conn.patch:
        path = path.with_patch(conn.patch)
    if mode == "auto":
        mode = "exact" if is_exact_path(conn, path) else "hybrid"
    if mode == "hybrid":
        return hybrid_transport(conn, path, steps)
    total = SuperMatrix.identity(conn.frame_par, conn.patch.context.zero())
    iters = []
    segs = []
    for seg in path.segments:
        st = transport_segment(conn, seg)
        segs.append(st)
        iters.append(st.iterations)
        total = _at(st.P, 1) @ total
    return TransportOperator(total, "exact", iters, segs, path=path)


def transport_along_time(st, t):
    return _at(st.P, t)


# hybrid mode: RK4 on the full graded system


class _Graded:
    """Matrices with float coefficients per monomial mask."""

    def __init__(self, n, masks):
        self.n = n
        self.masks = masks
        self.pairs = []
        mset = set(masks)
        for m in masks:
            for m1 in masks:
                if m1 & ~m:
                    continue
                m2 = m ^ m1
                if m2 in mset:
                    self.pairs.append((m, m1, m2, merge_sign(m1, m2)))

    def mul(self, x, y):
        out = {m: np.zeros((self.n, self.n)) for m in self.masks}
        for m, m1, m2, s in self.pairs:
            a = x.get(m1)
            b = y.get(m2)
            if a is not None and b is not None:
                out[m] += s * (a @ b)
        return out


def _numeric_matrix(A, t, n, masks):
    out = {m: np.zeros((n, n)) for m in masks}
    tf = float(t)
    for i, row in enumerate(A.entries):
        for j, e in enumerate(row):
            for (ex, m), c in e.terms.items():
                out[m][i, j] += float(c) * tf ** ex[0]
    return out


def hybrid_transport(conn, path, steps=200):
    """Fixed-step RK4; the body block and every nilpotent order advance together.

    The graded product is triangular in the monomial order, so this is the
    variation-of-parameters hierarchy solved simultaneously.
    """
    n = conn.rank
    masks = sorted(range(1 << conn.patch.context.total), key=lambda m: (m.bit_count(), m))
    used = 0
    As = [time_connection_matrix(conn, seg) for seg in path.segments]
    for A in As:
        for row in A.entries:
            for e in row:
                used |= e.odd_support()
    masks = [m for m in masks if not m & ~used]
    G = _Graded(n, masks)
    state = {m: (np.eye(n) if m == 0 else np.zeros((n, n))) for m in masks}
    h = 1.0 / steps
    for A in As:
        for k in range(steps):
            t0 = k * h

            def f(t, X):
                return {m: -v for m, v in G.mul(_numeric_matrix(A, t, n, masks), X).items()}

            k1 = f(t0, state)
            k2 = f(t0 + h / 2, {m: state[m] + h / 2 * k1[m] for m in masks})
            k3 = f(t0 + h / 2, {m: state[m] + h / 2 * k2[m] for m in masks})
            k4 = f(t0 + h, {m: state[m] + h * k3[m] for m in masks})
            state = {m: state[m] + h / 6 * (k1[m] + 2 * k2[m] + 2 * k3[m] + k4[m]) for m in masks}
    return TransportOperator(None, "hybrid", [], [], numeric=state, path=path)


def numeric_product(conn, x, y):
    masks = sorted(set(x) | set(y), key=lambda m: (m.bit_count(), m))
    allm = set()
    for a in masks:
        for b in masks:
            if not a & b:
                allm.add(a | b)
    G = _Graded(conn.rank, sorted(allm | set(masks)))
    return G.mul(x, y)


# the eta derivative of transport


def _check_eta_index(patch, i):
    if not 1 <= i <= patch.Lprime:
        raise PreconditionViolated(f"no generator etaT{i}")


def curvature_along(conn, R, seg, i):
    """R_gamma(d gamma[d_t], d gamma[d_eta^i]) as a matrix in t."""
    patch = conn.patch
    bit = _eta_bit(patch, i)
    u = [f.partial_even("t") for f in seg]
    v = [f.left_partial(bit) for f in seg]
    comps = {ab: pull_back_matrix_along(seg, patch, m) for ab, m in R.components.items()}
    proto = SuperFunction.constant(patch.context, T_VAR, 0)
    return evaluate_two_tensor(comps, 0, patch.parities, u, v, proto)


def structure_term(conn, seg, i):
    """d_t B + [A, B] - J d_eta A, which must agree with curvature_along."""
    bit = _eta_bit(conn.patch, i)
    A = time_connection_matrix(conn, seg)
    B = eta_path_matrix(conn, seg, i)
    out = B.map(lambda e: e.partial_even("t")) - A.map(lambda e: e.left_partial(bit)).row_signs(1)
    if not A.is_zero() and not B.is_zero():
        out = out + supercommutator(A, B)
    return out


def _integrate01(m):
    return m.map(lambda e: e.integrate("t").evaluate("t", 1).drop_evens(()).to_grassmann())


def curvature_integral(conn, R, path, i):
    """I = sum over segments of P_<k^-1 (int_0^1 P^-1 K P dt) P_<k, and the transport."""
    _check_eta_index(conn.patch, i)
    frame = conn.frame_par
    zero = conn.patch.context.zero()
    total_P = SuperMatrix.identity(frame, zero)
    total_I = SuperMatrix.zero(frame, frame, zero)
    checks = []
    for seg in path.segments:
        st = transport_segment(conn, seg)
        K = curvature_along(conn, R, seg, i)
        checks.append(K == structure_term(conn, seg, i))
        inner = _integrate01(st.Pinv @ K @ st.P)
        total_I = total_I + total_P.inverse() @ inner @ total_P
        total_P = _at(st.P, 1) @ total_P
    return total_P, total_I, all(checks)


def eta_derivative_of_transport(conn, R, path, i):
    """Both sides of J d_eta P = P I + P B_x - B_y P."""
    if not is_exact_path(conn, path):
        raise HybridModeUnsupported("the eta-derivative identity needs exact mode")
    P, I, consistent = curvature_integral(conn, R, path, i)
    bit = _eta_bit(conn.patch, i)
    lhs = P.map(lambda e: e.left_partial(bit)).row_signs(1)
    Bx = eta_connection_matrix(conn, path.start, i)
    By = eta_connection_matrix(conn, path.end, i)
    integral_term = P @ I
    start_term = P @ Bx
    end_term = By @ P
    rhs = integral_term + start_term - end_term
    return {
        "lhs": lhs,
        "rhs": rhs,
        "curvature_integral": integral_term,
        "boundary_start": start_term,
        "boundary_end": end_term,
        "curvature_matches_structure": consistent,
        "equal": lhs == rhs,
    }


def vector_parity(vec, coord_par):
    ps = set()
    for a, c in enumerate(vec):
        if not c.is_zero():
            p = c.parity()
            if p is None:
                return None
            ps.add(p ^ coord_par[a])
    if not ps:
        return 0
    return ps.pop() if len(ps) == 1 else None


def conjugated_curvature_derivative(conn, R, path, comps, p_tensor, u, v, i):
    """Both sides of the derivative of P^-1 F_y(u, v) P along d/d eta^i.

    comps/p_tensor describe a curvature-type 2-tensor F on the patch; u, v are
    left-component vectors at the end point.
    """
    if not is_exact_path(conn, path):
        raise HybridModeUnsupported("the conjugated identity needs exact mode")
    x, y = path.start, path.end
    bit = _eta_bit(conn.patch, i)
    if any(not im.left_partial(bit).is_zero() for im in x.images):
        raise PreconditionViolated("start point must not depend on the eta direction")
    P, I, _ = curvature_integral(conn, R, path, i)
    Pinv = P.inverse()
    par = conn.patch.parities
    proto = conn.patch.context.zero()
    Fy = pull_back_tensor(y, comps)
    pu = vector_parity(u, par)
    pv = vector_parity(v, par)
    if pu is None or pv is None:
        raise ParityMismatch("vectors must be homogeneous")
    M = evaluate_two_tensor(Fy, p_tensor, par, u, v, proto)
    X = Pinv @ M @ P
    lhs = X.map(lambda e: e.left_partial(bit)).row_signs(1)
    dF = pullback_covariant_derivative(conn, y, Fy, p_tensor, i)
    du = pullback_vector_derivative(conn, y, u, i)
    dv = pullback_vector_derivative(conn, y, v, i)
    t1 = evaluate_two_tensor(dF, p_tensor ^ 1, par, u, v, proto)
    t2 = evaluate_two_tensor(Fy, p_tensor, par, du, v, proto)
    t3 = evaluate_two_tensor(Fy, p_tensor, par, u, dv, proto)
    s2 = -1 if p_tensor else 1
    s3 = -1 if (p_tensor ^ pu) else 1
    inner = t1 + t2.scale(s2) + t3.scale(s3)
    rhs = Pinv @ inner @ P - supercommutator(I, X) if not X.is_zero() else Pinv @ inner @ P
    direct = Pinv @ bracket_with_eta_derivative(conn, y, M, i) @ P
    if not X.is_zero():
        direct = direct - supercommutator(I, X)
    return {"lhs": lhs, "rhs": rhs, "via_bracket": direct, "equal": lhs == rhs}


__all__ = [
    "SPoint", "PathModel", "TransportOperator", "special_point", "pull_back", "parallel_transport",
    "pullback_covariant_derivative", "eta_derivative_of_transport", "conjugated_curvature_derivative",
    "special_point_identities", "bits",
]
