"""Splitting the tangent holonomy of a metric connection into invariant blocks.

The flat candidate is the part of the joint kernel of the holonomy algebra
with nonzero body; its orthogonal complement is built from an OSp completion
and every algebra element is checked to act block-diagonally.  Irreducibility
of the blocks is decided by a finite proxy (see ``weak_irreducibility``).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from .errors import DegenerateCandidate, DegenerateRestriction, PreconditionViolated
from .geometry import product_connection, right_to_left
from .grassmann import GrassmannElement
from .holonomy import HolonomyEngine, _Submodule, required_lprime, stabilization_threshold
from .linalg import Echelon, nullspace
from .superlinalg import (
    SuperBilinearForm,
    SuperMatrix,
    gram_of,
    orthogonal_complement,
    solve_over_grassmann,
    span_equal,
    span_of,
)


def stabilized_lprime(engine, spec):
    need = required_lprime(engine.patch0, spec.kmax)
    threshold, _ = stabilization_threshold(engine.conn0, spec, engine=engine, lprime_max=max(need, 2) + 4)
    return max(need, threshold or 0)


def _unknown_vector(ctx, n, i, mask):
    return [ctx.monomial(mask) if j == i else ctx.zero() for j in range(n)]


def joint_kernel(basis, frame, ctx):
    """Real basis of {v : h v = 0 for all h}, v in right components over ctx.

    The basis is returned in reduced echelon form with body coordinates
    pivoting first, so kernel vectors with nonzero body are canonical.
    """
    n = len(frame)
    masks = list(ctx.monomials())
    unknowns = [(i, m) for i in range(n) for m in masks]
    columns = []
    for i, m in unknowns:
        v = _unknown_vector(ctx, n, i, m)
        col = {}
        for k, h in enumerate(basis):
            for r, c in enumerate(h.apply(v)):
                for tm, tc in c.terms.items():
                    col[(k, r, tm)] = tc
        columns.append(col)
    sols = nullspace(columns, len(unknowns))
    ech = Echelon()
    for s in sols:
        ech.add({(m.bit_count(), m, i): c for (i, m), c in zip(unknowns, s) if c})
    out = []
    for pivot, row in sorted(ech.rref().items()):
        vec = [dict() for _ in range(n)]
        for (_, m, i), c in row.items():
            vec[i][m] = c
        out.append((pivot, [GrassmannElement(ctx, t) for t in vec]))
    return out


def _homogeneous_part(vec, frame, par):
    return [c.part(par ^ frame[i]) for i, c in enumerate(vec)]


def flat_candidate(basis, frame, ctx):
    """Body-pivot kernel vectors, made homogeneous; a free submodule killed by the algebra."""
    out = []
    for (deg, _, i), vec in joint_kernel(basis, frame, ctx):
        if deg == 0:
            out.append(_homogeneous_part(vec, frame, frame[i]))
    return out


def _form(metric, point, ctx):
    """The metric at an S-point as a bilinear form over O_S."""
    g = metric.matrix().map(lambda f: point.pull_back(f).embed(ctx))
    return SuperBilinearForm(g)


def _is_zero_vec(v):
    return all(c.is_zero() for c in v)


def _adapted(vectors, frame, ctx):
    """Square matrix whose columns are the given right-component vectors."""
    n = len(frame)
    col_par = []
    for v in vectors:
        ps = {frame[i] ^ (c.parity() or 0) for i, c in enumerate(v) if not c.is_zero()}
        if len(ps) > 1:
            raise PreconditionViolated("adapted basis vectors must be homogeneous")
        col_par.append(ps.pop() if ps else 0)
    entries = [[vectors[j][i] for j in range(n)] for i in range(n)]
    return SuperMatrix(frame, tuple(col_par), entries, ctx.zero())


def block_matrices(basis, adapted, split):
    """Matrices of the algebra elements in the adapted basis, plus off-block flag."""
    n = len(adapted.col_par)
    cols = [[adapted.entries[i][j] for i in range(n)] for j in range(n)]
    mats = []
    diagonal = True
    for h in basis:
        rows = [[None] * n for _ in range(n)]
        for j, v in enumerate(cols):
            coords = solve_over_grassmann(adapted, h.apply(v))
            for i, c in enumerate(coords):
                rows[i][j] = c
                if (i < split) != (j < split) and not c.is_zero():
                    diagonal = False
        mats.append(rows)
    return mats, diagonal


def _restricted(mats, idx):
    return [[[m[i][j] for j in idx] for i in idx] for m in mats]


def weak_irreducibility(basis, block_mats, vectors, frame, form, ctx, max_rank=4):
    """Search for a proper free nondegenerate invariant submodule of a block.

    Candidates are spans of subsets of small integer combinations of the block
    basis whose body span is invariant under the body representation; each is
    lifted with constant coordinates and tested for O_S invariance and
    nondegeneracy.  Exhaustive over the body lattice only when the body
    representation has finitely many invariant subspaces; otherwise a proxy.
    """
    r = len(vectors)
    if r <= 1:
        return {"irreducible": True, "proxy": False, "witness": None, "candidates": 0}
    if r > max_rank:
        return {"irreducible": None, "proxy": True, "witness": None, "candidates": 0}
    bodies = []
    for m in block_mats:
        bodies.append([[c.body() for c in row] for row in m])
    pool = []
    for coeffs in product((-1, 0, 1), repeat=r):
        if not any(coeffs):
            continue
        first = next(c for c in coeffs if c)
        if first < 0:
            continue
        pool.append(coeffs)
    checked = 0
    spans = set()
    for size in range(1, r):
        for subset in combinations(pool, size):
            ech = Echelon([{k: Fraction(c) for k, c in enumerate(v) if c} for v in subset])
            if ech.rank != size:
                continue
            key = ech.canonical()
            if key in spans:
                continue
            spans.add(key)
            if not all(ech.contains({i: sum(b[i][k] * v[k] for k in range(r)) for i in range(r)})
                       for b in bodies for v in subset):
                continue
            lifted = []
            for v in subset:
                w = [ctx.zero() for _ in frame]
                for k, c in enumerate(v):
                    if c:
                        w = [a + b * c for a, b in zip(w, vectors[k])]
                lifted.append(w)
            if any(_vec_parity(w, frame) is None for w in lifted):
                continue
            checked += 1
            gram = gram_of(form, [right_to_left(w, frame) for w in lifted])
            body = [[g.body() for g in row] for row in gram]
            if Echelon([{j: x for j, x in enumerate(row) if x} for row in body]).rank < size:
                continue
            sub = _Submodule(lifted, frame, ctx)
            if all(sub.contains(h.apply(v)) for h in basis for v in lifted):
                return {"irreducible": False, "proxy": True, "witness": [list(v) for v in subset],
                        "candidates": checked}
    return {"irreducible": True, "proxy": True, "witness": None, "candidates": checked}


def _vec_parity(w, frame):
    ps = {frame[i] ^ (c.parity() or 0) for i, c in enumerate(w) if not c.is_zero()}
    if any(c.parity() is None for c in w) or len(ps) > 1:
        return None
    return ps.pop() if ps else 0


def _nondegenerate(form, vectors, frame):
    gram = gram_of(form, [right_to_left(w, frame) for w in vectors])
    body = [[g.body() for g in row] for row in gram]
    return Echelon([{j: x for j, x in enumerate(row) if x} for row in body]).rank == len(vectors)


@dataclass
class BlockReport:
    vectors: list
    invariant: bool
    flat: bool
    irreducibility: dict


@dataclass
class SplitReport:
    algebra: object
    lprime: int
    kernel: list
    candidate: list
    complement: list
    block_diagonal: bool
    blocks: list = field(default_factory=list)

    @property
    def holds(self):
        return self.block_diagonal and all(b.invariant for b in self.blocks)


def derham_wu_split(conn, metric, spec, candidate=None, lprime=None, engine=None):
    """Split E_x = W + W^perp with W the flat candidate (or a user candidate).

    Raises DegenerateCandidate when the metric restricted to W is degenerate.
    """
    engine = engine or HolonomyEngine(conn, spec)
    lp = lprime if lprime is not None else stabilized_lprime(engine, spec)
    hol = engine.coefficient_algebra(lp)
    frame = engine.frame
    ctx = engine.context0
    basis = hol.basis()
    kernel = flat_candidate(basis, frame, ctx)
    W = [[c.embed(ctx) for c in v] for v in candidate] if candidate is not None else kernel
    form = _form(metric.with_patch(engine.patch0), engine.base(0), ctx)
    if W and not _nondegenerate(form, W, frame):
        raise DegenerateCandidate("metric is degenerate on the candidate submodule")
    try:
        comp_left = orthogonal_complement(form, [right_to_left(w, frame) for w in W])
    except DegenerateRestriction as exc:
        raise DegenerateCandidate(str(exc)) from exc
    comp = [right_to_left(v, frame) for v in comp_left]
    for w in comp:
        if any(not form(right_to_left(w, frame), right_to_left(u, frame)).is_zero() for u in W):
            raise AssertionError("complement is not orthogonal")
    adapted = _adapted(W + comp, frame, ctx)
    mats, diagonal = block_matrices(basis, adapted, len(W))
    blocks = []
    for idx, vecs in ((range(len(W)), W), (range(len(W), len(frame)), comp)):
        idx = list(idx)
        if not vecs:
            continue
        sub = _Submodule(vecs, frame, ctx)
        invariant = all(sub.contains(h.apply(v)) for h in basis for v in vecs)
        flat = all(_is_zero_vec(h.apply(v)) for h in basis for v in vecs)
        irr = weak_irreducibility(basis, _restricted(mats, idx), vecs, frame, form, ctx)
        blocks.append(BlockReport(vecs, invariant, flat, irr))
    return SplitReport(hol, lp, kernel, W, comp, diagonal, blocks)


def embed_block(matrix, coords, frame, ctx):
    """Place a factor matrix into the product frame along a coordinate map."""
    n = len(frame)
    rows = [[ctx.zero() for _ in range(n)] for _ in range(n)]
    for i, row in enumerate(matrix.entries):
        for j, e in enumerate(row):
            if not e.is_zero():
                rows[coords[i]][coords[j]] = e.embed(ctx)
    return SuperMatrix(frame, frame, rows, ctx.zero())


def product_holonomy_check(first, first_spec, second, second_spec, product_conn, product_spec):
    """Holonomy of a product equals the direct sum of the factor holonomies."""
    built, (c1, _), (c2, _) = product_connection(first, second)
    same = {k: v for k, v in built.gamma.items()} == {
        k: v.embed(built.patch.context) for k, v in product_conn.with_patch(built.patch).gamma.items()}
    eng = HolonomyEngine(product_conn, product_spec)
    e1 = HolonomyEngine(first, first_spec)
    e2 = HolonomyEngine(second, second_spec)
    lp = max(stabilized_lprime(e, s) for e, s in ((eng, product_spec), (e1, first_spec), (e2, second_spec)))
    whole = eng.coefficient_algebra(lp)
    ctx = eng.context0
    frame = eng.frame
    gens = [embed_block(h, c1, frame, ctx) for h in e1.coefficient_algebra(lp).basis()]
    gens += [embed_block(h, c2, frame, ctx) for h in e2.coefficient_algebra(lp).basis()]
    direct = span_of(gens, frame, ctx)
    return {
        "connection_matches": same,
        "lprime": lp,
        "product_dim": whole.dim,
        "factor_dims": [e1.coefficient_algebra(lp).dim, e2.coefficient_algebra(lp).dim],
        "equal": span_equal(whole, direct),
        "product": whole,
        "direct_sum": direct,
    }


__all__ = [
    "joint_kernel", "flat_candidate", "derham_wu_split", "product_holonomy_check",
    "weak_irreducibility", "SplitReport", "BlockReport", "embed_block", "stabilized_lprime",
]
