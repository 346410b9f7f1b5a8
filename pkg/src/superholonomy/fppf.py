"""Superpoint morphisms: submersions, freeness, fibred products and descent.

A morphism of superpoints R^{0|L1} -> R^{0|L} is recorded in the algebra
direction as a GrassmannMorphism phi from the L-generator algebra to the
L1-generator one.  Sections over a superpoint are Grassmann elements or
supermatrices in a context whose ``family`` plays the role of the superpoint's
generators; pulling back along phi rewrites that family.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .errors import Incompatible, NoDescent, NotSubmersion, PreconditionViolated
from .grassmann import (
    GeneratorContext,
    GrassmannElement,
    GrassmannMorphism,
    bits,
    ideal_dimension,
)
from .linalg import Echelon, dense_rank, inverse_dense
from .superlinalg import SuperMatrix

FAMILY = "eta"


def bare_context(n):
    return GeneratorContext(((FAMILY, n),))


def is_submersion(phi):
    """The degree-one part of the generator images has full rank."""
    return dense_rank(phi.linear_part()) == phi.source.total


def is_free_rank1(phi):
    """Freeness of the target over a one-generator source via the ideal dimension."""
    if phi.source.total != 1:
        raise PreconditionViolated("source must have exactly one generator")
    dim = ideal_dimension(phi.images[0])
    bound = 2 ** (phi.target.total - 1)
    if dim >= bound:
        if dim != bound:
            raise AssertionError(f"ideal dimension {dim} exceeds 2^(L-1)")
        return True
    return False


def quotient_dimension(phi):
    """dim of the target modulo the ideal generated by the images."""
    ech = Echelon()
    ctx = phi.target
    for im in phi.images:
        for m in ctx.monomials():
            ech.add((im * ctx.monomial(m)).terms)
    return 2 ** ctx.total - ech.rank


def is_free(phi):
    """Nakayama count: free iff dim target = 2^L * dim(target / m target)."""
    return 2 ** phi.target.total == 2 ** phi.source.total * quotient_dimension(phi)


def restriction(phi, j):
    """phi composed with the inclusion of the j-th source generator."""
    return GrassmannMorphism(bare_context(1), phi.target, [phi.images[j]])


# straightening


@dataclass
class Straightening:
    """phi = beta . iota with beta an automorphism of the target.

    beta sends xi^i to phi(eta^i) for i <= L and the remaining xi to target
    generators chosen to complete the linear part; gamma is its inverse.
    """

    phi: GrassmannMorphism
    beta: GrassmannMorphism
    gamma: GrassmannMorphism
    completion: list


def straighten(phi):
    if not is_submersion(phi):
        raise NotSubmersion("linear part does not have full rank")
    L1 = phi.target.total
    lin = phi.linear_part()
    ech = Echelon()
    for row in lin:
        ech.add({j: c for j, c in enumerate(row) if c})
    completion = []
    for j in range(L1):
        if ech.add({j: Fraction(1)}):
            completion.append(j)
    tgt = phi.target
    images = list(phi.images) + [tgt.monomial(1 << j) for j in completion]
    beta = GrassmannMorphism(tgt, tgt, images)
    gamma = invert_automorphism(beta)
    return Straightening(phi, beta, gamma, completion)


def invert_automorphism(beta):
    """Inverse of an automorphism with invertible linear part (degree iteration)."""
    ctx = beta.target
    n = ctx.total
    lin = beta.linear_part()  # rows: source generators
    inv = inverse_dense(lin)
    if inv is None:
        raise NotSubmersion("linear part is singular")
    # beta(xi^i) = sum_j lin[i][j] eta^j + N_i; look for d_j = gamma(eta^j) with
    # sum_j lin[i][j] d_j + N_i(d) = xi^i
    higher = [GrassmannElement(ctx, {m: c for m, c in im.terms.items() if m.bit_count() > 1})
              for im in beta.images]
    xi = [ctx.monomial(1 << i) for i in range(n)]
    d = [sum((xi[i] * inv[j][i] for i in range(n)), ctx.zero()) for j in range(n)]
    for _ in range(n + 2):
        sub = GrassmannMorphism(ctx, ctx, d)
        rhs = [xi[i] - sub(higher[i]) for i in range(n)]
        nd = [sum((rhs[i] * inv[j][i] for i in range(n)), ctx.zero()) for j in range(n)]
        if nd == d:
            break
        d = nd
    gamma = GrassmannMorphism(ctx, ctx, d)
    ident = GrassmannMorphism.identity(ctx)
    if gamma.compose(beta).images != ident.images or beta.compose(gamma).images != ident.images:
        raise AssertionError("automorphism inversion failed")
    return gamma


# pushing sections along morphisms


def push(phi, value, family=FAMILY):
    """Apply phi to the `family` generators of a Grassmann element or matrix."""
    if isinstance(value, SuperMatrix):
        return value.map(lambda e: push(phi, e, family))
    ctx = value.context
    if ctx.size(family) != phi.source.total:
        raise PreconditionViolated("section does not live over the morphism source")
    target = ctx.with_family(family, phi.target.total)
    fmask = ctx.family_mask(family)
    off = ctx.offset(family)
    toff = target.offset(family)
    # the family must be the last one so that monomials split as rest * family part
    if fmask and fmask.bit_length() != ctx.total:
        raise PreconditionViolated("acted-on family must be the last generator family")
    out = GrassmannElement(target, {})
    cache = {}
    for m, c in value.terms.items():
        rest = m & ~fmask
        fam = (m & fmask) >> off
        img = cache.get(fam)
        if img is None:
            src = phi.monomial_image(fam)
            img = cache[fam] = GrassmannElement(target, {tm << toff: tc for tm, tc in src.terms.items()})
        rest_el = GrassmannElement(target, {_remap(rest, ctx, target): Fraction(1)})
        out = out + rest_el * img * c
    return out


def _remap(mask, src, dst):
    out = 0
    for b in bits(mask):
        fam, i = src.locate(b)
        out |= 1 << dst.index(fam, i)
    return out


def involves_family_beyond(value, family, n):
    """Does the value use generators of `family` with index > n?"""
    if isinstance(value, SuperMatrix):
        return any(involves_family_beyond(e, family, n) for r in value.entries for e in r)
    ctx = value.context
    off = ctx.offset(family)
    keep = ((1 << n) - 1) << off
    fmask = ctx.family_mask(family)
    return any(m & fmask & ~keep for m in value.terms)


def restrict_family(value, family, n):
    """Re-home a value that only uses the first n generators of `family`."""
    if isinstance(value, SuperMatrix):
        return value.map(lambda e: restrict_family(e, family, n))
    target = value.context.with_family(family, n)
    return value.embed(target)


# fibred products


@dataclass
class FibredProduct:
    context: GeneratorContext
    pr1: GrassmannMorphism
    pr2: GrassmannMorphism
    dimension: int


def fibred_product(phi1, phi2):
    """A1 (x)_A A2 for a submersion phi1: A -> A1 and any phi2: A -> A2."""
    if phi1.source != phi2.source:
        raise PreconditionViolated("morphisms must share their source")
    st = straighten(phi1)
    L, L1, L2 = phi1.source.total, phi1.target.total, phi2.target.total
    N = L1 + L2 - L
    ctx = bare_context(N)
    zeta = [ctx.monomial(1 << k) for k in range(N)]
    pr2 = GrassmannMorphism(phi2.target, ctx, zeta[:L2])
    rho_images = [pr2(phi2.images[j]) for j in range(L)] + zeta[L2:]
    rho = GrassmannMorphism(phi1.target, ctx, rho_images)
    pr1 = rho.compose(st.gamma)
    for j in range(L):
        if pr1(phi1.images[j]) != pr2(phi2.images[j]):
            raise AssertionError("fibred product square does not commute")
    return FibredProduct(ctx, pr1, pr2, N)


# descent


@dataclass
class GlueResult:
    section: object
    checked_pairs: list = field(default_factory=list)
    predicate: bool = True


def glue_sections(cover, sections, predicate=None, family=FAMILY):
    """Unique base section whose pullbacks along the cover are the given sections."""
    if not cover:
        raise PreconditionViolated("empty cover")
    for phi in cover:
        if not is_submersion(phi):
            raise NotSubmersion("cover members must be submersions")
    if predicate is not None:
        for s in sections:
            if not predicate(s):
                raise PreconditionViolated("a section lies outside the subfunctor")
    pairs = []
    for i, phi_i in enumerate(cover):
        for j, phi_j in enumerate(cover):
            if j < i:
                continue
            fp = fibred_product(phi_i, phi_j)
            left = push(fp.pr1, sections[i], family)
            right = push(fp.pr2, sections[j], family)
            pairs.append((i, j))
            if left != right:
                if i == j:
                    raise NoDescent(f"section {i} depends on fibre coordinates")
                raise Incompatible(f"sections {i} and {j} disagree on the overlap")
    st = straighten(cover[0])
    L = cover[0].source.total
    b = push(st.gamma, sections[0], family)
    if involves_family_beyond(b, family, L):
        raise NoDescent("section does not descend")
    base = restrict_family(b, family, L)
    for phi, s in zip(cover, sections):
        if push(phi, base, family) != s:
            raise Incompatible("glued section does not reproduce the inputs")
    ok = predicate(base) if predicate is not None else True
    return GlueResult(base, pairs, ok)


# audits


def enumerate_rank1(L, coeffs=(-1, 0, 1)):
    """All one-generator morphisms into L generators with coefficients in coeffs."""
    ctx = bare_context(L)
    src = bare_context(1)
    odd = [m for m in ctx.monomials() if m.bit_count() & 1]
    for combo in product(coeffs, repeat=len(odd)):
        mu = GrassmannElement(ctx, {m: Fraction(c) for m, c in zip(odd, combo) if c})
        yield GrassmannMorphism(src, ctx, [mu])


def random_rank1(L, rng, zero_linear=0.5, span=5):
    ctx = bare_context(L)
    terms = {}
    for m in ctx.monomials():
        if m.bit_count() & 1 and rng.random() < 0.6:
            if m.bit_count() == 1 and rng.random() < zero_linear:
                continue
            c = Fraction(rng.randint(-span, span), rng.randint(1, span))
            if c:
                terms[m] = c
    return GrassmannMorphism(bare_context(1), ctx, [GrassmannElement(ctx, terms)])


def equivalence_audit(phi):
    """Submersion and freeness computed independently; rank-1 restrictions too."""
    sub = is_submersion(phi)
    free = is_free(phi)
    report = {"submersion": sub, "free": free, "agree": sub == free}
    if phi.source.total == 1:
        f1 = is_free_rank1(phi)
        report["free_rank1"] = f1
        report["agree"] = report["agree"] and f1 == sub
    else:
        rows = []
        for j in range(phi.source.total):
            r = restriction(phi, j)
            rs, rf = is_submersion(r), is_free_rank1(r)
            rows.append({"generator": j + 1, "submersion": rs, "free_rank1": rf})
            report["agree"] = report["agree"] and rs == rf
            if sub:
                report["agree"] = report["agree"] and rs
        report["restrictions"] = rows
    if sub:
        st = straighten(phi)
        ident = GrassmannMorphism.identity(phi.target)
        report["straightened"] = st.gamma.compose(st.beta).images == ident.images
        report["agree"] = report["agree"] and report["straightened"]
    return report


def exhaustive_rank1_audit(max_L=4, coeffs=(-1, 0, 1)):
    count = 0
    disagreements = []
    for L in range(1, max_L + 1):
        for phi in enumerate_rank1(L, coeffs):
            count += 1
            if is_submersion(phi) != is_free_rank1(phi):
                disagreements.append(phi)
    return count, disagreements


def random_rank1_audit(n=1000, max_L=5, seed=0):
    rng = random.Random(seed)
    disagreements = []
    for _ in range(n):
        phi = random_rank1(rng.randint(1, max_L), rng)
        if is_submersion(phi) != is_free_rank1(phi):
            disagreements.append(phi)
    return n, disagreements
