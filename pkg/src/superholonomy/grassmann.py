"""Finite Grassmann algebras over the rationals.

A monomial is a bitmask over the generators of a GeneratorContext; bit i is
generator i in the global ordering, and a stored monomial is always the
product of its generators in increasing order.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .errors import ContextMismatch, NotInvertible, PreconditionViolated
from .linalg import Echelon

MAX_GENERATORS = 64


@lru_cache(maxsize=1 << 20)
def merge_sign(a, b):
    """Sign of reordering (gens of a)(gens of b) into increasing order."""
    n = 0
    while b:
        low = b & -b
        n += (a & ~((low << 1) - 1)).bit_count()
        b ^= low
    return -1 if n & 1 else 1


def mul_terms(x, y):
    out = {}
    for ma, ca in x.items():
        for mb, cb in y.items():
            if ma & mb:
                continue
            m = ma | mb
            v = out.get(m, 0) + merge_sign(ma, mb) * ca * cb
            if v:
                out[m] = v
            else:
                del out[m]
    return out


def add_terms(x, y, coeff=1):
    out = dict(x)
    for m, c in y.items():
        v = out.get(m, 0) + coeff * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def bits(mask):
    """Indices of the set bits of mask, increasing."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(indices):
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def parity_of(mask):
    return mask.bit_count() & 1


@dataclass(frozen=True)
class GeneratorContext:
    """Ordered generator families, e.g. (("th", 1), ("etaS", 2), ("etaT", 3))."""

    families: tuple

    def __post_init__(self):
        fams = tuple((str(n), int(c)) for n, c in self.families)
        names = [n for n, _ in fams]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate family names in {names}")
        if any(c < 0 for _, c in fams):
            raise ValueError("negative family size")
        object.__setattr__(self, "families", fams)
        if self.total > MAX_GENERATORS:
            raise ValueError(f"at most {MAX_GENERATORS} generators supported, got {self.total}")

    @property
    def total(self):
        return sum(c for _, c in self.families)

    @property
    def full_mask(self):
        return (1 << self.total) - 1

    def offset(self, family):
        off = 0
        for n, c in self.families:
            if n == family:
                return off
            off += c
        raise KeyError(family)

    def size(self, family):
        for n, c in self.families:
            if n == family:
                return c
        return 0

    def has_family(self, family):
        return any(n == family for n, _ in self.families)

    def index(self, family, i):
        """Bit position of the i-th (1-based) generator of a family."""
        if not 1 <= i <= self.size(family):
            raise IndexError(f"{family}{i} outside context {self.families}")
        return self.offset(family) + i - 1

    def family_mask(self, family):
        if not self.has_family(family):
            return 0
        return ((1 << self.size(family)) - 1) << self.offset(family)

    def locate(self, bit):
        off = 0
        for n, c in self.families:
            if bit < off + c:
                return n, bit - off + 1
            off += c
        raise IndexError(bit)

    def label(self, bit):
        n, i = self.locate(bit)
        return f"{n}{i}"

    def generator(self, family, i):
        return GrassmannElement(self, {1 << self.index(family, i): Fraction(1)})

    def one(self):
        return GrassmannElement(self, {0: Fraction(1)})

    def zero(self):
        return GrassmannElement(self, {})

    def scalar(self, c):
        return GrassmannElement(self, {0: Fraction(c)})

    def monomial(self, mask, coeff=1):
        return GrassmannElement(self, {mask: Fraction(coeff)})

    def monomials(self, family=None):
        """All monomial masks over one family (or over everything)."""
        if family is None:
            idx = list(range(self.total))
        else:
            off = self.offset(family)
            idx = list(range(off, off + self.size(family)))
        out = []
        for r in range(len(idx) + 1):
            for combo in combinations(idx, r):
                out.append(mask_of(combo))
        return out

    def with_family(self, family, count):
        """Copy of the context with one family resized (appended if absent)."""
        fams = list(self.families)
        for k, (n, _) in enumerate(fams):
            if n == family:
                fams[k] = (n, count)
                return GeneratorContext(tuple(fams))
        return GeneratorContext(tuple(fams) + ((family, count),))


def _check_same(a, b):
    if a.context != b.context:
        raise ContextMismatch(f"{a.context.families} vs {b.context.families}")


class GrassmannElement:
    """Exact element of a Grassmann algebra; treat as immutable."""

    __slots__ = ("context", "terms")

    def __init__(self, context, terms=None):
        self.context = context
        out = {}
        full = context.full_mask
        for m, c in (terms or {}).items():
            if m & ~full:
                raise ValueError(f"monomial {m:b} outside context")
            c = Fraction(c)
            if c:
                out[m] = c
        self.terms = out

    @classmethod
    def _raw(cls, context, terms):
        obj = cls.__new__(cls)
        obj.context = context
        obj.terms = terms
        return obj

    # ring structure

    def _coerce(self, other):
        if isinstance(other, GrassmannElement):
            _check_same(self, other)
            return other
        if isinstance(other, (int, Fraction)):
            return GrassmannElement._raw(self.context, {0: Fraction(other)} if other else {})
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GrassmannElement._raw(self.context, add_terms(self.terms, other.terms))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GrassmannElement._raw(self.context, add_terms(self.terms, other.terms, -1))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return GrassmannElement._raw(self.context, {m: -c for m, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return self.context.zero()
            return GrassmannElement._raw(self.context, {m: c * other for m, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GrassmannElement._raw(self.context, mul_terms(self.terms, other.terms))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        return self.context == other.context and self.terms == other.terms

    def __hash__(self):
        return hash((self.context, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"GrassmannElement({format_element(self)})"

    # structure

    def is_zero(self):
        return not self.terms

    def zero_like(self):
        return self.context.zero()

    def one_like(self):
        return self.context.one()

    def scalar_like(self, c):
        return self.context.scalar(c)

    def body(self):
        return self.terms.get(0, Fraction(0))

    def soul(self):
        return GrassmannElement._raw(self.context, {m: c for m, c in self.terms.items() if m})

    def parity(self):
        """0 or 1 for homogeneous elements (zero counts as even), None otherwise."""
        ps = {parity_of(m) for m in self.terms}
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def is_homogeneous(self):
        return self.parity() is not None

    def part(self, p):
        return GrassmannElement._raw(self.context, {m: c for m, c in self.terms.items() if parity_of(m) == p})

    def max_degree(self):
        return max((m.bit_count() for m in self.terms), default=-1)

    def support(self):
        m = 0
        for k in self.terms:
            m |= k
        return m

    def left_partial(self, bit):
        return left_partial(bit, self)

    def invert(self):
        return invert(self)

    def coefficient_split(self, family):
        return coefficient_split(self, family)

    def embed(self, target, bit_map=None):
        """Re-express in another context; bit_map sends old bits to new bits.

        Without a bit map generators are matched by (family, index).
        """
        if bit_map is None:
            bit_map = {}
            for b in bits(self.support()):
                fam, i = self.context.locate(b)
                bit_map[b] = target.index(fam, i)
        out = {}
        for m, c in self.terms.items():
            bs = [bit_map[b] for b in bits(m)]
            nm = 0
            sign = 1
            for b in bs:
                sign *= merge_sign(nm, 1 << b)
                nm |= 1 << b
            out[nm] = out.get(nm, 0) + sign * c
        return GrassmannElement(target, out)


def multiply(a, b):
    _check_same(a, b)
    return a * b


def invert(a):
    """Inverse via the geometric series in soul/body; exact and terminating."""
    b = a.body()
    if not b:
        raise NotInvertible("element has zero body")
    inv_b = 1 / b
    n = a.soul() * (-inv_b)
    result = a.context.one()
    power = a.context.one()
    while True:
        power = power * n
        if power.is_zero():
            break
        result = result + power
    return result * inv_b


def left_partial(bit, a):
    """Odd left derivative along generator `bit`."""
    out = {}
    probe = 1 << bit
    below = probe - 1
    for m, c in a.terms.items():
        if m & probe:
            sign = -1 if (m & below).bit_count() & 1 else 1
            out[m ^ probe] = sign * c
    return GrassmannElement._raw(a.context, out)


def coefficient_split(a, family):
    """Write a = sum_I h_I * eta^I with eta^I over `family`, h_I free of it."""
    fmask = a.context.family_mask(family)
    out = {}
    for m, c in a.terms.items():
        fpart = m & fmask
        rest = m & ~fmask
        # m = rest * fpart after reordering
        sign = merge_sign(rest, fpart)
        out.setdefault(fpart, {})[rest] = sign * c
    return {k: GrassmannElement._raw(a.context, v) for k, v in out.items()}


def coefficient_split_left(a, family):
    """Write a = sum_I eta^I * h_I with the family monomial on the left."""
    fmask = a.context.family_mask(family)
    out = {}
    for m, c in a.terms.items():
        fpart = m & fmask
        rest = m & ~fmask
        sign = merge_sign(fpart, rest)
        out.setdefault(fpart, {})[rest] = sign * c
    return {k: GrassmannElement._raw(a.context, v) for k, v in out.items()}


def reassemble(split, context):
    total = context.zero()
    for fmask, h in split.items():
        total = total + h * context.monomial(fmask)
    return total


class GrassmannMorphism:
    """Algebra morphism given by odd images of the source generators."""

    def __init__(self, source, target, images):
        self.source = source
        self.target = target
        images = list(images)
        if len(images) != source.total:
            raise ValueError(f"need {source.total} images, got {len(images)}")
        for k, im in enumerate(images):
            if im.context != target:
                raise ContextMismatch("image lives in the wrong context")
            if im.parity() != 1 and not im.is_zero():
                raise PreconditionViolated(f"image of generator {k + 1} is not odd")
        self.images = tuple(images)
        self._cache = {}

    @classmethod
    def identity(cls, context):
        return cls(context, context, [context.monomial(1 << b) for b in range(context.total)])

    def monomial_image(self, mask):
        got = self._cache.get(mask)
        if got is None:
            got = self.target.one()
            for b in bits(mask):
                got = got * self.images[b]
            self._cache[mask] = got
        return got

    def __call__(self, a):
        return apply_morphism(self, a)

    def compose(self, other):
        """self after other."""
        return GrassmannMorphism(other.source, self.target, [self(im) for im in other.images])

    def linear_part(self):
        """Rows = source generators, columns = target generators."""
        return [[im.terms.get(1 << j, Fraction(0)) for j in range(self.target.total)] for im in self.images]


def apply_morphism(phi, a):
    if a.context != phi.source:
        raise ContextMismatch("element not in the morphism source")
    out = {}
    for m, c in a.terms.items():
        for tm, tc in phi.monomial_image(m).terms.items():
            v = out.get(tm, 0) + c * tc
            if v:
                out[tm] = v
            else:
                out.pop(tm, None)
    return GrassmannElement._raw(phi.target, out)


def ideal_span(mu):
    ctx = mu.context
    return Echelon((mu * ctx.monomial(m)).terms for m in ctx.monomials())


def ideal_dimension(mu):
    """Real dimension of the principal ideal (mu)."""
    if mu.is_zero():
        return 0
    return ideal_span(mu).rank


def _pairwise_disjoint(masks):
    seen = 0
    for m in masks:
        if m & seen:
            return False
        seen |= m
    return True


def esin_koc_dimension(mu):
    """Closed-form ideal dimension for generator-disjoint monomials."""
    masks = list(mu.terms)
    if not _pairwise_disjoint(masks):
        raise PreconditionViolated("monomials of mu share a generator")
    if not masks:
        return 0
    prod = Fraction(1)
    for m in masks:
        prod *= 1 - Fraction(2) ** (1 - m.bit_count())
    val = Fraction(2) ** (mu.context.total - 1) * (1 - prod)
    if val.denominator != 1:
        raise ArithmeticError(f"non-integral dimension {val}")
    return int(val)


def _lex_key(mask):
    return tuple(bits(mask))


def replacement_algorithm(mu, check=True):
    """Rewrite odd mu with dim(mu) >= 2^(L-1) into generator-disjoint shape.

    Returns (mu_prime, lam) where lam maps each nonzero-coefficient monomial of
    mu to the monomial of mu_prime it became.  Each round picks the smallest
    generator shared by two monomials, moves the lexicographically largest
    such monomial onto a fresh generator and undoes the shift with the
    automorphism fresh -> fresh - shared.
    """
    ctx = mu.context
    if mu.parity() != 1:
        raise PreconditionViolated("mu must be odd and nonzero")
    if check and ideal_dimension(mu) < 2 ** (ctx.total - 1):
        raise PreconditionViolated("dim(mu) < 2^(L-1)")
    fam = ctx.families[0][0] if len(ctx.families) == 1 else "eta"
    cur_terms = dict(mu.terms)
    total = ctx.total
    # lam tracks original monomial -> current monomial
    lam = {m: m for m in mu.terms}
    while True:
        j0 = None
        for b in range(total):
            hits = [m for m in cur_terms if m >> b & 1]
            if len(hits) >= 2:
                j0 = b
                break
        if j0 is None:
            break
        hits.sort(key=_lex_key)
        chosen = hits[-1]
        coeff = cur_terms[chosen]
        fresh = total
        total += 1
        new_ctx = GeneratorContext(((fam, total),))
        # eta^I = eta^{j0} * r with r = sign * eta^{I minus j0}
        rest = chosen & ~(1 << j0)
        r_sign = merge_sign(1 << j0, rest)
        new_terms = dict(cur_terms)
        del new_terms[chosen]
        # after the automorphism only the fresh-generator copy survives
        moved = rest | (1 << fresh)
        s = merge_sign(1 << fresh, rest) * r_sign
        new_terms[moved] = new_terms.get(moved, 0) + s * coeff
        # sanity: the full two-step construction gives the same element
        if check:
            hat = GrassmannElement(new_ctx, {})
            base = {m: c for m, c in cur_terms.items() if m != chosen}
            hat = hat + GrassmannElement(new_ctx, base)
            r_el = GrassmannElement(new_ctx, {rest: r_sign})
            shift = new_ctx.monomial(1 << j0) + new_ctx.monomial(1 << fresh)
            hat = hat + shift * r_el * coeff
            images = [new_ctx.monomial(1 << b) for b in range(total)]
            images[fresh] = new_ctx.monomial(1 << fresh) - new_ctx.monomial(1 << j0)
            phi = GrassmannMorphism(new_ctx, new_ctx, images)
            if phi(hat).terms != {m: c for m, c in new_terms.items() if c}:
                raise AssertionError("replacement step disagrees with its construction")
        cur_terms = {m: c for m, c in new_terms.items() if c}
        for k, v in lam.items():
            if v == chosen:
                lam[k] = moved
    out_ctx = GeneratorContext(((fam, total),))
    mu_prime = GrassmannElement(out_ctx, cur_terms)
    return mu_prime, lam


def format_element(a, names=None):
    """Human readable, parseable rendering such as 1/2 + etaS1*etaS2."""
    if a.is_zero():
        return "0"
    parts = []
    for m in sorted(a.terms, key=lambda m: (m.bit_count(), _lex_key(m))):
        c = a.terms[m]
        gens = [names[b] if names else a.context.label(b) for b in bits(m)]
        if not gens:
            parts.append(str(c))
        elif c == 1:
            parts.append("*".join(gens))
        elif c == -1:
            parts.append("-" + "*".join(gens))
        else:
            parts.append(f"{c}*" + "*".join(gens))
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out
