"""Polynomials in commuting even variables with Grassmann coefficients.

A SuperFunction models functions on a coordinate patch (even variables are the
even coordinates) and, with the single even variable ``t``, functions along a
path.  Keys are (exponent tuple, generator mask).
"""

from fractions import Fraction

from .errors import ContextMismatch
from .grassmann import GrassmannElement, bits, merge_sign, parity_of


def _add_exps(e1, e2):
    return tuple(a + b for a, b in zip(e1, e2))


class SuperFunction:
    __slots__ = ("context", "evens", "terms")

    def __init__(self, context, evens=(), terms=None):
        self.context = context
        self.evens = tuple(evens)
        out = {}
        n = len(self.evens)
        for (e, m), c in (terms or {}).items():
            if len(e) != n:
                raise ValueError("exponent length mismatch")
            c = Fraction(c)
            if c:
                out[(tuple(e), m)] = c
        self.terms = out

    @classmethod
    def _raw(cls, context, evens, terms):
        obj = cls.__new__(cls)
        obj.context = context
        obj.evens = evens
        obj.terms = terms
        return obj

    # constructors

    @classmethod
    def constant(cls, context, evens, c):
        z = tuple(0 for _ in evens)
        return cls._raw(context, tuple(evens), {(z, 0): Fraction(c)} if c else {})

    @classmethod
    def variable(cls, context, evens, name):
        evens = tuple(evens)
        e = tuple(int(v == name) for v in evens)
        if name not in evens:
            raise KeyError(name)
        return cls._raw(context, evens, {(e, 0): Fraction(1)})

    @classmethod
    def generator(cls, context, evens, family, i):
        z = tuple(0 for _ in evens)
        return cls._raw(context, tuple(evens), {(z, 1 << context.index(family, i)): Fraction(1)})

    @classmethod
    def from_grassmann(cls, g, evens=()):
        z = tuple(0 for _ in evens)
        return cls._raw(g.context, tuple(evens), {(z, m): c for m, c in g.terms.items()})

    def zero_like(self):
        return SuperFunction._raw(self.context, self.evens, {})

    def one_like(self):
        return SuperFunction.constant(self.context, self.evens, 1)

    def scalar_like(self, c):
        return SuperFunction.constant(self.context, self.evens, c)

    # ring operations

    def _coerce(self, other):
        if isinstance(other, SuperFunction):
            if other.context != self.context or other.evens != self.evens:
                raise ContextMismatch(f"{self.evens}/{other.evens}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.scalar_like(other)
        if isinstance(other, GrassmannElement):
            if other.context != self.context:
                raise ContextMismatch("grassmann context differs")
            return SuperFunction.from_grassmann(other, self.evens)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return SuperFunction._raw(self.context, self.evens, out)

    __radd__ = __add__

    def __neg__(self):
        return SuperFunction._raw(self.context, self.evens, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return self.zero_like()
            return SuperFunction._raw(self.context, self.evens, {k: c * other for k, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = {}
        for (e1, m1), c1 in self.terms.items():
            for (e2, m2), c2 in other.terms.items():
                if m1 & m2:
                    continue
                k = (_add_exps(e1, e2), m1 | m2)
                v = out.get(k, 0) + merge_sign(m1, m2) * c1 * c2
                if v:
                    out[k] = v
                else:
                    del out[k]
        return SuperFunction._raw(self.context, self.evens, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __pow__(self, n):
        out = self.one_like()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GrassmannElement)):
            other = self._coerce(other)
        if not isinstance(other, SuperFunction):
            return NotImplemented
        return self.context == other.context and self.evens == other.evens and self.terms == other.terms

    def __hash__(self):
        return hash((self.evens, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        from .parser import format_function

        return f"SuperFunction({format_function(self)})"

    # structure

    def is_zero(self):
        return not self.terms

    def parity(self):
        ps = {parity_of(m) for (_, m) in self.terms}
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def part(self, p):
        return SuperFunction._raw(self.context, self.evens,
                                  {k: c for k, c in self.terms.items() if parity_of(k[1]) == p})

    def is_constant(self):
        return all(not any(e) for (e, _) in self.terms)

    def to_grassmann(self):
        if not self.is_constant():
            raise ValueError("function depends on even variables")
        return GrassmannElement._raw(self.context, {m: c for (_, m), c in self.terms.items()})

    def body(self):
        """Part free of all generators, as a SuperFunction."""
        return SuperFunction._raw(self.context, self.evens, {k: c for k, c in self.terms.items() if k[1] == 0})

    def body_constant(self):
        """The rational body, or None if the body depends on even variables."""
        b = self.body()
        if not b.terms:
            return Fraction(0)
        if not b.is_constant():
            return None
        return b.terms[(tuple(0 for _ in self.evens), 0)]

    def odd_support(self):
        m = 0
        for (_, k) in self.terms:
            m |= k
        return m

    def degree(self, name):
        i = self.evens.index(name)
        return max((e[i] for (e, _) in self.terms), default=-1)

    # calculus

    def partial_even(self, name):
        i = self.evens.index(name)
        out = {}
        for (e, m), c in self.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[(ne, m)] = out.get((ne, m), 0) + c * e[i]
        return SuperFunction._raw(self.context, self.evens, {k: v for k, v in out.items() if v})

    def left_partial(self, bit):
        probe = 1 << bit
        below = probe - 1
        out = {}
        for (e, m), c in self.terms.items():
            if m & probe:
                sign = -1 if (m & below).bit_count() & 1 else 1
                out[(e, m ^ probe)] = sign * c
        return SuperFunction._raw(self.context, self.evens, out)

    def integrate(self, name):
        """Antiderivative in `name` vanishing at 0."""
        i = self.evens.index(name)
        out = {}
        for (e, m), c in self.terms.items():
            ne = e[:i] + (e[i] + 1,) + e[i + 1:]
            out[(ne, m)] = c / (e[i] + 1)
        return SuperFunction._raw(self.context, self.evens, out)

    def evaluate(self, name, value):
        """Substitute a rational value; the variable stays in `evens`."""
        i = self.evens.index(name)
        value = Fraction(value)
        out = {}
        for (e, m), c in self.terms.items():
            ne = e[:i] + (0,) + e[i + 1:]
            v = out.get((ne, m), 0) + c * value ** e[i]
            if v:
                out[(ne, m)] = v
            else:
                out.pop((ne, m), None)
        return SuperFunction._raw(self.context, self.evens, out)

    def drop_evens(self, new_evens):
        """Re-home a function whose dropped variables have exponent zero."""
        new_evens = tuple(new_evens)
        idx = [self.evens.index(v) for v in new_evens]
        out = {}
        for (e, m), c in self.terms.items():
            if any(e[j] for j in range(len(e)) if j not in idx):
                raise ValueError("function still depends on a dropped variable")
            out[(tuple(e[j] for j in idx), m)] = c
        return SuperFunction._raw(self.context, new_evens, out)

    def reparametrize(self, name, scale, shift=0):
        """Substitute name -> scale*name + shift (rationals)."""
        self.evens.index(name)
        var = SuperFunction.variable(self.context, self.evens, name) * Fraction(scale) + Fraction(shift)
        return self.compose({name: var}, {}, self.evens)

    def embed(self, target_context, bit_map=None):
        out = {}
        for (e, m), c in self.terms.items():
            g = GrassmannElement._raw(self.context, {m: c}).embed(target_context, bit_map)
            for nm, nc in g.terms.items():
                out[(e, nm)] = out.get((e, nm), 0) + nc
        return SuperFunction(target_context, self.evens, out)

    def compose(self, even_images, odd_images, target_evens):
        """Pull back along a substitution.

        even_images: even variable name -> SuperFunction over target_evens.
        odd_images: generator bit -> odd SuperFunction over target_evens.
        Unlisted even variables must not occur; unlisted bits map to themselves.
        """
        target_evens = tuple(target_evens)
        one = SuperFunction.constant(self.context, target_evens, 1)
        odd_mask = 0
        for b in odd_images:
            odd_mask |= 1 << b
        pow_cache = {}

        def even_power(i, k):
            key = (i, k)
            got = pow_cache.get(key)
            if got is None:
                if k == 0:
                    got = one
                else:
                    name = self.evens[i]
                    if name not in even_images:
                        raise KeyError(f"no image for even variable {name}")
                    got = even_power(i, k - 1) * even_images[name]
                pow_cache[key] = got
            return got

        odd_cache = {}

        def odd_product(mask):
            got = odd_cache.get(mask)
            if got is None:
                got = one
                for b in bits(mask):
                    got = got * odd_images[b]
                odd_cache[mask] = got
            return got

        zero_exps = tuple(0 for _ in target_evens)
        acc = {}
        for (e, m), c in self.terms.items():
            sub = m & odd_mask
            keep = m & ~odd_mask
            sign = merge_sign(sub, keep)
            term = odd_product(sub)
            for i, k in enumerate(e):
                if k:
                    term = term * even_power(i, k)
            if keep:
                term = term * SuperFunction._raw(self.context, target_evens, {(zero_exps, keep): Fraction(1)})
            for key, v in term.terms.items():
                nv = acc.get(key, 0) + sign * c * v
                if nv:
                    acc[key] = nv
                else:
                    acc.pop(key, None)
        return SuperFunction._raw(self.context, target_evens, acc)
