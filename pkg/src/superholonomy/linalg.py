"""Exact sparse linear algebra over the rationals.

Vectors are dicts from sortable keys to nonzero Fractions.  Everything in the
package that asks "is this in the span of that" ends up here.
"""

from fractions import Fraction


def clean(vec):
    return {k: v for k, v in vec.items() if v}


def axpy(target, coeff, vec):
    """target += coeff * vec, in place, dropping zeros."""
    for k, v in vec.items():
        new = target.get(k, 0) + coeff * v
        if new:
            target[k] = new
        else:
            target.pop(k, None)


class Echelon:
    """Incremental echelon basis of a subspace of Q^(keys).

    Each stored row has its smallest key as pivot with coefficient one.
    Reduction eliminates pivots in increasing key order, which only ever
    introduces larger keys, so it terminates.
    """

    def __init__(self, vectors=()):
        self.rows = {}
        for v in vectors:
            self.add(v)

    def __len__(self):
        return len(self.rows)

    @property
    def rank(self):
        return len(self.rows)

    def reduce(self, vec):
        vec = {k: Fraction(v) for k, v in vec.items() if v}
        rows = self.rows
        while True:
            hits = [k for k in vec if k in rows]
            if not hits:
                return vec
            k = min(hits)
            axpy(vec, -vec[k], rows[k])

    def add(self, vec):
        """Insert vec; return True when it enlarged the span."""
        red = self.reduce(vec)
        if not red:
            return False
        p = min(red)
        c = red[p]
        self.rows[p] = {k: v / c for k, v in red.items()}
        return True

    def contains(self, vec):
        return not self.reduce(vec)

    def coordinates(self, vec):
        """Express vec in terms of stored rows, or None if outside the span."""
        vec = {k: Fraction(v) for k, v in vec.items() if v}
        coords = {}
        rows = self.rows
        while True:
            hits = [k for k in vec if k in rows]
            if not hits:
                break
            k = min(hits)
            c = vec[k]
            coords[k] = coords.get(k, 0) + c
            axpy(vec, -c, rows[k])
        return None if vec else coords

    def rref(self):
        """Fully reduced rows keyed by pivot; unique for the subspace."""
        done = {}
        for p in sorted(self.rows, reverse=True):
            row = dict(self.rows[p])
            for k in [k for k in row if k != p and k in done]:
                c = row.get(k)
                if c:
                    axpy(row, -c, done[k])
            done[p] = row
        return done

    def canonical(self):
        rr = self.rref()
        return tuple((p, tuple(sorted(rr[p].items()))) for p in sorted(rr))

    def basis(self):
        rr = self.rref()
        return [rr[p] for p in sorted(rr)]

    def copy(self):
        e = Echelon()
        e.rows = {k: dict(v) for k, v in self.rows.items()}
        return e


def rank(vectors):
    return Echelon(vectors).rank


def nullspace(columns, n):
    """Kernel of the linear map sending unknown j to columns[j] (sparse dicts).

    Returns a basis of solutions as lists of n Fractions.
    """
    # Gaussian elimination on the transposed system: rows are equations.
    keys = sorted({k for col in columns for k in col})
    mat = [[Fraction(columns[j].get(k, 0)) for j in range(n)] for k in keys]
    piv_cols = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, len(mat)) if mat[i][c]), None)
        if pr is None:
            continue
        mat[r], mat[pr] = mat[pr], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c]:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        piv_cols.append(c)
        r += 1
    free = [c for c in range(n) if c not in piv_cols]
    sols = []
    for fc in free:
        sol = [Fraction(0)] * n
        sol[fc] = Fraction(1)
        for i, pc in enumerate(piv_cols):
            sol[pc] = -mat[i][fc]
        sols.append(sol)
    return sols


def solve_dense(a, b):
    """Solve a square or overdetermined rational system a x = b exactly.

    Returns None when inconsistent; picks zeros for free unknowns.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    aug = [[Fraction(v) for v in row] + [Fraction(bv)] for row, bv in zip(a, b)]
    piv = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, m) if aug[i][c]), None)
        if pr is None:
            continue
        aug[r], aug[pr] = aug[pr], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [v * inv for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv.append(c)
        r += 1
    if any(aug[i][n] for i in range(r, m)):
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(piv):
        x[c] = aug[i][n]
    return x


def inverse_dense(a):
    n = len(a)
    cols = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        col = solve_dense(a, e)
        if col is None:
            return None
        cols.append(col)
    check = [[sum(a[i][k] * cols[j][k] for k in range(n)) for j in range(n)] for i in range(n)]
    if any(check[i][j] != (i == j) for i in range(n) for j in range(n)):
        return None
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def dense_rank(a):
    if not a:
        return 0
    return Echelon([{j: v for j, v in enumerate(row) if v} for row in a]).rank
