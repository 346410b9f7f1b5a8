"""End-to-end acceptance checks, one test per criterion.

Each test records a verdict line (see the "acceptance criteria" section of
the pytest summary) and fails if the criterion or its time budget is missed.
"""

import random
import time
from fractions import Fraction
from itertools import combinations, product

import oracle
from acceptance_log import record
from conftest import model_path
from superholonomy.fppf import bare_context, exhaustive_rank1_audit, random_rank1_audit
from superholonomy.geometry import PatchModel, curvature, higher_covariant_derivative
from superholonomy.grassmann import (
    GeneratorContext,
    GrassmannElement,
    GrassmannMorphism,
    esin_koc_dimension,
    ideal_dimension,
    replacement_algorithm,
)
from superholonomy.holonomy import (
    HolonomyEngine,
    comparison_check,
    conjugated_curvature,
    degree_decomposition_check,
    holonomy_report,
    invariance_submodule,
    invariance_vector,
    sheaf_audit_holonomy,
    stabilization_threshold,
)
from superholonomy.models import load_model_file
from superholonomy.superlinalg import SuperMatrix, span_equal, span_of
from superholonomy.splitting import derham_wu_split, product_holonomy_check
from superholonomy.transport import (
    PathModel,
    SPoint,
    conjugated_curvature_derivative,
    eta_derivative_of_transport,
    parallel_transport,
    special_point_identities,
    special_point_size,
)


def load(name):
    return load_model_file(model_path(name))


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def verdict(number, title, checks, seconds, budget=None):
    ok = all(checks.values()) and (budget is None or seconds < budget)
    record(number, title, ok, seconds)
    failed = [k for k, v in checks.items() if not v]
    assert not failed, failed
    if budget is not None:
        assert seconds < budget, f"took {seconds:.2f}s, budget {budget}s"


def test_01_golden_value():
    with Timer() as t:
        m = load("example")
        patch = PatchModel(0, 1, 4, 2)
        c = m.connection().with_patch(patch)
        ctx = patch.context
        s = [None] + [ctx.generator("etaS", i) for i in (1, 2, 3, 4)]
        t1, t2 = ctx.generator("etaT", 1), ctx.generator("etaT", 2)
        want = [[s[1] * s[2] * t1 * t2 * -2]]
        origin = SPoint.origin(patch)
        a, b = SPoint(patch, [s[3]]), SPoint(patch, [s[3] + s[4]])
        loop = PathModel.linear(origin, a).then(PathModel.linear(a, b)).then(PathModel.linear(b, origin))
        paths = {"constant": PathModel.constant(origin), "open": PathModel.linear(origin, a), "loop": loop}
        checks = {k: conjugated_curvature(c, p, [t1], [t2]).entries == want for k, p in paths.items()}
        ident = SuperMatrix.identity((1,), ctx.zero())
        checks["loop transport nontrivial"] = parallel_transport(c, loop).matrix != ident
        spec = m.sample_spec()
        eng = HolonomyEngine(m.connection(), spec)
        c0 = eng.context0
        expected = span_of([SuperMatrix.identity((1,), c0.zero()).left_scale(
            c0.generator("etaS", 1) * c0.generator("etaS", 2))], (1,), c0)
        rep = holonomy_report(m.connection(), spec, engine=eng)
        checks["galaev"] = rep.galaev.dim == 1 and span_equal(rep.galaev, expected)
        checks["coefficient"] = rep.coefficient.dim == 1 and span_equal(rep.coefficient, expected)
    verdict(1, "golden conjugated curvature and one-dimensional holonomy", checks, t.seconds, 1.0)


def test_02_comparison_on_models():
    with Timer() as t:
        checks = {}
        for name in ("example", "product", "rank11", "drw"):
            m = load(name)
            res = comparison_check(m.connection(), m.sample_spec())
            checks[name] = res["equal"] and res["eta_derivatives_in_tower_span"]
    verdict(2, "coefficient algebra equals the S-level algebra on 4 models", checks, t.seconds, 60.0)


def _disjoint_configs(L):
    def rec(rest, start):
        yield []
        for size in (1, 3, 5):
            for blk in combinations(rest, size):
                if blk[0] < start:
                    continue
                left = [x for x in rest if x not in blk]
                for tail in rec(left, blk[0] + 1):
                    yield [blk] + tail
    yield from rec(list(range(L)), 0)


def test_03_closed_form_ideal_dimension():
    with Timer() as t:
        checks = {}
        for L in range(1, 7):
            ctx = GeneratorContext((("eta", L),))
            ok = True
            for cfg in _disjoint_configs(L):
                if not cfg:
                    continue
                masks = [sum(1 << i for i in blk) for blk in cfg]
                for signs in product((-1, 1), repeat=len(masks)):
                    mu = GrassmannElement(ctx, {mk: Fraction(sg) for mk, sg in zip(masks, signs)})
                    want = esin_koc_dimension(mu)
                    ok &= ideal_dimension(mu) == want
                    if L <= 4:
                        ok &= oracle.ideal_dimension(oracle.from_element(mu), L) == want
            checks[f"L={L}"] = ok
    verdict(3, "closed-form ideal dimension, all disjoint signed shapes with L <= 6", checks, t.seconds, 10.0)


def test_04_replacement_algorithm():
    with Timer() as t:
        rng = random.Random(11)
        done = 0
        ok = True
        while done < 100:
            L = rng.randint(1, 5)
            ctx = GeneratorContext((("eta", L),))
            odd = [m for m in range(1, 2 ** L) if m.bit_count() % 2]
            picks = rng.sample(odd, rng.randint(1, min(4, len(odd))))
            terms = {m: Fraction(rng.choice([-2, -1, 1, 3])) for m in picks}
            if not any(m.bit_count() == 1 for m in terms):
                terms[1 << rng.randrange(L)] = Fraction(1)
            mu = GrassmannElement(ctx, terms)
            if ideal_dimension(mu) < 2 ** (L - 1):
                continue
            mu2, lam = replacement_algorithm(mu)
            L2 = mu2.context.total
            masks = sorted(mu2.terms)
            disjoint = all(not (a & b) for a, b in combinations(masks, 2))
            preserved = sorted(lam) == sorted(mu.terms) and all(k.bit_count() == v.bit_count() for k, v in lam.items())
            big = oracle.ideal_dimension(oracle.from_element(mu2), L2) >= 2 ** (L2 - 1)
            ok &= disjoint and preserved and big
            done += 1
    verdict(4, "replacement algorithm on 100 random inputs", {"all": ok and done == 100}, t.seconds)


def test_05_submersion_iff_free():
    with Timer() as t:
        count, bad = exhaustive_rank1_audit(max_L=4)
        n, rbad = random_rank1_audit(1000, seed=0)
        checks = {"exhaustive": count == 6654 and not bad, "random": n == 1000 and not rbad}
    verdict(5, "submersion iff free: exhaustive L <= 4 and 1000 random", checks, t.seconds)


def test_06_transport_identities():
    with Timer() as t:
        checks = {}
        for name in ("example", "product", "rank11", "drw"):
            mm = load(name)
            cc = mm.connection()
            bound = cc.patch.q + cc.patch.L + cc.patch.Lprime + 1
            ident = SuperMatrix.identity(cc.frame_par, cc.patch.context.zero())
            ok = True
            loops = [p for _, p in mm.paths.values() if p.is_loop()]
            for p in [q for _, q in mm.paths.values()]:
                op = parallel_transport(cc, p)
                back = parallel_transport(cc, p.reverse()).matrix
                ok &= op.mode == "exact" and back @ op.matrix == ident and op.max_iterations <= bound
                ok &= parallel_transport(cc, p.split()).matrix == op.matrix
            for p in loops:
                P = parallel_transport(cc, p).matrix
                ok &= parallel_transport(cc, p.then(p)).matrix == P @ P
            checks[f"cocycle, inversion, Picard bound {name}"] = ok
        m = load("example")
        c = m.connection()
        R = curvature(c)
        for name in ("h", "k"):
            path = m.paths[name][1]
            checks[f"eta derivative {name}"] = all(
                eta_derivative_of_transport(c, R, path, i)["equal"] for i in range(1, c.patch.Lprime + 1))
        for name in ("example", "product", "rank11", "drw"):
            mm = load(name)
            for k in (1, 2):
                c0 = mm.connection()
                patch = c0.patch.with_lprime(special_point_size(c0.patch.p, c0.patch.q, k))
                ck = c0.with_patch(patch)
                q = mm.base.with_patch(patch)
                Rk = curvature(ck)
                ok = special_point_identities(ck, q, Rk.components, 0, k)["equal"]
                first = higher_covariant_derivative(ck, Rk, 1)
                for z in range(patch.dim):
                    comps, par = first.two_tensor((z,))
                    ok &= special_point_identities(ck, q, comps, par, k)["equal"]
                checks[f"special points {name} k={k}"] = ok
        mr = load("rank11")
        patch = mr.connection().patch.with_lprime(2)
        cr = mr.connection().with_patch(patch)
        ctx = patch.context
        t1, t2 = ctx.generator("etaT", 1), ctx.generator("etaT", 2)
        x = mr.base.with_patch(patch)
        path = PathModel.linear(x, SPoint(patch, [x.images[0] + t1 * t2, x.images[1] + t1]))
        Rr = curvature(cr)
        ok = True
        for a in range(2):
            for b in range(2):
                u = [ctx.one() if k == a else ctx.zero() for k in range(2)]
                v = [ctx.one() if k == b else ctx.zero() for k in range(2)]
                ok &= all(conjugated_curvature_derivative(cr, Rr, path, Rr.components, 0, u, v, i)["equal"]
                          for i in (1, 2))
        checks["conjugated curvature"] = ok
        h = load("hybrid")
        hc = h.connection()
        hp = h.paths["g"][1]
        coarse = parallel_transport(hc, hp, steps=200).numeric
        fine = parallel_transport(hc, hp, steps=400).numeric
        checks["hybrid step halving"] = max(abs(coarse[k] - fine[k]).max() for k in coarse) < 1e-8
    verdict(6, "transport identities and hybrid convergence", checks, t.seconds)


TWOFOLD = {
    "example": ["zero", "unit", "nil1", "nil2"],
    "product": ["ex", "eth", "mixed", "nil"],
    "rank11": ["e1", "e2", "nil"],
    "drw": ["flat", "odd1", "odd2"],
    "flat": ["v", "w"],
}


def test_07_twofold_invariance():
    with Timer() as t:
        checks = {}
        for name, vectors in TWOFOLD.items():
            m = load(name)
            c, spec = m.connection(), m.sample_spec()
            eng = HolonomyEngine(c, spec)
            lp = holonomy_report(c, spec, engine=eng).lprime
            for v in vectors:
                checks[f"{name}:{v}"] = invariance_vector(c, spec, m.vectors[v], lp, engine=eng)["agree"]
            for s, members in m.submodules.items():
                res = invariance_submodule(c, spec, [m.vectors[v] for v in members], lp, engine=eng)
                checks[f"{name}:{s}"] = res["agree"]
        assert len(checks) >= 10
    verdict(7, f"twofold invariance conditions agree on {len(checks)} cases", checks, t.seconds)


def test_08_derham_wu():
    with Timer() as t:
        m = load("drw")
        split = derham_wu_split(m.connection(), m.metric_model(), m.sample_spec())
        flat, odd = split.blocks
        f1, f2 = m.factor_models()
        prod = product_holonomy_check(f1.connection(), f1.sample_spec(), f2.connection(), f2.sample_spec(),
                                      m.connection(), m.sample_spec())
        checks = {
            "split": split.holds,
            "flat block": flat.flat and len(flat.vectors) == 1,
            "odd block irreducible": odd.irreducibility["irreducible"] is True,
            "product": prod["equal"] and prod["connection_matches"],
        }
    verdict(8, "flat plus irreducible splitting and product holonomy", checks, t.seconds)


def test_09_sheaf_property():
    with Timer() as t:
        one, two, three = bare_context(1), bare_context(2), bare_context(3)
        e = [three.generator("eta", i) for i in (1, 2, 3)]
        cover = [
            GrassmannMorphism(one, two, [two.generator("eta", 1)]),
            GrassmannMorphism(one, three, [e[0] + e[0] * e[1] * e[2]]),
            GrassmannMorphism.identity(one),
        ]
        checks = {}
        for name in ("example", "rank11"):
            m = load(name)
            res = sheaf_audit_holonomy(m.connection(), m.sample_spec(), cover)
            for part in ("algebra", "group"):
                checks[f"{name} {part}"] = res[part]["unique"] and res[part]["corruption_rejected"]
    verdict(9, "holonomy sections glue uniquely; corrupted families rejected", checks, t.seconds)


def test_10_threshold_and_degree_decomposition():
    with Timer() as t:
        checks = {}
        for name in ("example", "product"):
            m = load(name)
            c, spec = m.connection(), m.sample_spec()
            eng = HolonomyEngine(c, spec)
            threshold, _ = stabilization_threshold(c, spec, engine=eng)
            checks[f"{name} threshold"] = threshold is not None and threshold <= 4
            res = degree_decomposition_check(c, spec, threshold, threshold + 2, engine=eng)
            checks[f"{name} decomposition"] = res["holds"]
    verdict(10, "stabilisation threshold <= 4 and degree decomposition", checks, t.seconds)
