"""Line-oriented model files.

Each non-empty line is one declaration; ``#`` starts a comment.

    manifold p=0 q=1
    base L=2
    functor lprime=4 kmax=3
    bundle tangent                  # or: bundle r=1 s=1 (frame e1.. even first)
    connection levi-civita          # derive gamma from the metric instead
    gamma th1 th1 th1 = etaS1*etaS2*th1
    aux th1 th1 th1 = 0
    metric th1 th2 = 1
    point x = 0                     # coordinates separated by ';'
    spath g = t*etaS1               # segments separated by '|'
    sloop l = t*etaS1 | (1-t)*etaS1
    tpath h = t*etaT1
    tloop k = ...
    vector v = 1 ; 0                # right components over O_S
    submodule F = v, w
    morphism phi 1 -> 3 = eta1 + eta1*eta2*eta3     # images separated by ';'
    cover C = phi, psi
    section s over phi = 1 + eta1*eta2              # one value per cover member
    factors first.model second.model                 # product decomposition, paths relative

The point named ``x`` is the base point (origin if absent); paths start there.
"""

import re
from pathlib import Path
from dataclasses import dataclass, field

from .errors import ModelError, ParityError, ParseSyntaxError, SuperholonomyError
from .functions import SuperFunction
from .geometry import ConnectionModel, MetricModel, PatchModel, levi_civita
from .grassmann import GeneratorContext, GrassmannMorphism
from .parser import Environment, parse_expression
from .transport import PathModel, SPoint, T_VAR

_KV = re.compile(r"(\w+)\s*=\s*(\S+)")


@dataclass
class ModelFile:
    patch: PatchModel = None
    frame_par: tuple = None
    frame_names: tuple = None
    tangent: bool = True
    levi_civita: bool = False
    kmax: int = 3
    lprime_max: int = 4
    gamma: dict = field(default_factory=dict)
    aux: dict = field(default_factory=dict)
    metric: dict = field(default_factory=dict)
    points: dict = field(default_factory=dict)
    paths: dict = field(default_factory=dict)  # name -> (kind, PathModel)
    vectors: dict = field(default_factory=dict)
    submodules: dict = field(default_factory=dict)
    morphisms: dict = field(default_factory=dict)
    covers: dict = field(default_factory=dict)
    sections: dict = field(default_factory=dict)  # name -> {morphism: GrassmannElement}
    factors: list = field(default_factory=list)
    source: str = ""

    def connection(self):
        if self.levi_civita:
            return levi_civita(self.metric_model(), dict(self.aux))
        return ConnectionModel(self.patch, self.frame_par, dict(self.gamma), dict(self.aux))

    def metric_model(self):
        if not self.metric:
            return None
        return MetricModel(self.patch, dict(self.metric))

    @property
    def base(self):
        return self.points.get("x") or SPoint.origin(self.patch)

    def factor_models(self):
        here = Path(self.source).parent if self.source and not self.source.startswith("<") else Path(".")
        return [load_model_file(here / f) for f in self.factors]

    def paths_of(self, kind):
        return [p for k, p in self.paths.values() if k == kind]

    def sample_spec(self, kmax=None):
        from .holonomy import SampleSpec

        return SampleSpec(self.base, self.paths_of("spath"), self.paths_of("sloop"),
                          self.paths_of("tpath"), self.paths_of("tloop"),
                          self.kmax if kmax is None else kmax)


class _Loader:
    def __init__(self, text, source):
        self.model = ModelFile(source=source)
        self.lines = text.splitlines()
        self.p = self.q = 0
        self.L = 0
        self.bundle = None

    def fail(self, msg, line, col=1, cls=ParseSyntaxError):
        raise cls(msg, line, col)

    def load(self):
        headers = []
        body = []
        for no, raw in enumerate(self.lines, 1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            word = text.split()[0]
            (headers if word in ("manifold", "base", "functor", "bundle", "connection") else body).append((no, word, text))
        for no, word, text in headers:
            self.header(no, word, text)
        m = self.model
        m.patch = PatchModel(self.p, self.q, self.L, m.lprime_max)
        if self.bundle is None or self.bundle == "tangent":
            m.tangent = True
            m.frame_par = m.patch.parities
            m.frame_names = m.patch.names
        else:
            r, s = self.bundle
            m.tangent = False
            m.frame_par = (0,) * r + (1,) * s
            m.frame_names = tuple(f"e{i}" for i in range(1, r + s + 1))
        self.env = Environment(m.patch.context, m.patch.evens)
        self.tenv = Environment(m.patch.context, T_VAR)
        for no, word, text in body:
            handler = getattr(self, "do_" + word, None)
            if handler is None:
                self.fail(f"unknown declaration {word!r}", no)
            try:
                handler(no, text)
            except ModelError:
                raise
            except SuperholonomyError as exc:
                raise ParityError(str(exc), no, 1) from exc
        if m.levi_civita and (not m.metric or not m.tangent or m.gamma):
            self.fail("levi-civita needs a metric on the tangent bundle and no gamma lines", 0)
        try:
            m.connection()
        except SuperholonomyError as exc:
            raise ParityError(str(exc), 0, 1) from exc
        return m

    def header(self, no, word, text):
        rest = text[len(word):].strip()
        kv = dict(_KV.findall(rest))
        try:
            if word == "manifold":
                self.p, self.q = int(kv["p"]), int(kv["q"])
            elif word == "base":
                self.L = int(kv["L"])
            elif word == "functor":
                self.model.lprime_max = int(kv.get("lprime", self.model.lprime_max))
                self.model.kmax = int(kv.get("kmax", self.model.kmax))
            elif word == "connection":
                if rest not in ("levi-civita", "given"):
                    raise ValueError(rest)
                self.model.levi_civita = rest == "levi-civita"
            elif word == "bundle":
                self.bundle = "tangent" if rest == "tangent" else (int(kv["r"]), int(kv["s"]))
        except (KeyError, ValueError):
            self.fail(f"malformed {word} declaration", no)

    def _split_eq(self, no, text):
        if "=" not in text:
            self.fail("expected '='", no)
        lhs, rhs = text.split("=", 1)
        return lhs.split()[1:], rhs, text.index("=") + 2

    def _expr(self, text, env, no, col):
        try:
            return parse_expression(text, env, no)
        except ModelError as exc:
            raise type(exc)(exc.message, no, (exc.column or 1) + col - 1) from None

    def _coord(self, name, no):
        names = self.model.patch.names
        if name not in names:
            self.fail(f"unknown coordinate {name!r}", no)
        return names.index(name)

    def _frame(self, name, no):
        names = self.model.frame_names
        if name not in names:
            self.fail(f"unknown frame vector {name!r}", no)
        return names.index(name)

    def do_gamma(self, no, text, target=None):
        keys, rhs, col = self._split_eq(no, text)
        if len(keys) != 3:
            self.fail("expected three indices", no)
        a = self._coord(keys[0], no)
        fr = self._coord if (target is not None or self.model.tangent) else self._frame
        key = (a, fr(keys[1], no), fr(keys[2], no))
        f = self._expr(rhs, self.env, no, col)
        if f.odd_support() & self.model.patch.context.family_mask("etaT"):
            self.fail("connection data must not involve etaT", no, cls=ParityError)
        P = self.model.patch.parities
        fp = P if fr is self._coord else self.model.frame_par
        want = P[key[0]] ^ fp[key[1]] ^ fp[key[2]]
        if not f.is_zero() and f.parity() != want:
            self.fail(f"coefficient must be {'odd' if want else 'even'}", no, col, cls=ParityError)
        (self.model.gamma if target is None else target)[key] = f

    def do_aux(self, no, text):
        self.do_gamma(no, text, target=self.model.aux)

    def do_metric(self, no, text):
        keys, rhs, col = self._split_eq(no, text)
        if len(keys) != 2:
            self.fail("expected two indices", no)
        a, b = self._coord(keys[0], no), self._coord(keys[1], no)
        f = self._expr(rhs, self.env, no, col)
        P = self.model.patch.parities
        self.model.metric[(a, b)] = f
        s = -1 if (P[a] and P[b]) else 1
        self.model.metric[(b, a)] = f * s

    def _tuple(self, rhs, env, no, col, n):
        parts = rhs.split(";")
        if len(parts) != n:
            self.fail(f"expected {n} entries separated by ';'", no)
        out = []
        offset = col
        for part in parts:
            out.append(self._expr(part, env, no, offset))
            offset += len(part) + 1
        return out

    def do_point(self, no, text):
        keys, rhs, col = self._split_eq(no, text)
        env = Environment(self.model.patch.context, ())
        vals = self._tuple(rhs, env, no, col, self.model.patch.dim)
        self.model.points[keys[0]] = SPoint(self.model.patch, [v.to_grassmann() for v in vals])

    def _path(self, no, text, kind):
        keys, rhs, col = self._split_eq(no, text)
        segs = []
        offset = col
        for chunk in rhs.split("|"):
            segs.append(self._tuple(chunk, self.tenv, no, offset, self.model.patch.dim))
            offset += len(chunk) + 1
        try:
            path = PathModel(self.model.patch, segs)
        except ValueError as exc:
            self.fail(str(exc), no)
        base = self.model.base
        if path.start != base:
            self.fail(f"path {keys[0]} does not start at the base point", no)
        if kind in ("sloop", "tloop") and not path.is_loop():
            self.fail(f"{keys[0]} is not closed", no)
        self.model.paths[keys[0]] = (kind, path)

    def do_spath(self, no, text):
        self._path(no, text, "spath")

    def do_sloop(self, no, text):
        self._path(no, text, "sloop")

    def do_tpath(self, no, text):
        self._path(no, text, "tpath")

    def do_tloop(self, no, text):
        self._path(no, text, "tloop")

    def do_vector(self, no, text):
        keys, rhs, col = self._split_eq(no, text)
        env = Environment(self.model.patch.context, ())
        vals = self._tuple(rhs, env, no, col, len(self.model.frame_par))
        self.model.vectors[keys[0]] = [v.to_grassmann() for v in vals]

    def do_submodule(self, no, text):
        keys, rhs, _ = self._split_eq(no, text)
        names = [n.strip() for n in rhs.split(",") if n.strip()]
        for n in names:
            if n not in self.model.vectors:
                self.fail(f"unknown vector {n!r}", no)
        self.model.submodules[keys[0]] = names

    def do_factors(self, no, text):
        names = text.split()[1:]
        if len(names) != 2:
            self.fail("expected two factor model files", no)
        self.model.factors = names

    def do_morphism(self, no, text):
        m = re.match(r"morphism\s+(\w+)\s+(\d+)\s*->\s*(\d+)\s*=(.*)$", text)
        if not m:
            self.fail("expected: morphism NAME L -> L1 = images", no)
        name, L, L1, rhs = m.group(1), int(m.group(2)), int(m.group(3)), m.group(4)
        src = GeneratorContext((("eta", L),))
        tgt = GeneratorContext((("eta", L1),))
        env = _EtaEnvironment(tgt)
        col = text.index("=") + 2
        images = self._tuple(rhs, env, no, col, L) if L else []
        try:
            phi = GrassmannMorphism(src, tgt, [im.to_grassmann() for im in images])
        except SuperholonomyError as exc:
            raise ParityError(str(exc), no, col) from exc
        self.model.morphisms[name] = phi

    def do_cover(self, no, text):
        keys, rhs, _ = self._split_eq(no, text)
        names = [n.strip() for n in rhs.split(",") if n.strip()]
        for n in names:
            if n not in self.model.morphisms:
                self.fail(f"unknown morphism {n!r}", no)
        self.model.covers[keys[0]] = names

    def do_section(self, no, text):
        m = re.match(r"section\s+(\w+)\s+over\s+(\w+)\s*=(.*)$", text)
        if not m:
            self.fail("expected: section NAME over MORPHISM = value", no)
        name, mor, rhs = m.groups()
        if mor not in self.model.morphisms:
            self.fail(f"unknown morphism {mor!r}", no)
        env = _EtaEnvironment(self.model.morphisms[mor].target)
        val = self._expr(rhs, env, no, text.index("=") + 2)
        self.model.sections.setdefault(name, {})[mor] = val.to_grassmann()


class _EtaEnvironment(Environment):
    """Names eta1.. for the generators of a bare Grassmann algebra."""

    def resolve(self, name):
        m = re.fullmatch(r"eta(\d+)", name)
        if m and 1 <= int(m.group(1)) <= self.context.size("eta"):
            return SuperFunction.generator(self.context, (), "eta", int(m.group(1)))
        return None


def load_model(text, source="<string>"):
    return _Loader(text, source).load()


def load_model_file(path):
    with open(path, encoding="utf-8") as fh:
        return load_model(fh.read(), str(path))
