"""Graded Lie algebra of planar vector fields in the Hamiltonian/Eulerian basis.

Terms::

    A^l_k = (k-l+1)/(k+2) x^(l+1) y^(k-l) d/dx - (l+1)/(k+2) x^l y^(k-l+1) d/dy
    B^l_k = x^(l+1) y^(k-l) d/dx + x^l y^(k-l+1) d/dy
    Z^l_k = x^l y^(k-l)                      (time-rescaling generators)

A series is a sparse map ``(kind, l, k, mono) -> mpq`` where ``mono`` is the
exponent tuple of the parameter monomial.  The grade of a term is
``k + l*s + weight*|mono|``; ``weight`` is ``r1 + 2`` in the hypernormal
stages and 2 (with ``s = 0``) in the classical stage.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement

from .rational import Q, ZERO


class ContextError(ValueError):
    """Series with different grading contexts were combined."""


class NotBogdanovTakensError(ValueError):
    """The linear part at the origin is not nilpotent and nonzero."""


@dataclass(frozen=True)
class GradingContext:
    s: int
    weight: int
    p: int = 0
    mu_order: int | None = None

    @classmethod
    def resonance(cls, s, r1, p=0, mu_order=None):
        return cls(s, r1 + 2, p, mu_order)

    @classmethod
    def classical(cls, p=0, mu_order=None):
        return cls(0, 2, p, mu_order)

    def keeps(self, mono):
        return self.mu_order is None or sum(mono) <= self.mu_order

    @property
    def r1(self):
        return self.weight - 2

    def grade(self, l, k, mono=()):
        return k + l * self.s + self.weight * sum(mono)

    def zero_mono(self):
        return (0,) * self.p


@dataclass(frozen=True, order=True)
class BasisTerm:
    kind: str
    l: int
    k: int

    def __post_init__(self):
        if not valid_term(self.kind, self.l, self.k):
            raise ValueError(f"invalid basis term {self.kind}^{self.l}_{self.k}")

    def __str__(self):
        return f"{self.kind}^{self.l}_{self.k}"


def valid_term(kind, l, k):
    if kind == "A":
        return k >= -1 and -1 <= l <= k + 1
    if kind in ("B", "Z"):
        return k >= 0 and 0 <= l <= k
    return False


def grade(term, mono, ctx):
    if not valid_term(term.kind, term.l, term.k):
        raise ValueError(f"invalid basis term {term}")
    return ctx.grade(term.l, term.k, mono)


def monomials(p, degree):
    """All exponent tuples of total ``degree`` in ``p`` variables, sorted."""
    if p == 0:
        return [()] if degree == 0 else []
    out = []
    for combo in combinations_with_replacement(range(p), degree):
        e = [0] * p
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def mono_mul(a, b):
    return tuple(x + y for x, y in zip(a, b)) if a else ()


# -- structure constants ---------------------------------------------------

@lru_cache(maxsize=None)
def term_bracket(k1, l1, d1, k2, l2, d2):
    """[X, Y] for basis fields X = kind k1 (l1, d1), Y = kind k2 (l2, d2).

    Returns a tuple of ``((kind, l, k), coeff)`` with nonzero coefficients.
    """
    if k1 == "A" and k2 == "A":
        l, k, n, m = l1, d1, l2, d2
        c = (k + m + 2) * (Q(n + 1, m + 2) - Q(l + 1, k + 2))
        return _clean((("A", l + n, k + m), c),)
    if k1 == "A" and k2 == "B":
        l, k, n, m = l1, d1, l2, d2
        cb = Q(m + 2, m + k + 2) * (n - Q(m * (l + 1), k + 2))
        return _clean((("B", n + l, k + m), cb), (("A", n + l, k + m), Q(-k)))
    if k1 == "B" and k2 == "A":
        return tuple((t, -c) for t, c in term_bracket(k2, l2, d2, k1, l1, d1))
    if k1 == "B" and k2 == "B":
        return _clean((("B", l1 + l2, d1 + d2), Q(d2 - d1)),)
    raise ValueError(f"cannot bracket {k1} with {k2}")


@lru_cache(maxsize=None)
def term_action(n, m, kind, l, k):
    """Z^n_m acting on A^l_k or B^l_k."""
    if kind == "A":
        c = Q((k + 2) * n - m * (l + 1), (k + 2) * (k + m + 2))
        return _clean((("A", n + l, m + k), Q(1)), (("B", n + l, m + k), c))
    if kind == "B":
        return ((("B", n + l, m + k), Q(1)),)
    raise ValueError(f"Z cannot act on {kind}")


def _clean(*pairs):
    out = []
    for term, c in pairs:
        if c != 0:
            if not valid_term(*term):
                raise AssertionError(f"structure constant produced invalid {term}")
            out.append((term, c))
    return tuple(out)


# -- series ----------------------------------------------------------------

class _Series:
    __slots__ = ("_terms", "ctx", "truncation")
    _kinds: tuple = ()

    def __init__(self, terms=None, ctx=None, truncation=None):
        if ctx is None:
            raise ContextError("a grading context is required")
        self.ctx = ctx
        self.truncation = truncation
        clean = {}
        for key, c in (terms or {}).items():
            kind, l, k, mono = key
            mono = tuple(mono)
            if kind not in self._kinds or not valid_term(kind, l, k):
                raise ValueError(f"invalid term {kind}^{l}_{k} for {type(self).__name__}")
            if len(mono) != ctx.p:
                raise ValueError(f"monomial {mono} does not match p={ctx.p}")
            c = Q(c)
            if c == 0:
                continue
            if truncation is not None and ctx.grade(l, k, mono) > truncation:
                continue
            if not ctx.keeps(mono):
                continue
            clean[(kind, l, k, mono)] = clean.get((kind, l, k, mono), ZERO) + c
        self._terms = {key: c for key, c in clean.items() if c != 0}

    @classmethod
    def _raw(cls, terms, ctx, truncation):
        obj = cls.__new__(cls)
        obj._terms = terms
        obj.ctx = ctx
        obj.truncation = truncation
        return obj

    @classmethod
    def zero(cls, ctx, truncation=None):
        return cls._raw({}, ctx, truncation)

    @classmethod
    def term(cls, kind, l, k, coeff=1, mono=None, ctx=None, truncation=None):
        mono = ctx.zero_mono() if mono is None else tuple(mono)
        return cls({(kind, l, k, mono): coeff}, ctx, truncation)

    # mapping-like access
    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def coeff(self, kind, l, k, mono=None):
        mono = self.ctx.zero_mono() if mono is None else tuple(mono)
        return self._terms.get((kind, l, k, mono), ZERO)

    def grade_of(self, key):
        return self.ctx.grade(key[1], key[2], key[3])

    def grades(self):
        return sorted({self.grade_of(key) for key in self._terms})

    def homogeneous(self, g):
        return self._raw({key: c for key, c in self._terms.items() if self.grade_of(key) == g},
                         self.ctx, self.truncation)

    def truncate(self, bound):
        bound = bound if self.truncation is None else min(bound, self.truncation)
        return self._raw({key: c for key, c in self._terms.items() if self.grade_of(key) <= bound},
                         self.ctx, bound)

    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.ctx != self.ctx:
            raise ContextError(f"grading contexts differ: {self.ctx} vs {other.ctx}")

    def _merged_truncation(self, other):
        return _min_trunc(self.truncation, other.truncation)

    def __add__(self, other):
        self._check(other)
        trunc = self._merged_truncation(other)
        out = dict(self._terms)
        for key, c in other._terms.items():
            v = out.get(key, ZERO) + c
            if v == 0:
                out.pop(key, None)
            else:
                out[key] = v
        res = self._raw(out, self.ctx, trunc)
        return res.truncate(trunc) if trunc is not None else res

    def __neg__(self):
        return self._raw({key: -c for key, c in self._terms.items()}, self.ctx, self.truncation)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        factor = Q(factor)
        if factor == 0:
            return self.zero(self.ctx, self.truncation)
        return self._raw({key: c * factor for key, c in self._terms.items()}, self.ctx, self.truncation)

    __rmul__ = scale

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.ctx == other.ctx and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return f"{type(self).__name__}(0)"
        parts = []
        for (kind, l, k, mono), c in sorted(self._terms.items(), key=lambda kv: (self.grade_of(kv[0]), kv[0])):
            mu = "".join(f"*mu{i+1}^{e}" for i, e in enumerate(mono) if e)
            parts.append(f"{c}*{kind}^{l}_{k}{mu}")
        return f"{type(self).__name__}({' + '.join(parts)})"


class VectorFieldSeries(_Series):
    __slots__ = ()
    _kinds = ("A", "B")


class RescalingSeries(_Series):
    __slots__ = ()
    _kinds = ("Z",)

    def has_constant_part(self):
        return any(l == 0 and k == 0 and not any(mono) for (_, l, k, mono) in self._terms)


def _min_trunc(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _by_grade(series):
    out = {}
    for key, c in series._terms.items():
        out.setdefault(series.grade_of(key), []).append((key, c))
    return out


def _pairwise(x, y, trunc, rule, result_cls, ctx):
    out = {}
    gx, gy = _by_grade(x), _by_grade(y)
    for ga, xs in gx.items():
        for gb, ys in gy.items():
            if trunc is not None and ga + gb > trunc:
                continue
            for (ka, la, da, ma), ca in xs:
                for (kb, lb, db, mb), cb in ys:
                    mono = mono_mul(ma, mb)
                    if not ctx.keeps(mono):
                        continue
                    cab = ca * cb
                    for (kind, l, k), c in rule(ka, la, da, kb, lb, db):
                        key = (kind, l, k, mono)
                        v = out.get(key, ZERO) + cab * c
                        if v == 0:
                            out.pop(key, None)
                        else:
                            out[key] = v
    return result_cls._raw(out, ctx, trunc)


def bracket(v, w):
    """Lie bracket ``[v, w]`` (the ``[X, Y] = X.grad Y - Y.grad X`` convention)."""
    if not isinstance(v, VectorFieldSeries) or not isinstance(w, VectorFieldSeries):
        raise TypeError("bracket takes two VectorFieldSeries")
    v._check(w)
    return _pairwise(v, w, v._merged_truncation(w), term_bracket, VectorFieldSeries, v.ctx)


def _action_rule(kz, n, m, kind, l, k):
    return term_action(n, m, kind, l, k)


def module_action(t, v):
    """Left module action of a rescaling series on a vector field series."""
    if not isinstance(t, RescalingSeries) or not isinstance(v, VectorFieldSeries):
        raise TypeError("module_action takes (RescalingSeries, VectorFieldSeries)")
    if t.ctx != v.ctx:
        raise ContextError(f"grading contexts differ: {t.ctx} vs {v.ctx}")
    return _pairwise(t, v, _min_trunc(t.truncation, v.truncation), _action_rule, VectorFieldSeries, v.ctx)


def _ring_rule(ka, n, m, kb, l, k):
    return ((("Z", n + l, m + k), Q(1)),)


def ring_product(t1, t2):
    if not isinstance(t1, RescalingSeries) or not isinstance(t2, RescalingSeries):
        raise TypeError("ring_product takes two RescalingSeries")
    t1._check(t2)
    return _pairwise(t1, t2, t1._merged_truncation(t2), _ring_rule, RescalingSeries, t1.ctx)


def param_derivative(v, P):
    """``D_mu(v) P`` where ``P`` maps parameter index i to a dict mono -> coeff."""
    ctx = v.ctx
    out = {}
    for (kind, l, k, mono), c in v._terms.items():
        for i, e in enumerate(mono):
            if e == 0 or i not in P:
                continue
            lowered = mono[:i] + (e - 1,) + mono[i + 1:]
            for pm, pc in P[i].items():
                m2 = mono_mul(lowered, pm)
                if v.truncation is not None and ctx.grade(l, k, m2) > v.truncation:
                    continue
                if not ctx.keeps(m2):
                    continue
                key = (kind, l, k, m2)
                val = out.get(key, ZERO) + c * e * pc
                if val == 0:
                    out.pop(key, None)
                else:
                    out[key] = val
    return VectorFieldSeries._raw(out, ctx, v.truncation)


# -- coordinate systems ----------------------------------------------------

@dataclass
class PlanarSystem:
    """``xdot = sum dx[(i, j, mono)] x^i y^j mu^mono``, likewise ``ydot``."""

    dx: dict = field(default_factory=dict)
    dy: dict = field(default_factory=dict)
    p: int = 0

    def __post_init__(self):
        self.dx = _clean_poly(self.dx, self.p)
        self.dy = _clean_poly(self.dy, self.p)

    def __eq__(self, other):
        if not isinstance(other, PlanarSystem):
            return NotImplemented
        return self.p == other.p and self.dx == other.dx and self.dy == other.dy

    def at_zero(self):
        """The parameter-free part (mu = 0)."""
        z = (0,) * self.p
        return PlanarSystem({(i, j, ()): c for (i, j, m), c in self.dx.items() if m == z},
                            {(i, j, ()): c for (i, j, m), c in self.dy.items() if m == z}, 0)

    def linear_matrix(self):
        """Jacobian at the origin with mu = 0, as [[a, b], [c, d]]."""
        z = (0,) * self.p
        return [[self.dx.get((1, 0, z), ZERO), self.dx.get((0, 1, z), ZERO)],
                [self.dy.get((1, 0, z), ZERO), self.dy.get((0, 1, z), ZERO)]]

    def is_canonical(self):
        (a, b), (c, d) = self.linear_matrix()
        z = (0,) * self.p
        return (a == 0 and b == 0 and c == -1 and d == 0
                and self.dx.get((0, 0, z), ZERO) == 0 and self.dy.get((0, 0, z), ZERO) == 0)

    def max_degree(self):
        degs = [i + j for (i, j, _) in list(self.dx) + list(self.dy)]
        return max(degs) if degs else 0


def _clean_poly(poly, p):
    out = {}
    for (i, j, mono), c in poly.items():
        mono = tuple(mono)
        if len(mono) != p:
            raise ValueError(f"monomial {mono} does not match p={p}")
        if i < 0 or j < 0:
            raise ValueError("negative exponent")
        c = Q(c)
        if c != 0:
            out[(i, j, mono)] = out.get((i, j, mono), ZERO) + c
    return {k: c for k, c in out.items() if c != 0}


def _add(out, key, c):
    v = out.get(key, ZERO) + c
    if v == 0:
        out.pop(key, None)
    else:
        out[key] = v


def to_basis(sys, ctx, truncation=None):
    """Decompose a canonical planar system into A/B basis terms."""
    if ctx.p != sys.p:
        raise ContextError(f"system has p={sys.p}, context p={ctx.p}")
    out = {}
    for (i, j, mono), c in sys.dx.items():
        k = i + j - 1
        if i == 0:
            _add(out, ("A", -1, k, mono), c)
        else:
            l = i - 1
            _add(out, ("A", l, k, mono), c)
            _add(out, ("B", l, k, mono), c * Q(l + 1, k + 2))
    for (i, j, mono), c in sys.dy.items():
        k = i + j - 1
        l = i
        if l == k + 1:
            _add(out, ("A", k + 1, k, mono), -c)
        else:
            _add(out, ("A", l, k, mono), -c)
            _add(out, ("B", l, k, mono), c * Q(k - l + 1, k + 2))
    return VectorFieldSeries(out, ctx, truncation)


def expand_term(kind, l, k):
    """Coordinate expansion of A^l_k or B^l_k: ([(i, j, c)] for d/dx, same for d/dy)."""
    if kind == "A":
        dx = [(l + 1, k - l, Q(k - l + 1, k + 2))]
        dy = [(l, k - l + 1, -Q(l + 1, k + 2))]
    elif kind == "B":
        dx = [(l + 1, k - l, Q(1))]
        dy = [(l, k - l + 1, Q(1))]
    else:
        raise ValueError(kind)
    keep = lambda lst: [(i, j, c) for i, j, c in lst if c != 0]
    return keep(dx), keep(dy)


def from_basis(v):
    dx, dy = {}, {}
    for (kind, l, k, mono), c in v.items():
        ex, ey = expand_term(kind, l, k)
        for i, j, a in ex:
            _add(dx, (i, j, mono), c * a)
        for i, j, a in ey:
            _add(dy, (i, j, mono), c * a)
    return PlanarSystem(dx, dy, v.ctx.p)


def canonicalize(sys):
    """Linear change (x, y) = X f + Y g putting the mu = 0 linear part into -x d/dy.

    Returns ``(new_system, matrix)`` where ``matrix = [[f0, g0], [f1, g1]]``.
    """
    J = sys.linear_matrix()
    (a, b), (c, d) = J
    if all(e == 0 for row in J for e in row):
        raise NotBogdanovTakensError("linear part vanishes")
    if a + d != 0 or a * d - b * c != 0:
        raise NotBogdanovTakensError("linear part is not nilpotent")
    z = (0,) * sys.p
    if sys.dx.get((0, 0, z), ZERO) != 0 or sys.dy.get((0, 0, z), ZERO) != 0:
        raise NotBogdanovTakensError("origin is not an equilibrium at mu = 0")
    # f with J f != 0, g = -J f
    f = (Q(1), Q(0)) if (a != 0 or c != 0) else (Q(0), Q(1))
    g = (-(a * f[0] + b * f[1]), -(c * f[0] + d * f[1]))
    M = [[f[0], g[0]], [f[1], g[1]]]
    if M == [[1, 0], [0, 1]]:
        return sys, M
    return linear_change(sys, M), M


def linear_change(sys, M):
    """Pull back ``sys`` through (x, y) = M (X, Y)."""
    from . import coords

    field = coords.CoordField.from_system(sys)
    return field.linear_pullback(M).to_system()
