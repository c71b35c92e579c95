"""Coordinate polynomial vector fields with weighted truncation.

Scalars are dicts ``(i, j, m1, ..., mp) -> mpq`` in the variables
``x, y, mu_1..mu_p``.  This layer knows nothing about the A/B/Z basis; it is
the independent route used to cross-check the graded algebra.
"""
from __future__ import annotations

from dataclasses import dataclass

from .rational import Q, ZERO


@dataclass(frozen=True)
class Truncation:
    """Keep monomials with ``weights . exps <= max_weight`` and mu-degree <= mu_order."""

    weights: tuple
    max_weight: int | None = None
    mu_order: int | None = None

    def keep(self, e):
        if self.max_weight is not None and sum(w * a for w, a in zip(self.weights, e)) > self.max_weight:
            return False
        if self.mu_order is not None and sum(e[2:]) > self.mu_order:
            return False
        return True

    @classmethod
    def none(cls, p):
        return cls((1,) * (2 + p))


def padd(a, b, scale=1):
    out = dict(a)
    for e, c in b.items():
        v = out.get(e, ZERO) + c * scale
        if v == 0:
            out.pop(e, None)
        else:
            out[e] = v
    return out


def pscale(a, c):
    c = Q(c)
    return {} if c == 0 else {e: v * c for e, v in a.items()}


def _tagged(a, tr):
    """Terms of ``a`` with their weight and mu-degree, sorted by weight."""
    w = tr.weights
    out = [(sum(x * y for x, y in zip(w, e)), sum(e[2:]), e, c) for e, c in a.items()]
    out.sort(key=lambda t: t[0])
    return out


def pmul(a, b, tr):
    if not a or not b:
        return {}
    top = tr.max_weight
    order = tr.mu_order
    tb = _tagged(b, tr)
    out = {}
    for wa, ma, ea, ca in _tagged(a, tr):
        for wb, mb, eb, cb in tb:
            if top is not None and wa + wb > top:
                break
            if order is not None and ma + mb > order:
                continue
            e = tuple(x + y for x, y in zip(ea, eb))
            v = out.get(e, ZERO) + ca * cb
            if v == 0:
                out.pop(e, None)
            else:
                out[e] = v
    return out


def pdiff(a, var):
    out = {}
    for e, c in a.items():
        if e[var]:
            e2 = e[:var] + (e[var] - 1,) + e[var + 1:]
            out[e2] = c * e[var]
    return out


def ptrunc(a, tr):
    return {e: c for e, c in a.items() if tr.keep(e)}


def pconst(c, nvars):
    c = Q(c)
    return {} if c == 0 else {(0,) * nvars: c}


def pvar(var, nvars):
    e = [0] * nvars
    e[var] = 1
    return {tuple(e): Q(1)}


def compose(a, images, tr):
    """Substitute variable ``i`` by ``images[i]`` in ``a``."""
    nvars = len(images)
    cache = [dict() for _ in range(nvars)]

    def power(i, n):
        if n == 0:
            return pconst(1, nvars)
        got = cache[i].get(n)
        if got is None:
            got = pmul(power(i, n - 1), images[i], tr)
            cache[i][n] = got
        return got

    out = {}
    for e, c in a.items():
        term = pconst(c, nvars)
        for i, n in enumerate(e):
            if n:
                term = pmul(term, power(i, n), tr)
                if not term:
                    break
        out = padd(out, term)
    return out


@dataclass
class CoordField:
    """Planar vector field ``fx d/dx + fy d/dy`` with parameter-dependent coefficients."""

    fx: dict
    fy: dict
    p: int = 0

    @property
    def nvars(self):
        return 2 + self.p

    @classmethod
    def from_system(cls, sys):
        conv = lambda poly: {(i, j) + tuple(m): Q(c) for (i, j, m), c in poly.items()}
        return cls(conv(sys.dx), conv(sys.dy), sys.p)

    def to_system(self):
        from .algebra import PlanarSystem

        conv = lambda poly: {(e[0], e[1], tuple(e[2:])): c for e, c in poly.items()}
        return PlanarSystem(conv(self.fx), conv(self.fy), self.p)

    def apply(self, h):
        """Directional derivative of the scalar ``h`` along this field."""
        return padd(pmul_exact(self.fx, pdiff(h, 0)), pmul_exact(self.fy, pdiff(h, 1)))

    def linear_pullback(self, M):
        """Field in (X, Y) where (x, y) = M (X, Y); exact, no truncation."""
        n = self.nvars
        (a, b), (c, d) = M
        det = a * d - b * c
        if det == 0:
            raise ZeroDivisionError("singular linear change")
        X, Y = pvar(0, n), pvar(1, n)
        images = [padd(pscale(X, a), pscale(Y, b)), padd(pscale(X, c), pscale(Y, d))]
        images += [pvar(2 + i, n) for i in range(self.p)]
        tr = Truncation.none(self.p)
        fx = compose(self.fx, images, tr)
        fy = compose(self.fy, images, tr)
        # (Xdot, Ydot) = M^{-1} (fx, fy)
        gx = padd(pscale(fx, d / det), pscale(fy, -b / det))
        gy = padd(pscale(fx, -c / det), pscale(fy, a / det))
        return CoordField(gx, gy, self.p)

    def reparametrize(self, T):
        """Substitute mu = T nu (T is a p x p matrix of rationals)."""
        n = self.nvars
        images = [pvar(0, n), pvar(1, n)]
        for i in range(self.p):
            img = {}
            for j in range(self.p):
                img = padd(img, pscale(pvar(2 + j, n), T[i][j]))
            images.append(img)
        tr = Truncation.none(self.p)
        return CoordField(compose(self.fx, images, tr), compose(self.fy, images, tr), self.p)

    def scale(self, a, b, c):
        """(x, y, t) = (a X, b Y, c tau)."""
        a, b, c = Q(a), Q(b), Q(c)
        fx = {e: v * a ** e[0] * b ** e[1] * c / a for e, v in self.fx.items()}
        fy = {e: v * a ** e[0] * b ** e[1] * c / b for e, v in self.fy.items()}
        return CoordField(fx, fy, self.p)

    def truncate(self, tr_x, tr_y):
        return CoordField(ptrunc(self.fx, tr_x), ptrunc(self.fy, tr_y), self.p)


def pmul_exact(a, b):
    return pmul(a, b, Truncation.none(len(next(iter(a))) - 2 if a else 0)) if a and b else {}


def operator_bracket(F, G):
    """[F, G] = F.grad(G) - G.grad(F), by explicit differentiation."""
    fx = padd(F.apply(G.fx), G.apply(F.fx), -1)
    fy = padd(F.apply(G.fy), G.apply(F.fy), -1)
    return CoordField(fx, fy, F.p)
