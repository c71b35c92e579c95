"""Independent checks: coordinate-level replay of transformations and the
printed closed-form coefficient formulas.

Nothing here calls the graded bracket or the solver; the replay works on
coordinate polynomials and only borrows the coordinate expansion of the basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .algebra import expand_term, from_basis
from .coords import (
    CoordField, Truncation, compose, operator_bracket, padd, pconst, pdiff, pmul, pscale, ptrunc,
    pvar,
)
from .rational import Q, ZERO

# -- coordinate replay ------------------------------------------------------


@dataclass(frozen=True)
class Weights:
    """Monomial weights for x, y, mu making the coordinate grading match the series grading."""

    s: int
    weight: int
    p: int

    @property
    def tuple(self):
        return (self.s + 1, 1) + (self.weight,) * self.p

    def truncation(self, bound, mu_order=None):
        return Truncation(self.tuple, bound, mu_order)


def generator_fields(gen, p):
    """Split a solver generator into (state field, scalar rescaling, parameter shift)."""
    n = 2 + p
    fx, fy, f = {}, {}, {}
    shift = {}
    for (kind, l, k, mono), c in gen.items():
        mono = tuple(mono)
        if kind in ("A", "B"):
            ex, ey = expand_term(kind, l, k)
            for i, j, a in ex:
                fx = padd(fx, {(i, j) + mono: c * a})
            for i, j, a in ey:
                fy = padd(fy, {(i, j) + mono: c * a})
        elif kind == "Z":
            f = padd(f, {(l, k - l) + mono: c})
        elif kind == "P":
            shift[l] = padd(shift.get(l, {}), {(0, 0) + mono: c})
        else:
            raise ValueError(f"unknown generator kind {kind!r}")
    return CoordField(fx, fy, p), f, shift


def _derivation(field, shift, p):
    """Scalar derivation h -> G.grad h for G = field + shift d/dmu."""
    def D(h, tr):
        out = padd(pmul(field.fx, pdiff(h, 0), tr), pmul(field.fy, pdiff(h, 1), tr))
        for i, P in shift.items():
            out = padd(out, pmul(P, pdiff(h, 2 + i), tr))
        return out
    return D


def _lie_series(D, h, tr, extra=None):
    """sum_k L^k h / k! with L = D (+ multiplication by ``extra``)."""
    total = ptrunc(h, tr)
    term = total
    k = 1
    while term:
        nxt = D(term, tr)
        if extra:
            nxt = padd(nxt, pmul(extra, term, tr))
        term = pscale(nxt, Q(1, k))
        total = padd(total, term)
        k += 1
    return total


def flow_step(field: CoordField, gen, weights: Weights, bound, mu_order=None):
    """Transform ``field`` by one generator: ``h * J^-1 * (field o Phi)``.

    ``Phi`` is the time-one flow of ``g + P d/dmu`` and ``h`` solves
    ``h' = (G.grad + f) h`` with ``h(0) = 1``.  ``bound`` is the series grade
    bound; coordinate components are truncated accordingly.
    """
    p = field.p
    n = 2 + p
    g, f, shift = generator_fields(gen, p)
    top = bound + 1 + weights.s
    tr = weights.truncation(top, mu_order)
    D = _derivation(g, shift, p)
    images = [_lie_series(D, pvar(i, n), tr) for i in range(n)]
    h = _lie_series(D, pconst(1, n), tr, extra=f)
    vx = compose(field.fx, images, tr)
    vy = compose(field.fy, images, tr)
    # J = I + E; J^-1 v = sum (-E)^k v
    one = pconst(1, n)
    ex = [padd(pdiff(images[0], 0), one, -1), pdiff(images[0], 1)]
    ey = [pdiff(images[1], 0), padd(pdiff(images[1], 1), one, -1)]
    rx, ry = vx, vy
    tx, ty = vx, vy
    while tx or ty:
        nx = padd(pmul(ex[0], tx, tr), pmul(ex[1], ty, tr))
        ny = padd(pmul(ey[0], tx, tr), pmul(ey[1], ty, tr))
        tx, ty = pscale(nx, -1), pscale(ny, -1)
        rx, ry = padd(rx, tx), padd(ry, ty)
    rx, ry = pmul(h, rx, tr), pmul(h, ry, tr)
    return truncate_field(CoordField(rx, ry, p), weights, bound, mu_order)


def truncate_field(field, weights, bound, mu_order=None):
    """Keep the terms of grade <= ``bound``."""
    return CoordField(ptrunc(field.fx, weights.truncation(bound + 1 + weights.s, mu_order)),
                      ptrunc(field.fy, weights.truncation(bound + 1, mu_order)), field.p)


def replay(field: CoordField, gens, weights, bound, mu_order=None):
    for gen in gens:
        field = flow_step(field, gen, weights, bound, mu_order)
    return field


def _weights(ctx):
    return Weights(ctx.s, ctx.weight, ctx.p)


def replay_log(system, log):
    """Apply every logged transformation to ``system`` in coordinates.

    Returns ``(field, weights, bound, mu_order)`` describing the last active
    truncation, so the caller can compare with the reported normal form.
    """
    field = CoordField.from_system(system)
    weights, bound, mu_order = None, None, None
    for entry in log:
        if entry.kind == "linear":
            field = field.linear_pullback(entry.data)
        elif entry.kind == "truncate":
            weights, bound, mu_order = _weights(entry.ctx), entry.bound, entry.ctx.mu_order
            field = truncate_field(field, weights, bound, mu_order)
        elif entry.kind == "generator":
            field = flow_step(field, entry.data, _weights(entry.ctx), entry.bound,
                              entry.ctx.mu_order)
        elif entry.kind == "scale":
            field = field.scale(*entry.data)
        elif entry.kind == "reparam":
            field = field.reparametrize(entry.data)
        else:
            raise ValueError(f"unknown log entry {entry.kind!r}")
    return field, weights, bound, mu_order


def replay_matches(report):
    """True when replaying ``report.log`` on its input reproduces its output."""
    field, weights, bound, mu_order = replay_log(report.input, report.log)
    out = CoordField.from_system(from_basis(report.output))
    bound = report.bound
    a = truncate_field(field, weights, bound, mu_order)
    b = truncate_field(out, weights, bound, mu_order)
    return a.fx == b.fx and a.fy == b.fy


# -- printed coefficient formulas --------------------------------------------


class BranchError(ValueError):
    """The formula's guard (a nonvanishing denominator) fails at this point."""


@dataclass(frozen=True)
class FormulaOracle:
    name: str
    arity: tuple
    evaluate: Callable


def _get(d, key):
    return Q(d.get(key, ZERO))


def classical_coefficients(a, b):
    """Classical normal form coefficients from ``a[(i, j)]``, ``b[(i, j)]``.

    Input is ``xdot = sum a_ij x^i y^j``, ``ydot = -x + sum b_ij x^i y^j``.
    Returns ``{"a1", "a2", "a3", "b1", "b2", "b3"}`` for the coefficients of
    ``y^(k+1) d/dx`` and ``x y^k d/dx + y^(k+1) d/dy``.
    """
    a02, a03, a04 = _get(a, (0, 2)), _get(a, (0, 3)), _get(a, (0, 4))
    a11, a12, a13 = _get(a, (1, 1)), _get(a, (1, 2)), _get(a, (1, 3))
    a20, a21 = _get(a, (2, 0)), _get(a, (2, 1))
    b02, b03, b04 = _get(b, (0, 2)), _get(b, (0, 3)), _get(b, (0, 4))
    b11, b12, b20 = _get(b, (1, 1)), _get(b, (1, 2)), _get(b, (2, 0))
    out = {}
    out["a1"] = a02
    out["a2"] = a03 - b11 * a02 - Q(4, 9) * b02**2 - Q(1, 9) * a11**2 + Q(5, 9) * a11 * b02
    out["a3"] = (
        a04 - Q(1, 3) * b02 * a11 * b11 - Q(3, 2) * b11 * a03 - Q(1, 2) * a20 * a03
        + Q(2, 3) * b02**2 * a20 - Q(1, 2) * b02 * a11 * a20 + Q(1, 18) * a11 * b20 * a02
        - Q(14, 9) * b02 * b20 * a02 - Q(2, 3) * b12 * a02 + Q(1, 6) * a21 * a02
        - Q(1, 12) * a20**2 * a02 + Q(7, 12) * b11**2 * a02 - Q(1, 6) * a11 * a12
        + Q(2, 3) * b02 * a12 + Q(1, 2) * a20 * b11 * a02 + Q(1, 12) * a11**2 * b11
        + Q(1, 2) * a11 * b03 - b02 * b03 + Q(1, 12) * a11**2 * a20
    )
    out["b1"] = Q(1, 3) * a11 + Q(2, 3) * b02
    out["b2"] = (Q(1, 4) * a12 + Q(3, 4) * b03 - Q(1, 8) * a11 * b11 - Q(1, 8) * a11 * a20
                 + Q(1, 4) * b02 * a20)
    out["b3"] = (
        Q(1, 5) * a13 + Q(4, 5) * b04 - Q(8, 45) * b02**2 * b20 + Q(1, 30) * b11**2 * a11
        + Q(1, 15) * b02 * b11**2 + Q(1, 15) * a11 * a20**2 - Q(4, 15) * b02 * a20**2
        - Q(1, 9) * b02 * a11 * b20 - Q(1, 90) * a11**2 * b20 + Q(1, 10) * a20 * a11 * b11
        - Q(2, 5) * b03 * b11 - Q(1, 5) * b03 * a20 - Q(1, 5) * a12 * b11 - Q(1, 5) * a12 * a20
        - Q(1, 15) * a11 * b12 + Q(4, 15) * b02 * b12 - Q(1, 30) * a11 * a21 + Q(1, 3) * b02 * a21
    )
    return out


eval_prop61 = classical_coefficients


# Term lists ``(num, den, ((name, power), ...))`` of the numerators of the
# closed forms for the s = 1 parametric normal form.  The inputs are the
# classical coefficients after scaling b_1 to 1.
ALPHA7 = [
    (837, 7, (("a3", 1), ("a4", 1), ("b4", 1),)),
    (-282, 7, (("a3", 1), ("b3", 1), ("b4", 1),)),
    (579, 14, (("a3", 1), ("a5", 1), ("b3", 1),)),
    (-99, 35, (("a3", 1), ("a6", 1), ("b2", 1),)),
    (44, 7, (("a5", 1), ("b2", 1), ("b3", 1),)),
    (225, 28, (("a5", 2),)),
    (36, 7, (("b4", 2),)),
    (6502276, 31000725, (("b2", 6),)),
    (-3665, 12, (("a3", 1), ("a4", 1), ("b2", 1), ("b3", 1),)),
    (2, 1, (("a7", 1), ("b2", 1),)),
    (102387959, 3444525, (("a3", 1), ("b2", 5),)),
    (-20, 7, (("b2", 1), ("b6", 1),)),
    (-3676, 567, (("b2", 3), ("b4", 1),)),
    (5989, 810, (("a5", 1), ("b2", 3),)),
    (-129, 35, (("a6", 1), ("b2", 2),)),
    (24, 7, (("b2", 2), ("b5", 1),)),
    (22, 9, (("a4", 2), ("b2", 2),)),
    (-71983, 15120, (("b2", 2), ("b3", 2),)),
    (3831413, 306180, (("b2", 4), ("b3", 1),)),
    (-9, 1, (("a3", 1), ("a7", 1),)),
    (-982462, 25515, (("a4", 1), ("b2", 4),)),
    (-177040867, 765450, (("a3", 2), ("b2", 4),)),
    (-13137, 35, (("a3", 4), ("b2", 2),)),
    (236822, 315, (("a3", 3), ("b2", 3),)),
    (90, 7, (("a3", 1), ("b6", 1),)),
    (-8154, 35, (("a3", 3), ("b4", 1),)),
    (1359, 8, (("a3", 4), ("b3", 1),)),
    (-90, 7, (("a5", 1), ("b4", 1),)),
    (1253, 320, (("a3", 2), ("b3", 2),)),
    (12231, 140, (("a3", 2), ("a6", 1),)),
    (-4077, 70, (("a3", 3), ("a5", 1),)),
    (-459, 7, (("a3", 2), ("b5", 1),)),
    (-4257, 70, (("a3", 2), ("b2", 1), ("b4", 1),)),
    (2397, 10, (("a3", 3), ("b2", 1), ("b3", 1),)),
    (90863, 1680, (("a3", 1), ("b2", 1), ("b3", 2),)),
    (339, 1, (("a3", 1), ("a4", 2), ("b2", 1),)),
    (94, 7, (("a4", 1), ("b2", 1), ("b4", 1),)),
    (-24, 7, (("b2", 1), ("b3", 1), ("b4", 1),)),
    (906, 5, (("a3", 3), ("a4", 1), ("b2", 1),)),
    (657, 35, (("a3", 2), ("a5", 1), ("b2", 1),)),
    (-6, 7, (("a3", 1), ("b2", 1), ("b5", 1),)),
    (-361, 14, (("a4", 1), ("a5", 1), ("b2", 1),)),
    (147286, 567, (("a3", 1), ("a4", 1), ("b2", 3),)),
    (-3392327, 34020, (("a3", 1), ("b2", 3), ("b3", 1),)),
    (-71363, 70, (("a3", 2), ("a4", 1), ("b2", 2),)),
    (1909, 252, (("a3", 1), ("a5", 1), ("b2", 2),)),
    (4639, 252, (("a4", 1), ("b2", 2), ("b3", 1),)),
    (6451, 315, (("a3", 1), ("b2", 2), ("b4", 1),)),
    (4782209, 15120, (("a3", 2), ("b2", 2), ("b3", 1),)),
    (-3051, 28, (("a3", 1), ("a4", 1), ("a5", 1),)),
    (2979, 112, (("a3", 2), ("a4", 1), ("b3", 1),)),
]
ALPHA7_HAT = [
    (24, 5, (("a3", 1), ("a6", 1), ("b3", 1),)),
    (-52, 1, (("a3", 1), ("a4", 1), ("b5", 1),)),
    (14, 3, (("a3", 1), ("b3", 1), ("b5", 1),)),
    (-3924, 25, (("a3", 1), ("a5", 1), ("b4", 1),)),
    (-224442, 35, (("a3", 3), ("a4", 1), ("b3", 1),)),
    (-9938, 5, (("a3", 2), ("a4", 1), ("a5", 1),)),
    (-18548, 35, (("a3", 2), ("b3", 1), ("b4", 1),)),
    (12349, 20, (("a3", 2), ("a5", 1), ("b3", 1),)),
    (263572, 175, (("a3", 2), ("a4", 1), ("b4", 1),)),
    (-6, 1, (("a3", 1), ("a4", 2), ("b3", 1),)),
    (239, 5, (("a3", 1), ("a4", 1), ("b3", 2),)),
    (9, 1, (("a4", 1), ("a5", 1), ("b3", 1),)),
    (16, 5, (("a4", 1), ("b3", 1), ("b4", 1),)),
    (144, 5, (("a3", 1), ("a4", 1), ("a6", 1),)),
    (-1030612, 35, (("a3", 5), ("a4", 1),)),
    (60591, 10, (("a3", 4), ("a5", 1),)),
    (-36, 5, (("a5", 1), ("a6", 1),)),
    (-50, 7, (("a3", 2), ("b6", 1),)),
    (2499, 5, (("a3", 3), ("b5", 1),)),
    (-72, 5, (("a4", 2), ("b4", 1),)),
    (8500, 1, (("a3", 3), ("a4", 2),)),
    (-76, 5, (("a3", 1), ("b3", 3),)),
    (-32, 5, (("b4", 1), ("b5", 1),)),
    (20, 7, (("b3", 1), ("b6", 1),)),
    (-11808, 25, (("a3", 3), ("a6", 1),)),
    (4, 1, (("a4", 1), ("a7", 1),)),
    (-36, 5, (("a5", 1), ("b3", 2),)),
    (810141, 700, (("a3", 3), ("b3", 2),)),
    (144, 25, (("a6", 1), ("b4", 1),)),
    (5, 1, (("a3", 2), ("a7", 1),)),
    (-5246687, 1750, (("a3", 4), ("b4", 1),)),
    (-40, 7, (("a4", 1), ("b6", 1),)),
    (-2, 1, (("a7", 1), ("b3", 1),)),
    (8, 1, (("a5", 1), ("b5", 1),)),
    (104, 25, (("b3", 2), ("b4", 1),)),
    (44397211, 4200, (("a3", 5), ("b3", 1),)),
    (576, 5, (("a3", 1), ("a5", 2),)),
    (1296, 25, (("a3", 1), ("b4", 2),)),
    (-73881267, 3500, (("a3", 7),)),
]
ALPHA4_HAT = [
    (1, 1, (("b3", 2),)),
    (-5, 1, (("a3", 2), ("b3", 1),)),
    (4, 1, (("a4", 2),)),
    (25, 4, (("a3", 4),)),
    (-4, 1, (("a4", 1), ("b3", 1),)),
    (10, 1, (("a3", 2), ("a4", 1),)),
]
ALPHA5_HAT = [
    (136, 3, (("a3", 1), ("a4", 1), ("b3", 1),)),
    (712, 5, (("a3", 3), ("a4", 1),)),
    (-16, 5, (("a4", 1), ("b4", 1),)),
    (-4, 1, (("a3", 2), ("b4", 1),)),
    (-2, 1, (("a5", 1), ("b3", 1),)),
    (-1268, 15, (("a3", 3), ("b3", 1),)),
    (-26, 3, (("a3", 1), ("b3", 2),)),
    (5, 1, (("a3", 2), ("a5", 1),)),
    (531, 2, (("a3", 5),)),
    (8, 5, (("b3", 1), ("b4", 1),)),
    (-56, 1, (("a3", 1), ("a4", 2),)),
    (4, 1, (("a4", 1), ("a5", 1),)),
]


def _poly(terms, values):
    total = ZERO
    for num, den, factors in terms:
        t = Q(num, den)
        for name, power in factors:
            t *= _get(values, name) ** power
        total += t
    return total


def alpha3(v):
    return _get(v, "a3") - Q(2, 9) * _get(v, "b2")


def alpha4(v):
    a3, a4, b2, b3 = (_get(v, k) for k in ("a3", "a4", "b2", "b3"))
    return a4 + Q(53, 81) * b2**2 - Q(8, 3) * b2 * a3 - b3 / 2


def alpha7(v):
    den = 2 * _get(v, "b2") - 9 * _get(v, "a3")
    if den == 0:
        raise BranchError("2 b2 - 9 a3 = 0")
    return _poly(ALPHA7, v) / den


def _hat_den(v):
    a3, a4, b3 = (_get(v, k) for k in ("a3", "a4", "b3"))
    den = 4 * a4 - 2 * b3 + 5 * a3**2
    if den == 0:
        raise BranchError("4 a4 - 2 b3 + 5 a3^2 = 0")
    return den


def alpha4_hat(v):
    return _poly(ALPHA4_HAT, v) / _hat_den(v)


def alpha5_hat(v):
    return _poly(ALPHA5_HAT, v) / _hat_den(v)


def alpha7_hat(v):
    return _poly(ALPHA7_HAT, v) / _hat_den(v)


def eval_prop62(values, branch="generic"):
    """Closed-form coefficients on the ``r1 = 3`` (generic) or ``r1 = 4`` (degenerate) branch.

    ``values`` maps ``"a3".."a7"``, ``"b2".."b6"`` to rationals.
    """
    if branch == "generic":
        if 2 * _get(values, "b2") - 9 * _get(values, "a3") == 0:
            raise BranchError("generic branch needs 2 b2 != 9 a3")
        return {"alpha3": alpha3(values), "alpha4": alpha4(values), "alpha7": alpha7(values)}
    if branch == "degenerate":
        if 2 * _get(values, "b2") - 9 * _get(values, "a3") != 0:
            raise BranchError("degenerate branch needs 2 b2 = 9 a3")
        return {"alpha4_hat": alpha4_hat(values), "alpha5_hat": alpha5_hat(values),
                "alpha7_hat": alpha7_hat(values)}
    raise ValueError(f"unknown branch {branch!r}")


_AB = ("a3", "a4", "a5", "a6", "a7", "b2", "b3", "b4", "b5", "b6")

ORACLES = {
    "classical": FormulaOracle("classical", ("a_ij", "b_ij"), classical_coefficients),
    "alpha3": FormulaOracle("alpha3", ("a3", "b2"), alpha3),
    "alpha4": FormulaOracle("alpha4", ("a3", "a4", "b2", "b3"), alpha4),
    "alpha7": FormulaOracle("alpha7", _AB, alpha7),
    "alpha4_hat": FormulaOracle("alpha4_hat", ("a3", "a4", "b3"), alpha4_hat),
    "alpha5_hat": FormulaOracle("alpha5_hat", ("a3", "a4", "a5", "b3", "b4"), alpha5_hat),
    "alpha7_hat": FormulaOracle("alpha7_hat", _AB, alpha7_hat),
}


# -- the example family --------------------------------------------------------

def example_a3(a, b, c, d):
    return Q(1, 4) * Q(b) ** 2 * (Q(a) - Q(d))


def example_r1_4_condition(b, c):
    """On ``a = d`` the ``r1 = 4`` branch needs this to be nonzero."""
    b, c = Q(b), Q(c)
    return Q(1, 5) * b**2 * c * (3 - 8 * b**2)


def example_discriminant(a, c, d, b_sign):
    """Branch discriminant at ``b = +-1/3`` as a polynomial in a, c, d."""
    a, c, d = Q(a), Q(c), Q(d)
    if b_sign > 0:
        return Q(391, 4860) * a**2 - Q(49, 2430) * a * d - Q(293, 4860) * d**2 + Q(19, 405) * c
    return -Q(757, 9720) * a**2 + Q(73, 4860) * a * d + Q(611, 9720) * d**2 + Q(19, 405) * c


def example_classical(a, b, c, d):
    """Printed classical coefficients of the example family."""
    a, b, c, d = Q(a), Q(b), Q(c), Q(d)
    return {
        "a3": example_a3(a, b, c, d),
        "a4": b**2 * (Q(11, 320) * d**2 - Q(117, 320) * a**2 + Q(53, 160) * a * d - Q(2, 5) * b * c),
        "b1": b,
        "b2": Q(1, 8) * b * (a - d),
        "b3": Q(1, 10) * b * (d**2 - 2 * a**2 - 3 * c * b + a * d),
    }
