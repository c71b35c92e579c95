"""Closed-form transformation generators and their scalar coefficients.

Every generator comes with the identity it satisfies; ``GeneratorResult``
stores the generator, the optional time-rescaling partner and the predicted
residual so callers (and the tests) can replay the identity with the graded
bracket.

``lead(s)`` is the leading part ``A^1_0 + B^0_s`` of a normalized field.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

from .algebra import (
    GradingContext, RescalingSeries, VectorFieldSeries, bracket, module_action,
)
from .rational import Q, ZERO


class SingularSymbolError(ZeroDivisionError):
    """A Pochhammer symbol in a denominator vanished (or a reciprocal one did)."""


@lru_cache(maxsize=None)
def _poch(a, n, k):
    if n >= 0:
        out = Q(1)
        for i in range(n):
            out *= a + i * k
        return out
    den = _poch(a + n * k, -n, k)
    if den == 0:
        raise SingularSymbolError(f"({a})^{n}_{k} is singular")
    return 1 / den


def pochhammer(a, n, k):
    """Pochhammer k-symbol ``a (a+k) ... (a+(n-1)k)``.

    For ``n < 0`` the reciprocal extension ``1 / (a+nk)^(-n)_k`` is used, so
    ``(a)^(m+n)_k = (a)^m_k (a+mk)^n_k`` holds for all integers.
    """
    return _poch(Q(a), int(n), Q(k))


def _div(num, den, what):
    if den == 0:
        raise SingularSymbolError(f"zero denominator in {what}")
    return num / den


def default_context(s):
    return GradingContext(s, 2 * s + 3)


def lead(s, ctx=None):
    ctx = ctx or default_context(s)
    return VectorFieldSeries({("A", 1, 0, ctx.zero_mono()): Q(1),
                              ("B", 0, s, ctx.zero_mono()): Q(1)}, ctx)


def _series(terms, ctx, cls=VectorFieldSeries):
    z = ctx.zero_mono()
    out = {}
    for (kind, l, k), c in terms:
        if c == 0:
            continue
        key = (kind, l, k, z)
        out[key] = out.get(key, ZERO) + c
    return cls({k: v for k, v in out.items() if v != 0}, ctx)


@dataclass
class GeneratorResult:
    """``target + [lead, generator] + time . lead == residual``.

    ``target`` is the term being simplified; ``time`` may be ``None``.
    """

    target: VectorFieldSeries
    generator: VectorFieldSeries
    residual: VectorFieldSeries
    time: RescalingSeries | None = None

    def replay(self, s):
        """Left side of the identity computed with the graded bracket."""
        ctx = self.generator.ctx
        out = self.target + bracket(lead(s, ctx), self.generator)
        if self.time is not None:
            out = out + module_action(self.time, lead(s, ctx))
        return out

    def check(self, s):
        return self.replay(s) == self.residual


# -- scalar coefficients ----------------------------------------------------

P = pochhammer


def coeff_a(m, n, s):
    """``a^s_{m,n}``: A^-1 coefficient produced by the (A, Z) kernel pair."""
    return _div(P(m, n + 2, s), P(m + 2 - n + s, n + 1, s + 1), "a^s_{m,n}")


def coeff_c0(m, n, s):
    """``c^{0,s}_{m,n}`` (the ratio of B^0 to A^-1 coefficients; ``n`` here is the shifted index)."""
    nn = n - 2
    return _div(Q((s + 2) * (m + (nn + 1) * s + 1)), Q((m + nn * s) * (m + (nn + 1) * s)), "c^{0,s}")


def zeta(r, s, i, m, n):
    out = _div((r + m + 2) * P(r + m, i, s), P(r + m - n + 3, i, s + 1), "zeta")
    for l in range(1, i + 1):
        num = P(m, l - 1, s) * P(r + m + l * s, i - l, s)
        den = P(r + m - n + 3 + l * (s + 1), i - l, s + 1) * P(m + 2 - n + s, l, s + 1)
        poly = (l * l * s - n * l * s - 2 * l * s + l * m + l * r + s + n * s + r * s
                - n * m + r - m - n * r)
        out -= _div(num, den, "zeta") * poly
    return out


def coeff_b(r, s, m, n):
    return zeta(r, s, n, m, n) - _div((r + m + n * s + 2) * P(m, n, s), P(m + 2 - n + s, n, s + 1), "b^{r,s}")


def coeff_c(r, s, m, n):
    return _div(Q((s + 2) * (r + m + 1 + (n - 1) * s)), P(r + m + (n - 2) * s, 2, s), "c^{r,s}")


def brs_sum(r, s, m, n):
    """The expanded sum for ``b^{r,s}_{m,n} c^{r,s}_{m,n} / (s+2)``."""
    def inner(l):
        first = _div((r + m + 1 + (n - 1) * s) * P(r + m + l * s, n - l - 2, s),
                     P(r + m + 3 - n + l * (s + 1), n - l, s + 1), "brs")
        second = _div(P(r + m + l * s, n - l - 2, s),
                      (r + m + l * s + 2) * P(r + m - n + 2 + (l + 1) * (s + 1), n - l - 2, s + 1), "brs")
        return first - second

    total = ZERO
    for l in range(0, n + 1):
        total += _div((n - l + 1) * (r + 2 + m + l * s) * P(m, l, s),
                      (m + 2 + l * s) * P(m + 2 - n + s, l, s + 1), "brs") * inner(l)
    for l in range(1, n + 1):
        total -= _div(r * (s + 2) * P(m, l, s),
                      (m + s * l + 2) * P(m + 2 - n + s, l - 1, s + 1), "brs") * inner(l)
    for l in range(1, n):
        total += _div((n - l) * P(m, l - 1, s) * P(r + m + (l - 1) * s, n - l - 1, s),
                      (r + m + 2 + l * s) * P(m + 2 - n + s, l - 1, s + 1)
                      * P(r + m - n + 2 + l * (s + 1), n - l - 1, s + 1), "brs")
    total += _div((m - n + 1) * (r + m + 2) * (r + m + 1 + (n - 1) * s) * P(r + m, n - 2, s),
                  (m + 2) * P(r + m + 3 - n, n, s + 1), "brs")
    total -= _div((m - n + 1) * P(r + m, n - 2, s), (m + 2) * P(r + m + 3 - n + s, n - 2, s + 1), "brs")
    return total


def f_rs(r, s):
    """B^0 coefficient left after simplifying ``[A^-1_r, calB^s_s]``."""
    return (_div(P(r, s - 1, s), P(r + 2, s - 1, s + 1), "f")
            + _div((s + 2) * (r + 1 + s * s) * P(r + s, s - 2, s), P(r + 3, s, s + 1), "f")
            - _div((s + 2) * P(r + s, s - 2, s), (r + s + 2) * P(r + 3 + s, s - 2, s + 1), "f"))


# -- generators -------------------------------------------------------------

def frak_A(n, m, s, ctx=None):
    """Generator simplifying ``A^n_m`` to A^-1 and B^0 terms."""
    ctx = ctx or default_context(s)
    terms = []
    for q in range(1, n):
        outer = _div(s * (s + 2) * (n + 1 - q) * P(m, q - 1, s),
                     P(m + (q - 1) * s + 2, 2, s) * P(m - n + 2, q, s + 1), "frak_A")
        for l in range(0, n - q):
            c = _div(P(m + (q - 1) * s, l, s), P(m - n + 1 + q * (s + 1), l + 1, s + 1), "frak_A")
            terms.append((("B", n - 1 - q - l, m + q * s + l * s), outer * c))
    for l in range(0, n + 1):
        c = _div(P(m, l, s), P(m - n + 2, l + 1, s + 1), "frak_A")
        terms.append((("A", n - 1 - l, m + l * s), c))
    gen = _series(terms, ctx)
    target = _series([(("A", n, m), Q(1))], ctx)
    a1 = _div(P(m, n + 1, s), P(m - n + 2, n + 1, s + 1), "frak_A")
    # The B^0 coefficient is read off the replay; the printed expression
    # (frak_A_b0) only agrees for n = 1.
    b0 = (target + bracket(lead(s, ctx), gen)).coeff("B", 0, m + n * s)
    residual = _series([(("B", 0, m + n * s), b0), (("A", -1, m + n * s + s), a1)], ctx)
    return GeneratorResult(target, gen, residual)


def frak_A_b0(n, m, s):
    """The printed B^0 coefficient of the ``frak_A`` residual, evaluated literally."""
    return (_div((s + 2) * (m + 1 + n * s) * P(m, n - 1, s), P(m + 2 - n, n + 1, s + 1), "frak_A")
            - _div((s + 2) * P(m, n - 1, s), (m + 2) * P(m - n + 1, n - 1, s + 1), "frak_A"))


def frak_B(n, m, s, ctx=None):
    """Generator simplifying ``B^n_m`` (n >= 1) to a single B^0 term."""
    if n < 1 or m < 1:
        raise ValueError("frak_B needs n >= 1 and m >= 1")
    ctx = ctx or default_context(s)
    terms = [(("B", n - 1 - l, m + l * s), _div(P(m - s, l, s), P(m - n + 1, l + 1, s + 1), "frak_B"))
             for l in range(n)]
    c = _div(P(m - s, n, s), P(m - n + 1, n, s + 1), "frak_B")
    return GeneratorResult(_series([(("B", n, m), Q(1))], ctx), _series(terms, ctx),
                           _series([(("B", 0, m + n * s), c)], ctx))


def cal_A(n, m, s, ctx=None):
    """The kernel pair ``(calA^n_m, (m-n+1) Z^n_m)`` with its residual against the lead."""
    if not 0 <= n <= m + 1:
        raise ValueError("cal_A needs 0 <= n <= m+1")
    ctx = ctx or default_context(s)
    terms = []
    for l in range(0, n):
        c = _div((s + 2) * P(m, l, s), (m + (l + 1) * s + 2) * P(m + 2 - n + s, l, s + 1), "cal_A")
        terms.append((("B", n - l - 1, m + l * s + s), c))
    if m - n + 1:
        terms.append((("B", n, m), -Q(m - n + 1, m + 2)))
    for l in range(-1, n + 1):
        c = _div(P(m, l + 1, s), P(m + 2 - n + s, l + 1, s + 1), "cal_A")
        terms.append((("A", n - l - 1, m + s + l * s), c))
    gen = _series(terms, ctx)
    time = _series([(("Z", n, m), Q(m - n + 1))], ctx, RescalingSeries)
    a = coeff_a(m, n, s)
    residual = _series([(("A", -1, m + 2 * s + n * s), a),
                        (("B", 0, m + n * s + s), a * coeff_c0(m, n + 2, s))], ctx)
    return GeneratorResult(VectorFieldSeries.zero(ctx), gen, residual, time)


def cal_B(k, s, ctx=None):
    """``calB^k_k``; its bracket with the lead is a single B^0 term."""
    if k < 1:
        raise ValueError("cal_B needs k >= 1")
    ctx = ctx or default_context(s)
    terms = [(("B", k - l, k + l * s), _div(P(k - s, l, s), Q(factorial(l) * (s + 1) ** l), "cal_B"))
             for l in range(k + 1)]
    c = _div(P(k - s, k + 1, s), Q(factorial(k) * (s + 1) ** k), "cal_B")
    return GeneratorResult(VectorFieldSeries.zero(ctx), _series(terms, ctx),
                           _series([(("B", 0, k * (s + 1) + s), c)], ctx))


def gamma(S, T, s):
    """``[[lead, S] + T lead, A^-1_0]``."""
    ctx = S.ctx
    inner = bracket(lead(s, ctx), S)
    if T is not None:
        inner = inner + module_action(T, lead(s, ctx))
    return bracket(inner, _series([(("A", -1, 0), Q(1))], ctx))


# -- reductions -------------------------------------------------------------

def reduce_to_classical(X, s):
    """Simplify every non-classical term of ``X`` with ``frak_A``/``frak_B``.

    Returns ``(Y, residual)`` with ``X + [lead, Y] == residual`` and the
    residual spanned by A^-1 and B^0 terms.
    """
    ctx = X.ctx
    Y = VectorFieldSeries.zero(ctx)
    residual = VectorFieldSeries.zero(ctx)
    for (kind, l, k, mono), c in sorted(X.items()):
        if (kind == "A" and l == -1) or (kind == "B" and l == 0):
            residual = residual + _series([((kind, l, k), c)], ctx)
            continue
        g = frak_A(l, k, s, ctx) if kind == "A" else frak_B(l, k, s, ctx)
        Y = Y + g.generator.scale(c)
        residual = residual + g.residual.scale(c)
    return Y, residual


def a_minus_one(r, ctx):
    return _series([(("A", -1, r), Q(1))], ctx)


@dataclass
class ReductionResult:
    source: VectorFieldSeries
    generator: VectorFieldSeries
    residual: VectorFieldSeries

    def check(self, s):
        return self.source + bracket(lead(s, self.source.ctx), self.generator) == self.residual


def solve_Y(n, r, m, s, ctx=None):
    """Reduce ``[A^-1_r, calA^n_m] + (m-n+1) Z^n_m A^-1_r`` against the lead."""
    ctx = ctx or default_context(s)
    pair = cal_A(n, m, s, ctx)
    A = a_minus_one(r, ctx)
    X = bracket(A, pair.generator) + module_action(pair.time, A)
    Y, residual = reduce_to_classical(X, s)
    return ReductionResult(X, Y, residual)


def reduce_bracket_calB(r, s, ctx=None):
    """Reduce ``[A^-1_r, calB^s_s]``; the residual carries ``f_{r,s}``."""
    ctx = ctx or default_context(s)
    X = bracket(a_minus_one(r, ctx), cal_B(s, s, ctx).generator)
    Y, residual = reduce_to_classical(X, s)
    return ReductionResult(X, Y, residual)


def pair_combined(m1, n1, m2, n2, s, ctx=None):
    """Difference of two (calA, Z) pairs of equal grade whose A^-1 images cancel."""
    if m1 + n1 * s != m2 + n2 * s or (m1, n1) == (m2, n2):
        raise ValueError("pair_combined needs distinct index pairs of equal grade")
    ctx = ctx or default_context(s)
    p1, p2 = cal_A(n1, m1, s, ctx), cal_A(n2, m2, s, ctx)
    a1, a2 = coeff_a(m1, n1, s), coeff_a(m2, n2, s)
    gen = p1.generator.scale(1 / a1) - p2.generator.scale(1 / a2)
    time = p1.time.scale(1 / a1) - p2.time.scale(1 / a2)
    return gen, time


def triple_combined(m1, n1, m2, n2, m3, n3, s, r, ctx=None):
    """Correction making the combined pair a symmetry of ``lead + A^-1_r``.

    Returns ``(state, time)`` with
    ``[A^-1_r, calA12] + Z12 A^-1_r + [lead, state] + time lead == 0``.
    The third pair enters as ``(calA^{n3}_{m3}, (m3-n3+1) Z^{n3}_{m3})``.
    """
    if m3 + n3 * s != r + m1 + n1 * s - 2 * s:
        raise ValueError("triple_combined needs m3 + n3 s = r + m1 + n1 s - 2s")
    ctx = ctx or default_context(s)
    a1, a2 = coeff_a(m1, n1, s), coeff_a(m2, n2, s)
    y1, y2 = solve_Y(n1, r, m1, s, ctx), solve_Y(n2, r, m2, s, ctx)
    z1, z2 = zeta(r, s, n1, m1, n1), zeta(r, s, n2, m2, n2)
    weight = (z1 / a1 - z2 / a2) / coeff_a(m3, n3, s)
    third = cal_A(n3, m3, s, ctx)
    state = y1.generator.scale(1 / a1) - y2.generator.scale(1 / a2) - third.generator.scale(weight)
    time = third.time.scale(-weight)
    return state, time


def resonant_symmetry(s, ctx=None):
    """Kernel element available when ``r1 = s(s+1) + 2s``.

    Returns ``(first, state, time)``: ``first`` is a multiple of ``calB^s_s``
    and ``(state, time)`` solve
    ``[A^-1_r1, first] + [lead, state] + time lead == 0``.
    The coefficients are taken from the reduced bracket itself; the printed
    residual of ``[A^-1_r, calB^s_s]`` does not replay.
    """
    ctx = ctx or default_context(s)
    r1 = s * (s + 1) + 2 * s
    m = r1 + s * s - s
    red = reduce_bracket_calB(r1, s, ctx)
    alpha = red.residual.coeff("A", -1, s + r1 + s * s)
    beta = red.residual.coeff("B", 0, r1 + s * s)
    scale = 1 / alpha
    first = cal_B(s, s, ctx).generator.scale(scale)
    a = coeff_a(m, 0, s)
    pair = cal_A(0, m, s, ctx)
    b2s = cal_B(2 * s, s, ctx)
    b2s_coeff = b2s.residual.coeff("B", 0, 2 * s * (s + 1) + s)
    # B^0_{r1+s^2} left after the first two pieces, removed by calB^{2s}_{2s}
    left = scale * beta - coeff_c0(m, 2, s)
    state = red.generator.scale(scale) - pair.generator.scale(1 / a) - b2s.generator.scale(left / b2s_coeff)
    time = pair.time.scale(-1 / a)
    return first, state, time
