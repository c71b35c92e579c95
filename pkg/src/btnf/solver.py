"""Graded homological elimination.

A generator is a flat dict whose keys are

* ``("A" | "B", l, k, mono)`` for a state vector field (acts by ``[g, v]``),
* ``("Z", l, k, mono)`` for a time rescaling (acts by the module action),
* ``("P", i, 0, mono)`` for ``mu_i -> mu_i + c mu^mono`` (acts by ``D_mu(v) P``).

The transformation attached to a generator ``g`` is ``exp(D_g)``, applied as a
Lie series and truncated at the working grade.  Elimination at grade ``n`` uses
fresh generators of grade ``n - lead`` together with kernel tuples carried over
from lower grades, which is what makes higher levels remove more.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import (
    GradingContext, VectorFieldSeries, mono_mul, term_action, term_bracket, valid_term,
)
from .rational import Q, ZERO

SPACES = {
    "state": ("A", "B"),
    "state_time": ("A", "B", "Z"),
    "state_time_param": ("A", "B", "Z", "P"),
}


def key_grade(ctx, key):
    kind, l, k, mono = key
    if kind == "P":
        return ctx.weight * (sum(mono) - 1)
    return ctx.grade(l, k, mono)


def _monos(p, degree):
    if p == 0:
        if degree == 0:
            yield ()
        return
    if p == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in _monos(p - 1, degree - first):
            yield (first,) + rest


def basis_at_grade(ctx, g, kinds=("A", "B")):
    """All basis keys of the requested kinds with grade exactly ``g``."""
    out = []
    s, w = ctx.s, ctx.weight
    d = 0
    while True:
        if ctx.mu_order is not None and d > ctx.mu_order:
            break
        if ctx.p == 0 and d > 0:
            break
        h = g - w * d
        if h < -1 - s:
            break
        monos = list(_monos(ctx.p, d))
        for kind in kinds:
            if kind == "A":
                l = -1
                while True:
                    k = h - l * s
                    if k < -1 or k < l - 1:
                        break
                    for m in monos:
                        out.append(("A", l, k, m))
                    if s == 0 and l >= k + 1:
                        break
                    l += 1
            elif kind in ("B", "Z"):
                l = 0
                while True:
                    k = h - l * s
                    if k < l:
                        break
                    if not (kind == "Z" and l == 0 and k == 0 and d == 0):
                        for m in monos:
                            out.append((kind, l, k, m))
                    if s == 0 and l >= k:
                        break
                    l += 1
        d += 1
    if "P" in kinds and ctx.p and g > 0 and g % w == 0:
        deg = g // w + 1
        if ctx.mu_order is None or deg <= ctx.mu_order:
            for i in range(ctx.p):
                for m in _monos(ctx.p, deg):
                    out.append(("P", i, 0, m))
    return out


def style_key(key):
    """Elimination priority: non-classical terms go first, then ``B^0``, then ``A^-1``."""
    kind, l, k, mono = key
    if kind == "A" and l == -1:
        cls = 2
    elif kind == "B" and l == 0:
        cls = 1
    else:
        cls = 0
    return (cls, -sum(mono), tuple(-e for e in mono), kind, l, k)


def is_classical_key(key):
    kind, l, _, _ = key
    return (kind == "A" and l == -1) or (kind == "B" and l == 0)


# -- generator action -------------------------------------------------------

def _acc(out, key, val):
    v = out.get(key, ZERO) + val
    if v == 0:
        out.pop(key, None)
    else:
        out[key] = v


def _by_grade(ctx, terms):
    out = {}
    for key, c in terms.items():
        out.setdefault(key_grade(ctx, key), []).append((key, c))
    return out


def apply_generator(ctx, gen, terms, bound):
    """``D_g`` applied to a raw vector field dict, truncated at grade ``bound``."""
    out = {}
    gg = _by_grade(ctx, gen)
    gw = _by_grade(ctx, terms)
    for a, gs in gg.items():
        for b, ws in gw.items():
            if bound is not None and a + b > bound:
                continue
            for (gk, gl, gd, gm), gc in gs:
                for (wk, wl, wd, wm), wc in ws:
                    if gk == "P":
                        e = wm[gl]
                        if e == 0:
                            continue
                        lowered = wm[:gl] + (e - 1,) + wm[gl + 1:]
                        mono = mono_mul(lowered, gm)
                        if not ctx.keeps(mono):
                            continue
                        _acc(out, (wk, wl, wd, mono), gc * wc * e)
                        continue
                    mono = mono_mul(gm, wm)
                    if not ctx.keeps(mono):
                        continue
                    if gk == "Z":
                        rule = term_action(gl, gd, wk, wl, wd)
                    else:
                        rule = term_bracket(gk, gl, gd, wk, wl, wd)
                    c = gc * wc
                    for (kind, l, k), r in rule:
                        _acc(out, (kind, l, k, mono), c * r)
    return out


def exp_generator(ctx, gen, terms, bound):
    """``exp(D_g)`` applied as a Lie series; terminates since ``g`` has positive grade."""
    result = dict(terms)
    current = terms
    j = 1
    while current:
        current = apply_generator(ctx, gen, current, bound)
        if not current:
            break
        inv = Q(1, j)
        current = {key: c * inv for key, c in current.items()}
        for key, c in current.items():
            _acc(result, key, c)
        j += 1
    return result


# -- exact linear algebra ---------------------------------------------------

@dataclass
class ExactMatrix:
    """Columns are sparse dicts row-key -> coefficient; ``labels`` names the columns."""

    rows: list
    labels: list
    columns: list

    def entry(self, row, col):
        return self.columns[col].get(row, ZERO)

    def rank(self):
        return len(eliminate(self).pivots)


@dataclass
class Elimination:
    pivots: dict
    complement: list
    kernel: list

    def reduce(self, target):
        """Reduce ``target`` against the pivots; returns (residual, column combination)."""
        residual = dict(target)
        combo = {}
        for pk in sorted(self.pivots, key=style_key):
            t = residual.get(pk)
            if not t:
                continue
            vec, cmb = self.pivots[pk]
            for key, c in vec.items():
                _acc(residual, key, -t * c)
            for j, c in cmb.items():
                _acc(combo, j, t * c)
        return residual, combo


def eliminate(matrix, priority=style_key):
    """Echelon form by leading row (in ``priority`` order).

    Columns are processed left to right; a column that reduces to zero yields a
    kernel combination of itself and earlier columns.
    """
    pivots = {}
    kernel = []
    for j, col in enumerate(matrix.columns):
        vec = dict(col)
        combo = {j: Q(1)}
        while vec:
            lead = min(vec, key=priority)
            if lead in pivots:
                t = vec[lead]
                pv, pc = pivots[lead]
                for key, c in pv.items():
                    _acc(vec, key, -t * c)
                for i, c in pc.items():
                    _acc(combo, i, -t * c)
                continue
            t = 1 / vec[lead]
            pivots[lead] = ({key: c * t for key, c in vec.items()},
                            {i: c * t for i, c in combo.items()})
            break
        else:
            kernel.append(combo)
    rows = matrix.rows if matrix.rows is not None else []
    complement = [r for r in rows if r not in pivots]
    return Elimination(pivots, complement, kernel)


# -- the incremental solver -------------------------------------------------

@dataclass
class GradeReport:
    grade: int
    removable: int
    complement: list
    kernel_dim: int
    candidates: int


@dataclass
class Step:
    """One transformation ``exp(D_g)`` used to normalize grade ``grade``."""

    grade: int
    generator: dict


@dataclass
class SolveResult:
    series: VectorFieldSeries
    steps: list = field(default_factory=list)
    reports: dict = field(default_factory=dict)
    lead: int = 0


def _combine(cands, combo):
    out = {}
    for j, c in combo.items():
        for key, v in cands[j].items():
            _acc(out, key, c * v)
    return out


class HomologicalSolver:
    """Normalizes a vector field series grade by grade.

    ``level=None`` gives the infinite level; ``level=1`` uses only fresh
    generators, which is the classical (first level) normal form.
    """

    def __init__(self, ctx: GradingContext, space="state", level=None):
        if space not in SPACES:
            raise ValueError(f"unknown generator space {space!r}")
        self.ctx = ctx
        self.kinds = SPACES[space]
        if ctx.mu_order is not None and ctx.mu_order <= 1:
            self.kinds = tuple(k for k in self.kinds if k != "P")
        self.level = level

    def _effect(self, gen, v_by_grade, n):
        ctx = self.ctx
        out = {}
        for a, gs in _by_grade(ctx, gen).items():
            ws = v_by_grade.get(n - a)
            if not ws:
                continue
            part = apply_generator(ctx, dict(gs), dict(ws), None)
            for key, c in part.items():
                _acc(out, key, c)
        return out

    def build_matrix(self, terms, n, lead, kernels):
        """Matrix of ``pi_n D_c v`` over fresh and carried candidates."""
        ctx = self.ctx
        fresh = []
        if n - lead >= 1:
            fresh = [{key: Q(1)} for key in basis_at_grade(ctx, n - lead, self.kinds)]
        floor = None if self.level is None else n - self.level + 1 - lead
        carried = [(kl, g) for kl, g in sorted(kernels, key=lambda t: -t[0])
                   if floor is None or kl >= floor]
        cands = fresh + [g for _, g in carried]
        leads = [n - lead] * len(fresh) + [kl for kl, _ in carried]
        v_by_grade = {}
        for key, c in terms.items():
            v_by_grade.setdefault(key_grade(ctx, key), {})[key] = c
        cols = [self._effect(g, v_by_grade, n) for g in cands]
        rows = basis_at_grade(ctx, n, ("A", "B"))
        return ExactMatrix(rows, cands, cols), leads

    def run(self, series: VectorFieldSeries, bound, start=None, lead=None):
        ctx = self.ctx
        if series.ctx != ctx:
            raise ValueError("series context does not match solver context")
        terms = {key: c for key, c in series.items() if key_grade(ctx, key) <= bound}
        if lead is None:
            lead = min((key_grade(ctx, k) for k in terms), default=0)
        if start is None:
            start = lead + 1
        result = SolveResult(None, lead=lead)
        kernels = []
        for n in range(start, bound + 1):
            matrix, leads = self.build_matrix(terms, n, lead, kernels)
            elim = eliminate(matrix)
            target = {key: c for key, c in terms.items() if key_grade(ctx, key) == n}
            _, combo = elim.reduce(target)
            if combo:
                gen = _combine(matrix.labels, {j: -c for j, c in combo.items()})
                gen = {key: c for key, c in gen.items() if key_grade(ctx, key) <= bound - lead}
                if gen:
                    terms = exp_generator(ctx, gen, terms, bound)
                    result.steps.append(Step(n, gen))
            new_kernels = []
            for kc in elim.kernel:
                j0 = max(kc)
                gen = _combine(matrix.labels, kc)
                gen = {key: c for key, c in gen.items() if key_grade(ctx, key) <= bound - lead}
                if gen:
                    new_kernels.append((leads[j0], gen))
            kernels = new_kernels
            result.reports[n] = GradeReport(n, len(elim.pivots), elim.complement,
                                            len(elim.kernel), len(matrix.labels))
        result.series = VectorFieldSeries._raw(terms, ctx, bound)
        return result
