"""Normal form pipelines: classical, orbital, simplest and parametric.

Every pipeline records what it applied in a ``TransformationLog`` so the
result can be replayed on the input by coordinate substitution.

Grades.  The classical stage works with the polynomial grading (grade of
``A^l_k`` is ``k``); the later stages use ``k + l s + (r1+2)|m|``.  A run at
degree ``N`` keeps the classical stage to grade ``N - 1 + extra`` and the
graded stages to ``N - 1 - s + extra``, where ``extra`` is the parameter
weight when parameters are present and 0 otherwise.  These bounds are the
largest for which every kept coefficient is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import (
    GradingContext, NotBogdanovTakensError, PlanarSystem, VectorFieldSeries, canonicalize,
    from_basis, to_basis,
)
from .coords import CoordField
from .rational import Q, ZERO
from .solver import HomologicalSolver, key_grade


class UnsupportedCaseError(ValueError):
    """The system is not in the generalized saddle-node case (2s < r1 fails)."""


class DegenerateError(ValueError):
    """A resonance index could not be determined within the truncation."""


class RankDeficientError(ValueError):
    """The parametric family is a degenerate perturbation."""

    def __init__(self, message, deficient):
        super().__init__(message)
        self.deficient = deficient


# -- bookkeeping ------------------------------------------------------------

@dataclass
class LogEntry:
    """One applied transformation.

    ``kind`` is one of ``linear`` (``(x, y) = M (X, Y)``), ``generator``
    (``exp`` of a solver generator), ``scale`` (``(x, y, t) = (aX, bY, c tau)``),
    ``reparam`` (``mu = T nu``) and ``truncate`` (drop terms above ``bound``).
    """

    kind: str
    data: object = None
    ctx: GradingContext | None = None
    bound: int | None = None
    grade: int | None = None


@dataclass
class TransformationLog:
    entries: list = field(default_factory=list)

    def add(self, kind, data=None, ctx=None, bound=None, grade=None):
        self.entries.append(LogEntry(kind, data, ctx, bound, grade))

    def generators(self):
        return [e for e in self.entries if e.kind == "generator"]

    def transformations(self):
        """Entries that change the field (truncation markers excluded)."""
        return [e for e in self.entries if e.kind != "truncate"]

    def is_identity(self):
        return not self.transformations()

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass
class ResonanceData:
    s: int
    r1: int | None = None
    r2: int | None = None
    s2: int | None = None
    flags: dict = field(default_factory=dict)
    excluded_grades: set = field(default_factory=set)


@dataclass
class CertificateEntry:
    """An assertion that the coefficient of ``term`` vanishes in the output."""

    reason: str
    term: tuple
    value: object

    @property
    def holds(self):
        return self.value == 0


@dataclass
class RankVerdict:
    rank: int
    required: int
    rows: list
    matrix: list
    reparametrization: list | None = None

    @property
    def ok(self):
        return self.rank == self.required


@dataclass
class NormalFormReport:
    mode: str
    input: PlanarSystem
    degree: int
    output: VectorFieldSeries
    bound: int
    log: TransformationLog
    resonance: ResonanceData | None = None
    certificate: list = field(default_factory=list)
    rank: RankVerdict | None = None
    pnf: dict | None = None

    @property
    def system(self):
        return from_basis(self.output)

    def coefficient(self, kind, l, k, mono=None):
        return self.output.coeff(kind, l, k, mono)

    def alpha(self, k):
        """Coefficient of ``y^(k+1) d/dx`` (``A^-1_k``) at mu = 0."""
        return self.output.coeff("A", -1, k)

    def beta(self, k):
        """Coefficient of ``B^0_k`` at mu = 0."""
        return self.output.coeff("B", 0, k)

    def certificate_holds(self):
        return all(c.holds for c in self.certificate)


# -- helpers ----------------------------------------------------------------

def _prepare(sys, log):
    """Check the BT linear part and move it to ``-x d/dy``."""
    if not isinstance(sys, PlanarSystem):
        raise TypeError("expected a PlanarSystem")
    canon, M = canonicalize(sys)
    if M != [[1, 0], [0, 1]]:
        log.add("linear", M)
    return canon


def _run_stage(series, ctx, space, bound, log, level=None):
    result = HomologicalSolver(ctx, space, level).run(series, bound)
    for step in result.steps:
        log.add("generator", step.generator, ctx, bound, step.grade)
    return result


def _classical(sys, ctx, bound, log):
    log.add("truncate", None, ctx, bound)
    v = to_basis(sys, ctx, bound)
    return _run_stage(v, ctx, "state", bound, log, level=1)


def _leading(series, kind, l, start, stop):
    for k in range(start, stop + 1):
        if series.coeff(kind, l, k) != 0:
            return k
    return None


def _regrade(series, ctx, bound, log):
    log.add("truncate", None, ctx, bound)
    return to_basis(from_basis(series), ctx, bound)


def detect_s(classical, max_k):
    """``s``: first nonvanishing B^0 coefficient (at mu = 0) in a classical form."""
    s = _leading(classical, "B", 0, 1, max_k)
    if s is None:
        raise DegenerateError("no B^0 term within the truncation; s is undetermined")
    return s


def classical_r1(classical, max_k):
    return _leading(classical, "A", -1, 1, max_k)


def corrected_r1(classical, s, max_k):
    """First ``k`` where the A^-1 coefficient survives the B^0 elimination test.

    ``a_{2s+m}`` is compared with ``m (m+s) b_{s+m} / ((s+2)(s+m+1))``; this is
    the first-order prediction.  The pipelines confirm it against the solver.
    """
    bs = classical.coeff("B", 0, s)
    for k in range(1, max_k + 1):
        a = classical.coeff("A", -1, k)
        m = k - 2 * s
        if m >= 1:
            b = classical.coeff("B", 0, s + m) / bs
            a = a / bs - Q(m * (m + s), (s + 2) * (s + m + 1)) * b
        if a != 0:
            return k
    return None


def detect_resonances(classical, max_k):
    """``s`` and the first-order ``r1`` of a classical form at mu = 0.

    The pipelines replace ``r1`` by ``update_r1`` once the orbital elimination
    has run; the two agree whenever the first-order test is decisive.
    """
    s = detect_s(classical, max_k)
    r1 = corrected_r1(classical, s, max_k)
    if r1 is None:
        raise DegenerateError("no A^-1 term within the truncation; r1 is undetermined")
    return ResonanceData(s, r1, flags={"r1_equals_s(s+1)+2s": r1 == s * (s + 1) + 2 * s})


def normalize_bs(series, s):
    """Scale so that the coefficients of ``A^1_0`` and ``B^0_s`` are 1.

    Uses ``(x, y, t) = (b_s X, Y, tau / b_s)``, which stays rational.  Returns
    ``(scaled_series, (a, b, c))``.
    """
    bs = series.coeff("B", 0, s)
    if bs == 0:
        raise DegenerateError("b_s = 0")
    a, b, c = bs, Q(1), 1 / bs
    if (a, b, c) == (1, 1, 1):
        return series, (a, b, c)
    field_ = CoordField.from_system(from_basis(series)).scale(a, b, c)
    return to_basis(field_.to_system(), series.ctx, series.truncation), (a, b, c)


def update_r1(series, s, bound):
    """``r1`` after the orbital B^0 elimination settles (the fixpoint of the update)."""
    ctx = series.ctx
    out = HomologicalSolver(ctx, "state_time").run(series, bound).series
    return _leading(out, "A", -1, 1, bound + s)


def _check_saddle_node(s, r1):
    if r1 is not None and r1 <= 2 * s:
        raise UnsupportedCaseError(f"2s >= r1 (s={s}, r1={r1}): not the generalized saddle-node case")


def _mu_free(series):
    z = series.ctx.zero_mono()
    return VectorFieldSeries({k: c for k, c in series.items() if k[3] == z}, series.ctx,
                             series.truncation)


def _in_range(series, kind, l, k, bound):
    return series.ctx.grade(l, k) <= bound and k >= 0


# -- certificates -------------------------------------------------------------

def orbital_certificate(out, s, r1, r2, bound):
    cert = []

    def add(reason, k):
        if out.ctx.grade(-1, k) <= bound:
            cert.append(CertificateEntry(reason, ("A", -1, k), out.coeff("A", -1, k)))

    k = 0
    while (j := k * (s + 1) + 2 * s) - s <= bound:
        if k != s:
            add(f"alpha_{{k(s+1)+2s}}, k={k}", j)
        k += 1
    add("alpha_{r1+s^2+s}", r1 + s * s + s)
    if r1 == s * (s + 1) + 2 * s and r2 is not None and r2 < 2 * s * s + 4 * s:
        add("alpha_{s+r2+s^2}", s + r2 + s * s)
    return cert


def simplest_certificate(out, s, r1, s2, bound):
    cert = []

    def beta(reason, j):
        if j <= bound:
            cert.append(CertificateEntry(reason, ("B", 0, j), out.coeff("B", 0, j)))

    def alpha(reason, k):
        if k - s <= bound:
            cert.append(CertificateEntry(reason, ("A", -1, k), out.coeff("A", -1, k)))

    m = 1
    while m + (m + 1) * s <= bound:
        if m != s:
            beta(f"beta_{{m+(m+1)s}}, m={m}", m + (m + 1) * s)
        m += 1
    m = 1
    while m + (m + 2) * s <= bound:
        beta(f"beta_{{m+(m+2)s}}, m={m}", m + (m + 2) * s)
        m += 1
    if s2 is None or r1 - s < s2:
        beta("beta_{r1+s^2}", r1 + s * s)
        for m in range(1, r1 + 1):
            if r1 == m + (m + 2) * s - s * s:
                alpha("alpha_{r1+s+s^2}", r1 + s + s * s)
    else:
        beta("beta_{s+s2+s^2}", s + s2 + s * s)
        for m in range(1, s2 + s * s + 1):
            if s2 == m + (m + 2) * s - s - s * s:
                alpha(f"alpha_{{m+(m+3)s}}, m={m}", m + (m + 3) * s)
    return cert


# -- pipelines ---------------------------------------------------------------

def classical_nf(sys: PlanarSystem, degree: int) -> NormalFormReport:
    """First level normal form: only ``A^1_0``, ``A^-1_k`` and ``B^0_k`` remain."""
    if degree < 2:
        raise ValueError("degree must be at least 2")
    log = TransformationLog()
    canon = _prepare(sys, log)
    ctx = GradingContext.classical(sys.p)
    bound = degree - 1
    result = _classical(canon, ctx, bound, log)
    return NormalFormReport("classical", sys, degree, result.series, bound, log)


def _graded_setup(sys, degree, log):
    """Classical stage at mu = 0, ``s``, first ``r1`` and the graded context."""
    if degree < 3:
        raise ValueError("degree must be at least 3")
    canon = _prepare(sys, log)
    ctx_c = GradingContext.classical(0)
    cl = _classical(canon, ctx_c, degree - 1, log).series
    s = detect_s(cl, degree - 1)
    r1 = classical_r1(cl, degree - 1)
    _check_saddle_node(s, r1)
    return cl, s, r1


def orbital_nf(sys: PlanarSystem, degree: int, level=None) -> NormalFormReport:
    """Orbital normal form ``xdot = x y^s + sum alpha_i y^(i+1)``, ``ydot = -x + y^(s+1)``.

    ``level=None`` is the infinite level.  A finite level gives the partial
    form reached with generators carried over at most ``level - 1`` grades;
    its certificate is left empty.
    """
    if sys.p:
        raise ValueError("orbital_nf takes a system without parameters")
    log = TransformationLog()
    cl, s, r1 = _graded_setup(sys, degree, log)
    bound = degree - 1 - s
    if r1 is None:
        r1 = degree
    ctx = GradingContext.resonance(s, r1)
    v = _regrade(cl, ctx, bound, log)
    v, scale = normalize_bs(v, s)
    if scale != (1, 1, 1):
        log.add("scale", scale)
    result = _run_stage(v, ctx, "state_time", bound, log, level=level)
    out = result.series
    r1 = _leading(out, "A", -1, 1, bound + s)
    if r1 is None:
        raise DegenerateError("no A^-1 term survives within the truncation; r1 is undetermined")
    _check_saddle_node(s, r1)
    res = ResonanceData(s, r1)
    res.r2 = _r2(v, s, r1, bound)
    res.flags["r1_equals_s(s+1)+2s"] = r1 == s * (s + 1) + 2 * s
    res.excluded_grades = _excluded(result.reports, s, bound)
    res.flags["excluded_grades"] = res.excluded_grades
    report = NormalFormReport("orbital", sys, degree, out, bound, log, res)
    if level is None:
        report.certificate = orbital_certificate(out, s, r1, res.r2, bound)
    return report


def _excluded(reports, s, bound):
    """Indices ``j`` whose ``A^-1_j`` (mu-free) is absent from the computed complement."""
    kept = set()
    for rep in reports.values():
        for kind, l, k, mono in rep.complement:
            if kind == "A" and l == -1 and not any(mono):
                kept.add(k)
    return {j for j in range(1, bound + s + 1) if j - s in reports and j not in kept}


def _r2(v, s, r1, bound):
    """First A^-1 index above ``r1`` surviving at level ``r1 - s + 1``."""
    out = HomologicalSolver(v.ctx, "state_time", level=r1 - s + 1).run(v, bound).series
    return _leading(out, "A", -1, r1 + 1, bound + s)


def simplest_nf(sys: PlanarSystem, degree: int) -> NormalFormReport:
    """Normal form under near-identity state changes only (no time rescaling)."""
    if sys.p:
        raise ValueError("simplest_nf takes a system without parameters")
    log = TransformationLog()
    cl, s, r1 = _graded_setup(sys, degree, log)
    if r1 is None:
        raise DegenerateError("no A^-1 term within the truncation; r1 is undetermined")
    bound = degree - 1 - s
    ctx = GradingContext.resonance(s, r1)
    v = _regrade(cl, ctx, bound, log)
    first = HomologicalSolver(ctx, "state", level=s + 1).run(v, bound).series
    s2 = _leading(first, "B", 0, s + 1, bound)
    result = _run_stage(v, ctx, "state", bound, log)
    out = result.series
    res = ResonanceData(s, r1, s2=s2)
    res.excluded_grades = _excluded(result.reports, s, bound)
    res.flags["excluded_grades"] = res.excluded_grades
    report = NormalFormReport("simplest", sys, degree, out, bound, log, res)
    report.certificate = simplest_certificate(out, s, r1, s2, bound)
    return report


# -- parametric ---------------------------------------------------------------

def _pnf_rows(reports, s, degree):
    """Unfolding slots: mu-linear classical terms in the complement, in PNF order.

    Returns ``B^0_j`` (j <= s-2) first, then ``A^-1_j`` for ``j < degree``, then
    anything else the complement holds at mu-degree one.
    """
    slots = set()
    for rep in reports.values():
        for kind, l, k, mono in rep.complement:
            if sum(mono) == 1:
                slots.add((kind, l, k))
    rows = [("B", 0, j) for j in range(0, s - 1) if ("B", 0, j) in slots]
    rows += [("A", -1, j) for j in range(-1, degree) if ("A", -1, j) in slots]
    rows += sorted(t for t in slots if t not in rows and t[2] < degree)
    return rows


def _unit(p, i):
    return tuple(1 if j == i else 0 for j in range(p))


def _rank(rows):
    """Rank of a list of rational rows."""
    work = [list(r) for r in rows]
    rank = 0
    ncols = len(work[0]) if work else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(work)) if work[i][col] != 0), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        for i in range(rank + 1, len(work)):
            f = work[i][col] / work[rank][col]
            if f:
                work[i] = [a - f * b for a, b in zip(work[i], work[rank])]
        rank += 1
    return rank


def _inverse(M):
    n = len(M)
    aug = [list(row) + [Q(1) if i == j else ZERO for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [a * inv for a in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def _rank_and_inverse(L, p):
    """Rank of ``L`` and, when it has full row rank, ``T`` with ``L T = [I | 0]``."""
    r = _rank(L)
    if r < len(L):
        return r, None
    full = [list(row) for row in L]
    for i in range(p):
        if len(full) == p:
            break
        cand = full + [[Q(1) if j == i else ZERO for j in range(p)]]
        if _rank(cand) == len(cand):
            full = cand
    return r, _inverse(full)


def parametric_nf(sys: PlanarSystem, degree: int) -> NormalFormReport:
    """Parametric normal form to first order in the parameters.

    Terms of order two or higher in ``mu`` are dropped; the rank condition and
    the final reparametrization only involve the linear part.
    """
    p = sys.p
    if p == 0:
        raise ValueError("parametric_nf needs a system with parameters")
    log = TransformationLog()
    # resonances from the unperturbed system
    base = orbital_nf(sys.at_zero(), degree)
    s, r1 = base.resonance.s, base.resonance.r1
    if degree <= r1:
        raise DegenerateError(f"degree {degree} must exceed r1 = {r1}")
    w = r1 + 2
    canon = _prepare(sys, log)
    bound = degree - 1 - s + w
    ctx_c = GradingContext.classical(p, mu_order=1)
    cl = _classical(canon, ctx_c, bound + s, log).series
    ctx = GradingContext.resonance(s, r1, p, mu_order=1)
    v = _regrade(cl, ctx, bound, log)
    v, scale = normalize_bs(v, s)
    if scale != (1, 1, 1):
        log.add("scale", scale)
    result = _run_stage(v, ctx, "state_time_param", bound, log)
    out = result.series
    rows = _pnf_rows(result.reports, s, degree)
    L = [[out.coeff(*row, _unit(p, i)) for i in range(p)] for row in rows]
    required = len(rows)
    rank, T = _rank_and_inverse(L, p)
    verdict = RankVerdict(rank, required, rows, L, T)
    if T is None:
        deficient = _deficient_rows(L, rows)
        raise RankDeficientError(
            f"rank {rank} < {required}: degenerate perturbation", deficient)
    if any(T[i][j] != (1 if i == j else 0) for i in range(p) for j in range(p)):
        log.add("reparam", T)
        field_ = CoordField.from_system(from_basis(out)).reparametrize(T)
        out = to_basis(field_.to_system(), ctx, bound)
    res = ResonanceData(s, r1, r2=base.resonance.r2)
    res.flags["r1_equals_s(s+1)+2s"] = base.resonance.flags.get("r1_equals_s(s+1)+2s")
    res.excluded_grades = base.resonance.excluded_grades
    res.flags["excluded_grades"] = res.excluded_grades
    report = NormalFormReport("parametric", sys, degree, out, bound, log, res, rank=verdict)
    report.certificate = orbital_certificate(_mu_free(out), s, r1, res.r2, degree - 1 - s)
    report.pnf = render_pnf(out, rows, s, degree)
    return report


def _deficient_rows(L, rows):
    """Rows that are linear combinations of the rows before them."""
    out, kept = [], []
    for row, label in zip(L, rows):
        if _rank(kept + [row]) == len(kept):
            out.append(label)
        else:
            kept.append(row)
    return out


def render_pnf(out, rows, s, degree):
    """Coefficients of the reparametrized normal form in the ``(x, y)`` monomial layout.

    Returns ``{"dx": {(i, j): (const, {param_index: coeff})}, "dy": ...}`` with
    monomials of degree at most ``degree``.
    """
    sys = from_basis(out)
    p = out.ctx.p
    z = (0,) * p

    def layout(poly):
        table = {}
        for (i, j, m), c in poly.items():
            if i + j > degree:
                continue
            const, lin = table.setdefault((i, j), [ZERO, {}])
            if m == z:
                table[(i, j)][0] = const + c
            else:
                idx = m.index(1)
                lin[idx] = lin.get(idx, ZERO) + c
        return {k: (v[0], v[1]) for k, v in sorted(table.items())}

    return {"dx": layout(sys.dx), "dy": layout(sys.dy)}


# -- the example family ----------------------------------------------------------

def example_system(a, b, c, d):
    """``xdot = a x^2 + b x y``, ``ydot = -x + c x^2 + d x y + b y^2``."""
    a, b, c, d = Q(a), Q(b), Q(c), Q(d)
    dx = {(2, 0, ()): a, (1, 1, ()): b}
    dy = {(1, 0, ()): Q(-1), (2, 0, ()): c, (1, 1, ()): d, (0, 2, ()): b}
    return PlanarSystem(dx, dy, 0)


@dataclass
class ExampleReport:
    classical: NormalFormReport
    a_tilde: dict
    b_tilde: dict
    branch: str
    discriminant: object
    orbital: NormalFormReport | None = None


def run_example_system(a, b, c, d, degree=8) -> ExampleReport:
    """Classical coefficients and branch of the example family.

    ``discriminant`` is ``5 a3^2 |b1| + 4 a4 b1 - 2 b3`` in the classical
    coefficients; the branch is ``r1=3`` when ``a3 b1 != 2 b2 / 9``, ``r1=4``
    when that vanishes and the discriminant does not, and ``degenerate``
    otherwise.
    """
    if Q(b) == 0:
        raise UnsupportedCaseError("b = 0: not a generalized saddle-node within this family")
    sys = example_system(a, b, c, d)
    cl = classical_nf(sys, max(degree, 5))
    at = {k: cl.alpha(k) for k in range(1, 5)}
    bt = {k: cl.beta(k) for k in range(1, 5)}
    disc = 5 * at[3] ** 2 * abs(bt[1]) + 4 * at[4] * bt[1] - 2 * bt[3]
    if at[3] * bt[1] - Q(2, 9) * bt[2] != 0:
        branch = "r1=3"
    elif disc != 0:
        branch = "r1=4"
    else:
        branch = "degenerate"
    orbital = None
    try:
        orbital = orbital_nf(sys, degree)
    except (UnsupportedCaseError, DegenerateError):
        pass
    return ExampleReport(cl, at, bt, branch, disc, orbital)


__all__ = [
    "CertificateEntry", "DegenerateError", "ExampleReport", "LogEntry", "NormalFormReport",
    "NotBogdanovTakensError", "RankDeficientError", "RankVerdict", "ResonanceData",
    "TransformationLog", "UnsupportedCaseError", "classical_nf", "classical_r1",
    "corrected_r1", "detect_resonances", "detect_s", "example_system", "normalize_bs", "orbital_certificate",
    "orbital_nf", "parametric_nf", "render_pnf", "run_example_system", "simplest_certificate",
    "simplest_nf", "update_r1",
]
