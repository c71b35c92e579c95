"""Command line front end.

Input grammar (whitespace is ignored)::

    dx = <poly>; dy = <poly>

where a monomial is a product of an integer or ``p/q`` coefficient, ``x^i``,
``y^j`` and declared parameters.  In ``example`` mode the input is
``a = ...; b = ...; c = ...; d = ...`` instead.

Exit codes: 0 success, 2 parse error, 3 not Bogdanov-Takens, 4 unsupported
case (2s >= r1), 5 degenerate within the truncation, 6 rank deficient.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field

from .algebra import NotBogdanovTakensError, PlanarSystem
from .normalization import (
    DegenerateError, RankDeficientError, UnsupportedCaseError, classical_nf, orbital_nf,
    parametric_nf, run_example_system, simplest_nf,
)
from .rational import Q, qstr

MODES = ("classical", "orbital", "simplest", "parametric", "example")

EXIT_OK, EXIT_PARSE, EXIT_NOT_BT, EXIT_UNSUPPORTED, EXIT_DEGENERATE, EXIT_RANK = 0, 2, 3, 4, 5, 6


class ParseError(ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


@dataclass
class RunConfig:
    mode: str = "orbital"
    degree: int = 8
    params: list = field(default_factory=list)
    output: str = "text"
    emit_log: bool = False
    emit_certificate: bool = False


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+[eE][-+]?\d+)|(\d+)|([A-Za-z_]\w*)|(.))")


def _tokens(text):
    out = []
    for m in _TOKEN.finditer(text):
        if m.group(0).strip() == "":
            continue
        pos = m.start() + len(m.group(0)) - len(m.group(0).lstrip())
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        if m.group(1):
            raise ParseError(f"non-rational literal {m.group(1)!r}; write it as p/q", line, col)
        if m.group(2):
            out.append(("int", m.group(2), line, col))
        elif m.group(3):
            out.append(("name", m.group(3), line, col))
        else:
            out.append(("op", m.group(4), line, col))
    return out


class _Parser:
    def __init__(self, text, names):
        self.toks = _tokens(text)
        self.i = 0
        self.names = names
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def where(self):
        t = self.peek()
        if t:
            return t[2], t[3]
        lines = self.text.split("\n")
        return len(lines), len(lines[-1]) + 1

    def expect(self, kind, value=None):
        t = self.peek()
        if t is None or t[0] != kind or (value is not None and t[1] != value):
            want = value or kind
            got = "end of input" if t is None else repr(t[1])
            raise ParseError(f"expected {want}, got {got}", *self.where())
        self.i += 1
        return t

    def accept(self, value):
        t = self.peek()
        if t and t[0] == "op" and t[1] == value:
            self.i += 1
            return True
        return False

    def factor(self):
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input", *self.where())
        if t[0] == "int":
            self.i += 1
            c = Q(int(t[1]))
            if self.accept("/"):
                d = self.expect("int")
                if int(d[1]) == 0:
                    raise ParseError("zero denominator", d[2], d[3])
                c /= int(d[1])
            return c, {}
        if t[0] == "name":
            if t[1] not in self.names:
                raise ParseError(f"unknown symbol {t[1]!r}", t[2], t[3])
            self.i += 1
            power = 1
            if self.accept("^"):
                power = int(self.expect("int")[1])
            return Q(1), {t[1]: power}
        raise ParseError(f"unexpected {t[1]!r}", t[2], t[3])

    def term(self):
        coeff, exps = self.factor()
        while self.accept("*"):
            c, e = self.factor()
            coeff *= c
            for k, v in e.items():
                exps[k] = exps.get(k, 0) + v
        return coeff, exps

    def poly(self):
        out = []
        sign = 1
        if self.accept("-"):
            sign = -1
        else:
            self.accept("+")
        while True:
            c, e = self.term()
            out.append((sign * c, e))
            if self.accept("+"):
                sign = 1
            elif self.accept("-"):
                sign = -1
            else:
                return out


def parse_system(text, params=()):
    """Parse ``dx = ...; dy = ...`` into a PlanarSystem with exact coefficients."""
    params = list(params)
    names = {"x", "y", *params}
    parser = _Parser(text, names | {"dx", "dy"})
    polys = {}
    while parser.peek() is not None:
        t = parser.expect("name")
        if t[1] not in ("dx", "dy"):
            raise ParseError(f"expected dx or dy, got {t[1]!r}", t[2], t[3])
        if t[1] in polys:
            raise ParseError(f"{t[1]} given twice", t[2], t[3])
        parser.expect("op", "=")
        parser.names = names
        polys[t[1]] = parser.poly()
        parser.names = names | {"dx", "dy"}
        if not parser.accept(";") and parser.peek() is not None:
            raise ParseError("expected ';'", *parser.where())
    for name in ("dx", "dy"):
        if name not in polys:
            raise ParseError(f"missing {name}", *parser.where())
    p = len(params)

    def convert(terms):
        out = {}
        for c, e in terms:
            key = (e.get("x", 0), e.get("y", 0), tuple(e.get(m, 0) for m in params))
            out[key] = out.get(key, Q(0)) + c
        return out

    return PlanarSystem(convert(polys["dx"]), convert(polys["dy"]), p)


def parse_example(text):
    """Parse ``a = ...; b = ...; c = ...; d = ...``."""
    parser = _Parser(text, {"a", "b", "c", "d"})
    values = {}
    while parser.peek() is not None:
        t = parser.expect("name")
        parser.expect("op", "=")
        parser.names = set()
        terms = parser.poly()
        parser.names = {"a", "b", "c", "d"}
        values[t[1]] = sum((c for c, _ in terms), Q(0))
        if not parser.accept(";") and parser.peek() is not None:
            raise ParseError("expected ';'", *parser.where())
    missing = [k for k in "abcd" if k not in values]
    if missing:
        raise ParseError(f"missing {', '.join(missing)}", *parser.where())
    return values


# -- rendering ---------------------------------------------------------------

def _monomial(i, j, mono, params):
    parts = []
    for name, e in zip(params, mono):
        if e:
            parts.append(name if e == 1 else f"{name}^{e}")
    if i:
        parts.append("x" if i == 1 else f"x^{i}")
    if j:
        parts.append("y" if j == 1 else f"y^{j}")
    return "*".join(parts)


def render_poly(poly, params=()):
    items = sorted(poly.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0][0], kv[0][2]))
    out = ""
    for (i, j, mono), c in items:
        mon = _monomial(i, j, mono, params)
        sign = "-" if c < 0 else "+"
        mag = -c if c < 0 else c
        body = qstr(mag) if not mon else (mon if mag == 1 else f"{qstr(mag)}*{mon}")
        out += f" {sign} {body}" if out else ("-" + body if sign == "-" else body)
    return out or "0"


def render_system(sys_, params=()):
    return f"dx = {render_poly(sys_.dx, params)}; dy = {render_poly(sys_.dy, params)}"


def _term_json(key, c):
    kind, l, k, mono = key
    return {"basis": kind, "l": l, "k": k, "mu": list(mono), "coeff": qstr(c), "beta_power": 0}


def _gen_json(gen):
    return [_term_json(key, c) for key, c in sorted(gen.items())]


def _log_json(log):
    out = []
    for e in log:
        entry = {"kind": e.kind}
        if e.kind == "linear" or e.kind == "reparam":
            entry["matrix"] = [[qstr(v) for v in row] for row in e.data]
        elif e.kind == "scale":
            entry["x"], entry["y"], entry["t"] = (qstr(v) for v in e.data)
        elif e.kind == "generator":
            entry["grade"] = e.grade
            entry["terms"] = _gen_json(e.data)
        elif e.kind == "truncate":
            entry["s"], entry["weight"], entry["bound"] = e.ctx.s, e.ctx.weight, e.bound
        out.append(entry)
    return out


def report_json(report, config):
    res = report.resonance
    out = {"mode": report.mode, "degree": report.degree}
    if res is not None:
        out["s"] = res.s
        out["r1"] = res.r1
        if res.r2 is not None:
            out["r2"] = res.r2
        if res.s2 is not None:
            out["s2"] = res.s2
    out["terms"] = [_term_json(k, c) for k, c in sorted(report.output.items())]
    out["system"] = render_system(report.system, config.params)
    if config.emit_log:
        out["log"] = _log_json(report.log)
    if config.emit_certificate:
        out["certificate"] = [
            {"reason": c.reason, "basis": c.term[0], "l": c.term[1], "k": c.term[2],
             "coeff": qstr(c.value), "holds": c.holds}
            for c in report.certificate
        ]
    if report.rank is not None:
        out["rank"] = {"rank": report.rank.rank, "required": report.rank.required,
                       "rows": [list(r) for r in report.rank.rows], "ok": report.rank.ok}
    return out


def report_text(report, config):
    lines = [f"mode: {report.mode}  degree: {report.degree}"]
    res = report.resonance
    if res is not None:
        extra = "".join(f"  {n}={getattr(res, n)}" for n in ("r2", "s2") if getattr(res, n) is not None)
        lines.append(f"s={res.s}  r1={res.r1}{extra}")
    lines.append(render_system(report.system, config.params))
    for (kind, l, k, mono), c in sorted(report.output.items()):
        mu = "" if not any(mono) else " " + _monomial(0, 0, mono, config.params)
        lines.append(f"  {kind}^{l}_{k}{mu}: {qstr(c)}")
    if report.rank is not None:
        lines.append(f"rank {report.rank.rank} of {report.rank.required}")
    if config.emit_certificate:
        lines.append("certificate:")
        for c in report.certificate:
            lines.append(f"  {c.term[0]}^{c.term[1]}_{c.term[2]} = {qstr(c.value)}  ({c.reason})")
    if config.emit_log:
        lines.append(f"log: {len(report.log)} entries")
        for e in report.log:
            if e.kind == "generator":
                lines.append(f"  generator at grade {e.grade}: {len(e.data)} terms")
            else:
                lines.append(f"  {e.kind}")
    return "\n".join(lines)


def example_json(ex):
    out = {
        "mode": "example",
        "a_tilde": {str(k): qstr(v) for k, v in ex.a_tilde.items()},
        "b_tilde": {str(k): qstr(v) for k, v in ex.b_tilde.items()},
        "branch": ex.branch,
        "discriminant": qstr(ex.discriminant),
    }
    if ex.orbital is not None:
        out["s"], out["r1"] = ex.orbital.resonance.s, ex.orbital.resonance.r1
    return out


def example_text(ex):
    lines = [f"a~{k} = {qstr(v)}" for k, v in ex.a_tilde.items()]
    lines += [f"b~{k} = {qstr(v)}" for k, v in ex.b_tilde.items()]
    lines.append(f"discriminant = {qstr(ex.discriminant)}")
    lines.append(f"branch: {ex.branch}")
    return "\n".join(lines)


# -- driver --------------------------------------------------------------------

PIPELINES = {
    "classical": classical_nf,
    "orbital": orbital_nf,
    "simplest": simplest_nf,
    "parametric": parametric_nf,
}


def run(config: RunConfig, text: str, out=None, err=None):
    """Parse, normalize and print.  Returns the exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        if config.mode == "example":
            v = parse_example(text)
            result = run_example_system(v["a"], v["b"], v["c"], v["d"], config.degree)
            body = example_json(result) if config.output == "json" else example_text(result)
        else:
            system = parse_system(text, config.params)
            if config.mode == "parametric" and not config.params:
                raise ParseError("parametric mode needs --params", 1, 1)
            if config.mode != "parametric" and config.params:
                system = system.at_zero()
            report = PIPELINES[config.mode](system, config.degree)
            if config.output == "json":
                body = report_json(report, config)
            else:
                body = report_text(report, config)
    except ParseError as e:
        print(f"parse error: {e}", file=err)
        return EXIT_PARSE
    except NotBogdanovTakensError as e:
        print(f"not a Bogdanov-Takens singularity: {e}", file=err)
        return EXIT_NOT_BT
    except UnsupportedCaseError as e:
        print(f"unsupported case: {e}", file=err)
        return EXIT_UNSUPPORTED
    except DegenerateError as e:
        print(f"degenerate within truncation: {e}", file=err)
        return EXIT_DEGENERATE
    except RankDeficientError as e:
        dirs = ", ".join(f"{k}^{l}_{j}" for k, l, j in e.deficient)
        print(f"degenerate perturbation: {e}; deficient: {dirs}", file=err)
        return EXIT_RANK
    if isinstance(body, dict):
        body = json.dumps(body, indent=2, sort_keys=True)
    print(body, file=out)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="btnf", description=__doc__.split("\n\n")[0])
    ap.add_argument("input", nargs="?", default="-", help="input file, or - for stdin")
    ap.add_argument("--mode", choices=MODES, default="orbital")
    ap.add_argument("--degree", type=int, default=8, help="truncation degree N")
    ap.add_argument("--params", default="", help="comma separated parameter names")
    ap.add_argument("--json", action="store_true", help="emit a JSON report")
    ap.add_argument("--log", action="store_true", help="include the transformation log")
    ap.add_argument("--certificate", action="store_true", help="include the vanishing certificate")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    params = [p.strip() for p in args.params.split(",") if p.strip()]
    config = RunConfig(args.mode, args.degree, params, "json" if args.json else "text",
                       args.log, args.certificate)
    if args.input == "-":
        text = sys.stdin.read()
    else:
        with open(args.input) as fh:
            text = fh.read()
    return run(config, text)


if __name__ == "__main__":
    sys.exit(main())
