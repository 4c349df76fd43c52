"""Command line front end: parse problem files, run pipeline stages, report.

Commands: ann-fs, bfun, funceq, laurent, zeta-diff, verify.  Problem files
are declarative "key: value" documents; all results are emitted as canonical
strings (print/parse round trips exactly) plus an optional JSON document.
Exit codes: 0 success, 2 stage timeout, 3 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .annihilator import ProblemInstance, ann_fs
from .bfunction import bfunction, functional_operator
from .integration import difference_gcrd, zeta_difference
from .laurent import LaurentRequest, ann_laurent
from .oracle import LogSection, PhiSpec, annihilates, apply_log_section, numeric_zeta, residual_check
from .weyl_core import (
    QQ,
    GBTimeout,
    TermOrder,
    WeylOperator,
    d_n,
    last_gb_stats,
)


class InputError(ValueError):
    """Problem file or operator syntax error, with position information."""

    def __init__(self, msg, line=None, col=None):
        pos = ""
        if line is not None:
            pos = f" (line {line}" + (f", col {col}" if col is not None else "") + ")"
        super().__init__(msg + pos)
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# operator grammar: integers, rationals p/q, names, d<var>, + - * ^, parens;
# all products explicit, exponents nonnegative integers
# ---------------------------------------------------------------------------

class _Lexer:
    def __init__(self, text, line=1):
        self.text = text
        self.line = line
        self.pos = 0
        self.toks = []
        self._lex()
        self.i = 0

    def _lex(self):
        t, i = self.text, 0
        while i < len(t):
            c = t[i]
            if c.isspace():
                i += 1
                continue
            col = i + 1
            if c.isdigit():
                j = i
                while j < len(t) and t[j].isdigit():
                    j += 1
                self.toks.append(("int", t[i:j], col))
                i = j
            elif c.isalpha() or c == "_":
                j = i
                while j < len(t) and (t[j].isalnum() or t[j] == "_"):
                    j += 1
                self.toks.append(("name", t[i:j], col))
                i = j
            elif c in "+-*^()/":
                self.toks.append((c, c, col))
                i += 1
            else:
                raise InputError(f"unexpected character {c!r}", self.line, col)
        self.toks.append(("end", "", len(t) + 1))

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok


class _Parser:
    """Recursive descent for the operator grammar over a fixed signature."""

    def __init__(self, sig, text, line=1):
        self.sig = sig
        self.lex = _Lexer(text, line)
        self.line = line

    def parse(self):
        op = self._expr()
        kind, val, col = self.lex.peek()
        if kind != "end":
            raise InputError(f"unexpected {val!r}", self.line, col)
        return op

    def _expr(self):
        kind, _, _ = self.lex.peek()
        negate = False
        if kind in "+-":
            negate = self.lex.next()[0] == "-"
        op = self._term()
        if negate:
            op = -op
        while True:
            kind, _, _ = self.lex.peek()
            if kind == "+":
                self.lex.next()
                op = op + self._term()
            elif kind == "-":
                self.lex.next()
                op = op - self._term()
            else:
                return op

    def _term(self):
        op = self._factor()
        while True:
            kind, val, col = self.lex.peek()
            if kind == "*":
                self.lex.next()
                op = op * self._factor()
            elif kind in ("int", "name", "("):
                raise InputError("juxtaposition not allowed; use *", self.line, col)
            else:
                return op

    def _factor(self):
        base = self._atom()
        kind, _, _ = self.lex.peek()
        if kind == "^":
            self.lex.next()
            k2, val, col = self.lex.next()
            neg = False
            if k2 == "-":
                neg = True
                k2, val, col = self.lex.next()
            if k2 != "int":
                raise InputError("exponent must be an integer", self.line, col)
            if neg:
                raise InputError("negative exponents are not allowed", self.line, col)
            return base ** int(val)
        return base

    def _atom(self):
        kind, val, col = self.lex.next()
        if kind == "int":
            num = int(val)
            k2, v2, _ = self.lex.peek()
            if k2 == "/":
                self.lex.next()
                k3, v3, col3 = self.lex.next()
                if k3 != "int":
                    raise InputError("malformed rational", self.line, col3)
                if int(v3) == 0:
                    raise InputError("zero denominator", self.line, col3)
                return WeylOperator.constant(self.sig, QQ(num, int(v3)))
            return WeylOperator.constant(self.sig, num)
        if kind == "name":
            try:
                return WeylOperator.gen(self.sig, val)
            except Exception:
                raise InputError(f"unknown variable {val!r}", self.line, col) from None
        if kind == "(":
            op = self._expr()
            k2, _, col2 = self.lex.next()
            if k2 != ")":
                raise InputError("expected )", self.line, col2)
            return op
        raise InputError(f"unexpected {val or kind!r}", self.line, col)


def parse_operator(text, sig, line=1):
    """Parse an operator expression into normally ordered form."""
    return _Parser(sig, text, line).parse()


# ---------------------------------------------------------------------------
# problem files
# ---------------------------------------------------------------------------

class ProblemFile:
    """Declarative problem description.

    Keys: vars (ordered list), f, annihilator (list of operator expressions),
    lambda0 (rational p/q), k (integer), phi (family tag),
    assume_saturated (must be true to run anything past ann-fs).
    """

    def __init__(self, vars, f_text, ann_texts, lambda0=None, k=None, phi=None,
                 assume_saturated=False):
        self.vars = tuple(vars)
        self.sig = d_n(self.vars)
        self.f = parse_operator(f_text, self.sig)
        self.ann = [parse_operator(t, self.sig) for t in ann_texts]
        self.lambda0 = lambda0
        self.k = k
        self.phi = phi
        self.assume_saturated = assume_saturated

    @classmethod
    def load(cls, path):
        keys = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if ":" not in line:
                    raise InputError("expected 'key: value'", lineno)
                key, _, val = line.partition(":")
                keys[key.strip()] = (val.strip(), lineno)
        def take(name, default=None):
            return keys.pop(name, (default, None))[0]
        vars_field = take("vars")
        if not vars_field:
            raise InputError("missing 'vars'")
        f_text = take("f")
        if not f_text:
            raise InputError("missing 'f'")
        ann_field = take("annihilator")
        if not ann_field:
            raise InputError("missing 'annihilator'")
        lambda0 = take("lambda0")
        k = take("k")
        phi = take("phi")
        sat = (take("assume_saturated", "false") or "false").lower() in ("true", "yes", "1")
        if keys:
            name, (_, lineno) = next(iter(keys.items()))
            raise InputError(f"unknown key {name!r}", lineno)
        return cls([v.strip() for v in vars_field.split(",") if v.strip()],
                   f_text,
                   [t.strip() for t in ann_field.split(",") if t.strip()],
                   lambda0=_parse_rational(lambda0) if lambda0 else None,
                   k=int(k) if k is not None else None,
                   phi=phi or None,
                   assume_saturated=sat)

    def instance(self, strict=True):
        """strict commands require the saturation assertion; ann-fs runs
        without it (the result then annihilates f^s (x) u for the
        f-saturation of D_n/I)."""
        if strict and not self.assume_saturated:
            raise InputError("assume_saturated: true is required past ann-fs "
                             "(saturation is the caller's assertion)")
        return ProblemInstance.make(self.vars, self.f, self.ann,
                                    saturated=self.assume_saturated)


def _parse_rational(text):
    text = text.strip()
    neg = text.startswith("-")
    if neg:
        text = text[1:]
    if "/" in text:
        p, q = text.split("/", 1)
        val = QQ(int(p), int(q))
    else:
        val = QQ(int(text))
    return -val if neg else val


# ---------------------------------------------------------------------------
# result documents
# ---------------------------------------------------------------------------

def _canonical_strings(ideal):
    order = TermOrder.grevlex(ideal.sig)
    gens = ideal.basis()
    return [g.to_str(order) for g in gens]


def _emit(doc, args, wall):
    stats = last_gb_stats()
    doc["gb_stats"] = {
        "pairs_considered": stats.pairs_considered,
        "pairs_skipped": stats.pairs_skipped,
        "zero_reductions": stats.zero_reductions,
        "basis_size": stats.basis_size,
    }
    doc["version"] = __version__
    if getattr(args, "timings", False):
        doc["timing"] = {"total_s": round(wall, 3)}
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for key, val in doc.items():
            if key in ("command", "version", "gb_stats"):
                continue
            if isinstance(val, list):
                print(f"{key}:")
                for v in val:
                    print(f"  {v}")
            elif isinstance(val, dict):
                print(f"{key}:")
                for k2, v2 in val.items():
                    print(f"  {k2}: {v2}")
            else:
                print(f"{key}: {val}")
    print(f"[{doc['command']}] wall time {wall:.2f}s", file=sys.stderr)


def _deadline(args):
    return time.monotonic() + args.timeout if args.timeout else None


def _run_ann_fs(args, prob):
    inst = prob.instance(strict=False)
    ann = ann_fs(inst, deadline=_deadline(args))
    doc = {"command": "ann-fs", "stage": "ann-fs",
           "generators": _canonical_strings(ann)}
    if not prob.assume_saturated:
        doc["note"] = ("assume_saturated is false: the generators annihilate "
                       "f^s (x) u for the f-saturation of D_n/I")
    return doc


def _run_bfun(args, prob):
    inst = prob.instance()
    dl = _deadline(args)
    ann = ann_fs(inst, deadline=dl)
    b = bfunction(ann, inst.f, deadline=dl)
    return {"command": "bfun", "stage": "b-function",
            "bfunction": {"monic": b.poly.to_str(),
                          "factored": b.factored_str()}}


def _run_funceq(args, prob):
    inst = prob.instance()
    dl = _deadline(args)
    ann = ann_fs(inst, deadline=dl)
    b = bfunction(ann, inst.f, deadline=dl)
    eqn = functional_operator(ann, inst.f, b, deadline=dl)
    return {"command": "funceq", "stage": "functional-equation",
            "bfunction": {"monic": b.poly.to_str(), "factored": b.factored_str()},
            "P0": eqn.P0.to_str()}


def _run_laurent(args, prob):
    inst = prob.instance()
    lambda0 = args.lambda0 if args.lambda0 is not None else prob.lambda0
    k = args.k if args.k is not None else prob.k
    if lambda0 is None or k is None:
        raise InputError("laurent needs lambda0 and k (file keys or flags)")
    req = LaurentRequest(inst, lambda0, int(k))
    system = ann_laurent(req, deadline=_deadline(args))
    return {"command": "laurent", "stage": "laurent-annihilator",
            "lambda0": str(QQ(lambda0)), "k": int(k),
            "pole_order_bound": system.l, "shift_m": system.m,
            "b": system.b.factored_str(),
            "generators": _canonical_strings(system.ann_w)}


def _run_zeta_diff(args, prob):
    inst = prob.instance()
    ops = zeta_difference(inst, deadline=_deadline(args))
    doc = {"command": "zeta-diff", "stage": "zeta-difference",
           "difference_operators": [op.to_str() for op in ops]}
    g = difference_gcrd(ops)
    doc["gcrd"] = g.to_str()
    return doc


def _run_verify(args, prob):
    inst = prob.instance()
    dl = _deadline(args)
    ann = ann_fs(inst, deadline=dl)
    section = LogSection.fs(inst)
    sound = all(annihilates(g, section) for g in ann.basis())
    b = bfunction(ann, inst.f, deadline=dl)
    eqn = functional_operator(ann, inst.f, b, deadline=dl)
    lhs = apply_log_section(eqn.P0, LogSection.fs(inst, mult=inst.f))
    rhs = apply_log_section(b.as_operator(inst.sig_s), LogSection.fs(inst))
    funceq_ok = (lhs - rhs).is_zero()
    doc = {"command": "verify", "stage": "verify",
           "annihilator_sound": bool(sound),
           "functional_equation_holds": bool(funceq_ok),
           "bfunction": {"monic": b.poly.to_str(), "factored": b.factored_str()}}
    if prob.phi and len(prob.vars) <= 2:
        ops = zeta_difference(inst, deadline=dl)
        order = max(op.max_power for op in ops)
        lams = list(range(0, 7 + order))
        zv = numeric_zeta(inst.f, PhiSpec(prob.phi), lams, tol=args.tol, box=args.box)
        resid = residual_check(ops, list(zip(lams, zv.values)))
        doc["difference_operators"] = [op.to_str() for op in ops]
        doc["numeric_residual"] = resid
        doc["numeric_residual_ok"] = bool(resid <= args.tol)
    return doc


_COMMANDS = {
    "ann-fs": _run_ann_fs,
    "bfun": _run_bfun,
    "funceq": _run_funceq,
    "laurent": _run_laurent,
    "zeta-diff": _run_zeta_diff,
    "verify": _run_verify,
}


def build_parser():
    ap = argparse.ArgumentParser(
        prog="holozeta",
        description="Exact D-module computations for f_+^lambda phi and local zeta functions")
    ap.add_argument("--version", action="version", version=f"holozeta {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("problem", help="problem file")
        p.add_argument("--json", action="store_true", help="emit a JSON document")
        p.add_argument("--timings", action="store_true",
                       help="include wall-clock timing in the JSON document")
        p.add_argument("--timeout", type=float, default=None, metavar="SEC",
                       help="per-stage wall clock limit")
        p.add_argument("--lambda0", type=str, default=None,
                       help="expansion point (rational p/q)")
        p.add_argument("--k", type=int, default=None, help="Laurent index")
        p.add_argument("--box", type=float, default=12.0,
                       help="quadrature box half-width")
        p.add_argument("--tol", type=float, default=1e-6,
                       help="numeric residual tolerance")
    return ap


def run(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.lambda0 is not None:
        try:
            args.lambda0 = _parse_rational(args.lambda0)
        except ValueError as exc:
            print(f"input error: bad --lambda0: {exc}", file=sys.stderr)
            return 3
    t0 = time.monotonic()
    try:
        prob = ProblemFile.load(args.problem)
        doc = _COMMANDS[args.command](args, prob)
    except GBTimeout as exc:
        print(f"timeout: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    _emit(doc, args, time.monotonic() - t0)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
