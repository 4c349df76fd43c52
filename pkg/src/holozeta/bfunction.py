"""Generalized b-functions and functional-equation operators.

b is the monic generator of C[s] cap (Ann(f^s (x) u) + D_n[s] f), found by a
block elimination of the x/dx slots.  A functional operator P0 with
P0(s) f^(s+1) (x) u = b(s) f^s (x) u is recovered from an exact representation
b = sum a_i g_i + P0 f produced by the module engine.
"""
from __future__ import annotations

from dataclasses import dataclass

from .upoly import UPoly
from .weyl_core import (
    QQ,
    IdealPresentation,
    TermOrder,
    WeylOperator,
    represent,
    univariate_generator,
)


class NoBFunction(RuntimeError):
    """The elimination ideal met C[s] trivially (non-holonomic input)."""


@dataclass(frozen=True)
class BFunction:
    """Monic polynomial in s with its rational-root factorization.

    poly = nonrational_part * prod (s - root)^mult up to the monic scaling;
    nonrational_part is integer-primitive and has no rational roots.
    """

    poly: UPoly
    rational_roots: tuple
    nonrational_part: UPoly

    @classmethod
    def from_upoly(cls, p):
        if not p:
            raise NoBFunction("no b-function found")
        p = p.monic()
        roots, rest = p.rational_roots()
        return cls(p, tuple(roots), rest)

    def recompose(self):
        out = UPoly.from_roots([r for r, m in self.rational_roots for _ in range(m)])
        return (out * self.nonrational_part).monic()

    def multiplicity(self, root):
        root = QQ(root)
        for r, m in self.rational_roots:
            if r == root:
                return m
        return 0

    @property
    def degree(self):
        return self.poly.degree

    def as_operator(self, sig):
        """Embed into D_n[s] (sig must carry the extra s)."""
        op = WeylOperator.zero(sig)
        for e, c in enumerate(self.poly.c):
            if c:
                op.terms[sig.unit_mono("s", e)] = c
        return op

    def factored_str(self):
        """Integer-cleared factored display, e.g. (s+1)(6s+5)(6s+7).

        Equals poly up to a positive rational scalar.  Rational-root factors
        are printed as (q s - p) for the root p/q, sorted by (q, |p|, p);
        a nontrivial rootless cofactor is appended in its primitive form.
        """
        factors = []
        for r, m in self.rational_roots:
            p, q = int(r.numerator), int(r.denominator)
            if q == 1 and p == 0:
                body = "s"
            else:
                body = UPoly((-p, q)).to_str(compact=True)
            factors.append(((q, abs(p), p), body, m))
        factors.sort(key=lambda f: f[0])
        out = ""
        for _, body, m in factors:
            piece = f"({body})" if body != "s" else "s"
            out += piece + (f"^{m}" if m > 1 else "")
        if self.nonrational_part.degree > 0:
            out += f"({self.nonrational_part.to_str(compact=True)})"
        return out or "1"


@dataclass(frozen=True)
class FunctionalEquation:
    """P0(s) f^(s+m) (x) u = b(s) f^s (x) u; m = 1 for the basic equation."""

    b: BFunction
    P0: WeylOperator
    shift: int = 1

    def check(self, ann, f):
        """P0 * f^shift - b(s) must lie in the annihilator ideal."""
        sig_s = self.P0.sig
        fs = f.embed(sig_s) if f.sig != sig_s else f
        lhs = self.P0 * fs ** self.shift - self.b.as_operator(sig_s)
        return ann.contains(lhs)


def bfunction(ann, f, deadline=None):
    """Monic generator of C[s] cap (ann + D_n[s] f)."""
    sig_s = ann.sig
    fs = f.embed(sig_s) if f.sig != sig_s else f
    ideal = IdealPresentation.make(sig_s, list(ann.generators) + [fs])
    front = [n for n in sig_s.names if n != "s"]
    order = TermOrder.elimination(sig_s, front)
    gb = ideal.groebner(order, deadline, stage="b-function-elimination")
    s_slot = sig_s.slot("s")
    pure = [g for g in gb.cached_gb
            if all(not g.uses_slot(i) for i in range(sig_s.nslots) if i != s_slot)]
    b = univariate_generator(pure) if pure else UPoly.zero()
    if not b:
        raise NoBFunction("no b-function found (input not holonomic?)")
    return BFunction.from_upoly(b)


def functional_operator(ann, f, b, deadline=None):
    """A P0 with P0(s)(f^(s+1) (x) u) = b(s) f^s (x) u.

    Found as the f-cofactor of an exact representation of b(s) over
    ann.generators + [f]; the membership is guaranteed when b is (a multiple
    of) the b-function.
    """
    sig_s = ann.sig
    fs = f.embed(sig_s) if f.sig != sig_s else f
    gens = list(ann.generators) + [fs]
    target = b.as_operator(sig_s)
    cof = represent(target, gens, deadline=deadline, stage="functional-operator")
    if cof is None:
        raise ValueError("b(s) is not in ann + D_n[s] f")
    eqn = FunctionalEquation(b, cof[-1], 1)
    if not eqn.check(ann, fs):
        raise AssertionError("internal error: functional equation fails its invariant")
    return eqn


def shift_compose(eqn, m):
    """(P, b) with b(s) f^s = P(s) f^(s+m), P = P0(s) P0(s+1) ... P0(s+m-1)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    sig_s = eqn.P0.sig
    P = WeylOperator.one(sig_s)
    bpoly = UPoly.one()
    for j in range(m):
        P = P * eqn.P0.shift_extra("s", j)
        bpoly = bpoly * eqn.b.poly.shift(j)
    return FunctionalEquation(BFunction.from_upoly(bpoly), P, m)
