"""Exact univariate polynomials and rational functions over Q.

Small self-contained layer used for b-functions, Taylor/series bookkeeping of
the Laurent-coefficient operators, and difference-operator coefficients.
Coefficients are stored densely, lowest degree first.
"""
from __future__ import annotations

import math

from .weyl_core import QQ, QQ0, QQ1, rational_content


class UPoly:
    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        c = [QQ(v) for v in coeffs]
        while c and not c[-1]:
            c.pop()
        self.c = tuple(c)

    # -- constructors --------------------------------------------------------
    @classmethod
    def zero(cls):
        return cls(())

    @classmethod
    def one(cls):
        return cls((1,))

    @classmethod
    def const(cls, v):
        return cls((v,))

    @classmethod
    def x(cls):
        return cls((0, 1))

    @classmethod
    def linear(cls, a0, a1=1):
        """a1*s + a0"""
        return cls((a0, a1))

    @classmethod
    def from_roots(cls, roots):
        p = cls.one()
        for r in roots:
            p = p * cls((-QQ(r), 1))
        return p

    # -- basics ----------------------------------------------------------------
    @property
    def degree(self):
        return len(self.c) - 1

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        if isinstance(other, UPoly):
            return self.c == other.c
        if isinstance(other, (int, type(QQ0))):
            return self.c == UPoly((other,)).c
        return NotImplemented

    def __hash__(self):
        return hash(self.c)

    def __getitem__(self, i):
        return self.c[i] if 0 <= i < len(self.c) else QQ0

    @property
    def lead(self):
        return self.c[-1] if self.c else QQ0

    def __add__(self, other):
        if isinstance(other, (int, type(QQ0))):
            other = UPoly((other,))
        n = max(len(self.c), len(other.c))
        return UPoly([self[i] + other[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return UPoly([-v for v in self.c])

    def __sub__(self, other):
        if isinstance(other, (int, type(QQ0))):
            other = UPoly((other,))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, type(QQ0))):
            return UPoly([v * QQ(other) for v in self.c])
        if not self.c or not other.c:
            return UPoly.zero()
        out = [QQ0] * (len(self.c) + len(other.c) - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(other.c):
                    out[i + j] += a * b
        return UPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e):
        out = UPoly.one()
        for _ in range(e):
            out = out * self
        return out

    def divmod(self, other):
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.c)
        q = [QQ0] * max(len(r) - len(other.c) + 1, 0)
        d = other.degree
        lc = other.lead
        while len(r) - 1 >= d and any(r):
            while r and not r[-1]:
                r.pop()
            if len(r) - 1 < d:
                break
            k = len(r) - 1 - d
            f = r[-1] / lc
            q[k] = f
            for i, b in enumerate(other.c):
                r[k + i] -= f * b
        return UPoly(q), UPoly(r)

    def __mod__(self, other):
        return self.divmod(other)[1]

    def exact_div(self, other):
        q, r = self.divmod(other)
        if r:
            raise ValueError("not an exact polynomial division")
        return q

    def gcd(self, other):
        a, b = self, other
        while b:
            a, b = b, a % b
        return a.monic() if a else a

    def monic(self):
        if not self.c:
            return self
        lc = self.lead
        return UPoly([v / lc for v in self.c])

    def content(self):
        return rational_content(self.c) if self.c else QQ0

    def primitive(self):
        """Integer-coefficient form with content 1 and positive lead."""
        if not self.c:
            return self
        cont = self.content()
        if self.lead < 0:
            cont = -cont
        return UPoly([v / cont for v in self.c])

    def eval(self, v):
        acc = QQ0 if isinstance(v, (int, type(QQ0))) else 0
        for a in reversed(self.c):
            acc = acc * v + a
        return acc

    def shift(self, a):
        """P(s) -> P(s + a)."""
        a = QQ(a)
        out = UPoly.zero()
        for e, c in enumerate(self.c):
            if not c:
                continue
            row = [c * math.comb(e, k) * a ** (e - k) for k in range(e + 1)]
            out = out + UPoly(row)
        return out

    def deriv(self):
        return UPoly([self.c[i] * i for i in range(1, len(self.c))])

    # -- root bookkeeping --------------------------------------------------------
    def root_multiplicity(self, r):
        r = QQ(r)
        m = 0
        p = self
        lin = UPoly((-r, 1))
        while p and not p.eval(r):
            p = p.exact_div(lin)
            m += 1
        return m

    def rational_roots(self):
        """All rational roots with multiplicities, plus the rootless cofactor.

        Candidates come from the divisors of the extreme coefficients of the
        primitive integer form; the cofactor is returned integer-primitive.
        """
        if not self.c:
            raise ValueError("zero polynomial has every root")
        p = self.primitive()
        roots = []
        # strip powers of s
        k = 0
        while not p.c[0]:
            p = UPoly(p.c[1:])
            k += 1
        if k:
            roots.append((QQ0, k))
        if p.degree >= 1:
            a0 = abs(int(p.c[0]))
            an = abs(int(p.lead))
            for num in _divisors(a0):
                for den in _divisors(an):
                    if math.gcd(num, den) != 1:
                        continue
                    for sgn in (1, -1):
                        r = QQ(sgn * num, den)
                        m = p.root_multiplicity(r)
                        if m:
                            roots.append((r, m))
                            for _ in range(m):
                                p = p.exact_div(UPoly((-r, 1)))
        roots.sort(key=lambda rm: rm[0])
        return roots, p.primitive()

    def integer_roots_max(self, bound=100000):
        """Largest nonnegative integer root, or None."""
        best = None
        p = self.primitive()
        if not p.c:
            raise ValueError("zero polynomial")
        k = 0
        while not p.c[k]:
            best = 0
            k += 1
        a0 = abs(int(p.c[k]))
        cands = set()
        if a0 <= 10 ** 12:
            cands.update(_divisors(a0))
        # Cauchy bound scan as a safety net for small bounds
        cauchy = 1 + max(abs(QQ(v) / p.lead) for v in p.c)
        if cauchy <= bound:
            cands.update(range(1, int(cauchy) + 2))
        elif a0 > 10 ** 12:
            raise ValueError("integer root search out of range")
        for r in sorted(cands):
            if not p.eval(QQ(r)):
                best = r if best is None else max(best, r)
        return best

    # -- printing ----------------------------------------------------------------
    def to_str(self, var="s", compact=False):
        if not self.c:
            return "0"
        parts = []
        for e in range(self.degree, -1, -1):
            c = self[e]
            if not c:
                continue
            if e == 0:
                body = _qs(abs(c))
            else:
                v = var if e == 1 else f"{var}^{e}"
                body = v if abs(c) == 1 else (f"{_qs(abs(c))}{v}" if compact
                                              else f"{_qs(abs(c))}*{v}")
            parts.append(("-" if c < 0 else "+", body))
        sign0, body0 = parts[0]
        joiner = "" if compact else " "
        out = ("-" if sign0 == "-" else "") + body0
        for sign, body in parts[1:]:
            out += f"{joiner}{sign}{joiner}{body}"
        return out

    def __repr__(self):
        return f"<UPoly {self.to_str()}>"


def _qs(c):
    n, d = int(c.numerator), int(c.denominator)
    return str(n) if d == 1 else f"{n}/{d}"


def _divisors(n):
    if n == 0:
        return [1]
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    return sorted(out)


def inverse_series(p, at, n):
    """First n Taylor coefficients of 1/p(s) at s = at; p(at) must be nonzero."""
    loc = p.shift(at)
    if not loc[0]:
        raise ValueError("pole of the inverse series at the expansion point")
    inv = [QQ1 / loc[0]]
    for r in range(1, n):
        acc = QQ0
        for i in range(1, r + 1):
            acc += loc[i] * inv[r - i]
        inv.append(-acc / loc[0])
    return inv


class RatFunc:
    """Rational function num/den over Q, gcd-reduced, den primitive positive."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if den is None:
            den = UPoly.one()
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            num, den = UPoly.zero(), UPoly.one()
        else:
            g = num.gcd(den)
            if g.degree > 0:
                num, den = num.exact_div(g), den.exact_div(g)
            lc = den.lead
            num = num * (QQ1 / lc)
            den = den * (QQ1 / lc)
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, p):
        return cls(p)

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        return isinstance(other, RatFunc) and self.num == other.num and self.den == other.den

    def __add__(self, other):
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other):
        return RatFunc(self.num * other.den - other.num * self.den, self.den * other.den)

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __mul__(self, other):
        return RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other):
        if not other:
            raise ZeroDivisionError
        return RatFunc(self.num * other.den, self.den * other.num)

    def shift(self, a):
        return RatFunc(self.num.shift(a), self.den.shift(a))

    def __repr__(self):
        if self.den == UPoly.one():
            return f"<RatFunc {self.num.to_str()}>"
        return f"<RatFunc ({self.num.to_str()})/({self.den.to_str()})>"
