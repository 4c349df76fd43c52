"""Exact sparse operator arithmetic and Groebner bases in Weyl-type algebras.

The rings handled here are generated by commuting-pair blocks
(x_1, dx_1), ..., (x_n, dx_n), an optional pair (t, dt) and a tail of central
commutative generators.  The only nontrivial relations are dx_i x_i = x_i dx_i + 1
and dt t = t dt + 1; in the homogenized variant the 1 on the right becomes h^2
for a central generator h.  Elements are kept normally ordered (all x-type
exponents recorded before d-type ones in a single exponent vector), with
arbitrary-precision rational coefficients.

The Groebner engine works uniformly on free modules D^r via labelled monomials
(component, exponents...); plain operators are the rank-1 case.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

try:
    from gmpy2 import mpq as QQ
except ImportError:  # pragma: no cover - gmpy2 is an optional accelerator
    from fractions import Fraction as QQ

QQ0 = QQ(0)
QQ1 = QQ(1)


class SignatureMismatch(ValueError):
    """Operands built over different ring signatures."""


class NonHomogeneousInput(ValueError):
    """A weight-sensitive routine was fed non weight-homogeneous input."""


class GBTimeout(RuntimeError):
    """A Groebner computation exceeded its wall-clock deadline."""

    def __init__(self, stage, basis_size, pairs_left):
        super().__init__(
            f"Groebner basis timeout at stage {stage!r} "
            f"(basis size {basis_size}, {pairs_left} pairs left)")
        self.stage = stage
        self.basis_size = basis_size
        self.pairs_left = pairs_left


def _gcd_int(a, b):
    return math.gcd(int(a), int(b))


def rational_content(coeffs):
    """gcd of a nonempty collection of rationals, as a positive rational."""
    num = 0
    den = 1
    for c in coeffs:
        num = _gcd_int(num, c.numerator)
        den = den * int(c.denominator) // _gcd_int(den, c.denominator)
    return QQ(num, den)


# ---------------------------------------------------------------------------
# signatures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RingSignature:
    """Shape of a Weyl-type algebra: named x/dx pairs, optional (t, dt) pair,
    central commutative extras, optional homogenization slot h."""

    x_names: tuple
    has_t: bool = False
    extras: tuple = ()
    homogenized: bool = False

    def __post_init__(self):
        names = list(self.x_names)
        names += ["d" + x for x in self.x_names]
        if self.has_t:
            names += ["t", "dt"]
        names += list(self.extras)
        if self.homogenized:
            names.append("h")
        if len(set(names)) != len(names):
            raise SignatureMismatch(f"duplicate generator names in {names}")
        if "s" in self.extras and self.has_t:
            # s is identified with -dt*t only through the Mellin map, never
            # carried alongside (t, dt) as a ring element.
            raise SignatureMismatch("s cannot coexist with (t, dt)")
        if ("sigma" in self.extras) != ("tau_h" in self.extras):
            raise SignatureMismatch("sigma and tau_h only appear together")
        object.__setattr__(self, "_names", tuple(names))
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})
        n = len(self.x_names)
        pairs = [(i, n + i) for i in range(n)]
        if self.has_t:
            pairs.append((2 * n, 2 * n + 1))
        object.__setattr__(self, "_pairs", tuple(pairs))

    # -- layout ------------------------------------------------------------
    @property
    def n_x(self):
        return len(self.x_names)

    @property
    def names(self):
        return self._names

    @property
    def nslots(self):
        return len(self._names)

    @property
    def pairs(self):
        return self._pairs

    @property
    def h_slot(self):
        return self.nslots - 1 if self.homogenized else None

    def slot(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise SignatureMismatch(f"no generator {name!r} in {self._names}") from None

    def x_slot(self, i):
        return i

    def d_slot(self, i):
        return self.n_x + i

    @property
    def t_slot(self):
        if not self.has_t:
            raise SignatureMismatch("signature has no t")
        return 2 * self.n_x

    @property
    def dt_slot(self):
        return self.t_slot + 1

    # -- derived signatures --------------------------------------------------
    def with_extras(self, *names):
        return RingSignature(self.x_names, self.has_t, self.extras + tuple(names),
                             self.homogenized)

    def without_extras(self, *names):
        extras = tuple(e for e in self.extras if e not in names)
        return RingSignature(self.x_names, self.has_t, extras, self.homogenized)

    def homogenize(self):
        return RingSignature(self.x_names, self.has_t, self.extras, True)

    def dehomogenize(self):
        return RingSignature(self.x_names, self.has_t, self.extras, False)

    def zero_mono(self):
        return (0,) * self.nslots

    def unit_mono(self, name, exp=1):
        m = [0] * self.nslots
        m[self.slot(name)] = exp
        return tuple(m)


def d_n(x_names):
    return RingSignature(tuple(x_names))


def d_n_s(x_names):
    return RingSignature(tuple(x_names), extras=("s",))


def d_np1(x_names):
    return RingSignature(tuple(x_names), has_t=True)


def d_1():
    return RingSignature((), has_t=True)


# ---------------------------------------------------------------------------
# monomial multiplication (the Leibniz rewrite in closed form)
# ---------------------------------------------------------------------------

def _mono_mul(sig, A, B):
    """Normally ordered product of monomials A*B as [(mono, integer coeff)].

    Uses d^a x^b = sum_k C(a,k) C(b,k) k! x^(b-k) d^(a-k) (h^2k) per pair.
    """
    base = [a + b for a, b in zip(A, B)]
    active = []
    for xs, ds in sig._pairs:
        a = A[ds]
        b = B[xs]
        if a and b:
            active.append((xs, ds, a, b))
    if not active:
        return [(tuple(base), 1)]
    hs = sig.h_slot
    out = [(base, 1)]
    for xs, ds, a, b in active:
        nxt = []
        for mono, c in out:
            for k in range(min(a, b) + 1):
                cc = c * math.comb(a, k) * math.comb(b, k) * math.factorial(k)
                m2 = list(mono)
                m2[xs] -= k
                m2[ds] -= k
                if hs is not None:
                    m2[hs] += 2 * k
                nxt.append((m2, cc))
        out = nxt
    return [(tuple(m), c) for m, c in out]


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

class WeylOperator:
    """Sparse normally ordered element of a Weyl-type algebra.

    terms maps exponent tuples to nonzero rational coefficients.
    """

    __slots__ = ("sig", "terms")

    def __init__(self, sig, terms=None):
        self.sig = sig
        self.terms = {}
        if terms:
            for m, c in terms.items():
                if c:
                    self.terms[m] = QQ(c)

    # -- constructors --------------------------------------------------------
    @classmethod
    def zero(cls, sig):
        return cls(sig)

    @classmethod
    def constant(cls, sig, c):
        op = cls(sig)
        if c:
            op.terms[sig.zero_mono()] = QQ(c)
        return op

    @classmethod
    def one(cls, sig):
        return cls.constant(sig, 1)

    @classmethod
    def gen(cls, sig, name, exp=1):
        op = cls(sig)
        op.terms[sig.unit_mono(name, exp)] = QQ1
        return op

    def copy(self):
        op = WeylOperator(self.sig)
        op.terms = dict(self.terms)
        return op

    # -- basics ---------------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, WeylOperator):
            return self.sig == other.sig and self.terms == other.terms
        if isinstance(other, int):
            return self == WeylOperator.constant(self.sig, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.sig, frozenset(self.terms.items())))

    def _check(self, other):
        if self.sig != other.sig:
            raise SignatureMismatch(f"{self.sig} vs {other.sig}")

    def __add__(self, other):
        if isinstance(other, (int, type(QQ0))):
            other = WeylOperator.constant(self.sig, other)
        self._check(other)
        res = dict(self.terms)
        for m, c in other.terms.items():
            v = res.get(m, QQ0) + c
            if v:
                res[m] = v
            else:
                res.pop(m, None)
        out = WeylOperator(self.sig)
        out.terms = res
        return out

    __radd__ = __add__

    def __neg__(self):
        out = WeylOperator(self.sig)
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, type(QQ0))):
            other = WeylOperator.constant(self.sig, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = QQ(c)
        out = WeylOperator(self.sig)
        if c:
            out.terms = {m: cc * c for m, cc in self.terms.items()}
        return out

    def __mul__(self, other):
        if isinstance(other, (int, type(QQ0))):
            return self.scale(other)
        self._check(other)
        sig = self.sig
        res = {}
        for mA, cA in self.terms.items():
            for mB, cB in other.terms.items():
                c = cA * cB
                for m, k in _mono_mul(sig, mA, mB):
                    v = res.get(m, QQ0) + c * k
                    if v:
                        res[m] = v
                    else:
                        res.pop(m, None)
        out = WeylOperator(sig)
        out.terms = res
        return out

    def __rmul__(self, other):
        if isinstance(other, (int, type(QQ0))):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, e):
        if e < 0:
            raise ValueError("negative operator power")
        out = WeylOperator.one(self.sig)
        for _ in range(e):
            out = out * self
        return out

    # -- structure queries ----------------------------------------------------
    def total_degree(self):
        return max((sum(m) for m in self.terms), default=-1)

    def order(self):
        """Max total degree in the d-type slots (dx's and dt)."""
        slots = [self.sig.d_slot(i) for i in range(self.sig.n_x)]
        if self.sig.has_t:
            slots.append(self.sig.dt_slot)
        return max((sum(m[i] for i in slots) for m in self.terms), default=-1)

    def weights(self, row):
        return {sum(w * e for w, e in zip(row, m)) for m in self.terms}

    def is_weight_homogeneous(self, row):
        return len(self.weights(row)) <= 1

    def max_weight(self, row):
        return max(sum(w * e for w, e in zip(row, m)) for m in self.terms)

    def initial_form(self, row):
        """Sum of the terms of maximal weight under row."""
        if not self.terms:
            return self.copy()
        top = self.max_weight(row)
        out = WeylOperator(self.sig)
        out.terms = {m: c for m, c in self.terms.items()
                     if sum(w * e for w, e in zip(row, m)) == top}
        return out

    def uses_slot(self, i):
        return any(m[i] for m in self.terms)

    def lm(self, order):
        return max(self.terms, key=order.key)

    def lc(self, order):
        return self.terms[self.lm(order)]

    def sorted_terms(self, order):
        return sorted(self.terms.items(), key=lambda mc: order.key(mc[0]), reverse=True)

    # -- slot surgery -----------------------------------------------------------
    def embed(self, new_sig):
        """Map into a larger signature by generator name."""
        mapping = [new_sig.slot(n) for n in self.sig.names]
        out = WeylOperator(new_sig)
        for m, c in self.terms.items():
            m2 = [0] * new_sig.nslots
            for i, e in enumerate(m):
                if e:
                    m2[mapping[i]] = e
            out.terms[tuple(m2)] = c
        return out

    def strip_slots(self, names, new_sig=None):
        """Remove generators (which must not occur) from the signature."""
        drop = {self.sig.slot(n) for n in names}
        if new_sig is None:
            new_sig = self.sig.without_extras(*names)
        keep = [i for i in range(self.sig.nslots) if i not in drop]
        out = WeylOperator(new_sig)
        for m, c in self.terms.items():
            if any(m[i] for i in drop):
                raise SignatureMismatch(f"operator uses stripped generator(s) {names}")
            out.terms[tuple(m[i] for i in keep)] = c
        return out

    def subs_extra(self, name, value, new_sig=None):
        """Substitute a rational value for a central extra and drop its slot."""
        i = self.sig.slot(name)
        value = QQ(value)
        if new_sig is None:
            new_sig = self.sig.without_extras(name)
        keep = [j for j in range(self.sig.nslots) if j != i]
        res = {}
        for m, c in self.terms.items():
            c2 = c * value ** m[i]
            m2 = tuple(m[j] for j in keep)
            v = res.get(m2, QQ0) + c2
            if v:
                res[m2] = v
            else:
                res.pop(m2, None)
        out = WeylOperator(new_sig)
        out.terms = res
        return out

    def shift_extra(self, name, a):
        """P(..., v, ...) -> P(..., v + a, ...) for a central extra v."""
        i = self.sig.slot(name)
        a = QQ(a)
        res = {}
        for m, c in self.terms.items():
            e = m[i]
            for k in range(e + 1):
                c2 = c * math.comb(e, k) * a ** (e - k)
                if not c2:
                    continue
                m2 = m[:i] + (k,) + m[i + 1:]
                v = res.get(m2, QQ0) + c2
                if v:
                    res[m2] = v
                else:
                    res.pop(m2, None)
        out = WeylOperator(self.sig)
        out.terms = res
        return out

    def deriv_extra(self, name):
        """Formal derivative with respect to a central extra."""
        i = self.sig.slot(name)
        out = WeylOperator(self.sig)
        for m, c in self.terms.items():
            e = m[i]
            if e:
                m2 = m[:i] + (e - 1,) + m[i + 1:]
                out.terms[m2] = out.terms.get(m2, QQ0) + c * e
        out.terms = {m: c for m, c in out.terms.items() if c}
        return out

    def x_derivative(self, i):
        """Commutative d/dx_i; requires a pure polynomial in the x's/extras."""
        s = self.sig.x_slot(i)
        out = WeylOperator(self.sig)
        for m, c in self.terms.items():
            e = m[s]
            if e:
                m2 = m[:s] + (e - 1,) + m[s + 1:]
                out.terms[m2] = out.terms.get(m2, QQ0) + c * e
        out.terms = {m: c for m, c in out.terms.items() if c}
        return out

    def coeff_of_extra_power(self, name, e):
        """Operator coefficient of (extra)^e, with the extra slot removed."""
        i = self.sig.slot(name)
        new_sig = self.sig.without_extras(name)
        keep = [j for j in range(self.sig.nslots) if j != i]
        out = WeylOperator(new_sig)
        for m, c in self.terms.items():
            if m[i] == e:
                out.terms[tuple(m[j] for j in keep)] = c
        return out

    def max_extra_degree(self, name):
        i = self.sig.slot(name)
        return max((m[i] for m in self.terms), default=-1)

    def eval_point(self, values):
        """Evaluate a commutative operator (no d-slots) at a point.

        values maps generator name -> number; supports floats/mpf/QQ.
        """
        total = 0
        for m, c in self.terms.items():
            v = c
            for i, e in enumerate(m):
                if e:
                    name = self.sig.names[i]
                    v = v * values[name] ** e
            total = total + v
        return total

    # -- printing ---------------------------------------------------------------
    def to_str(self, order=None):
        if not self.terms:
            return "0"
        if order is None:
            order = TermOrder.grevlex(self.sig)
        names = self.sig.names
        parts = []
        for m, c in self.sorted_terms(order):
            factors = []
            for i, e in enumerate(m):
                if e == 1:
                    factors.append(names[i])
                elif e:
                    factors.append(f"{names[i]}^{e}")
            if not factors:
                body = _q_str(abs(c))
            elif abs(c) == 1:
                body = "*".join(factors)
            else:
                body = "*".join([_q_str(abs(c))] + factors)
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"<WeylOperator {self.to_str()}>"


def _q_str(c):
    n, d = int(c.numerator), int(c.denominator)
    return str(n) if d == 1 else f"{n}/{d}"


# ---------------------------------------------------------------------------
# term orders
# ---------------------------------------------------------------------------

class TermOrder:
    """Weight rows compared first, then block-wise graded reverse lex.

    blocks is an ordered cover of the slots; slots missing from the given
    blocks are appended as a final block.  Orders with a negative entry in
    some weight row are only admissible on weight-homogeneous input; the
    Groebner driver enforces this.
    """

    def __init__(self, sig, blocks=None, weight_rows=()):
        self.sig = sig
        rows = []
        for row in weight_rows:
            if isinstance(row, dict):
                vec = [0] * sig.nslots
                for name, w in row.items():
                    vec[sig.slot(name)] = w
                rows.append(tuple(vec))
            else:
                rows.append(tuple(row))
        self.weight_rows = tuple(rows)
        blk = []
        seen = set()
        for b in blocks or ():
            ids = tuple(sig.slot(n) if isinstance(n, str) else n for n in b)
            blk.append(ids)
            seen.update(ids)
        rest = tuple(i for i in range(sig.nslots) if i not in seen)
        if rest:
            blk.append(rest)
        self.blocks = tuple(blk)

    @classmethod
    def grevlex(cls, sig):
        return cls(sig)

    @classmethod
    def elimination(cls, sig, front):
        """Block order eliminating the named generators."""
        return cls(sig, blocks=[tuple(front)])

    @property
    def has_negative_row(self):
        return any(w < 0 for row in self.weight_rows for w in row)

    def __eq__(self, other):
        return (isinstance(other, TermOrder) and self.sig == other.sig
                and self.weight_rows == other.weight_rows and self.blocks == other.blocks)

    def __hash__(self):
        return hash((self.sig, self.weight_rows, self.blocks))

    def key(self, mono):
        parts = []
        for row in self.weight_rows:
            parts.append(sum(w * e for w, e in zip(row, mono)))
        for blk in self.blocks:
            parts.append(sum(mono[i] for i in blk))
            parts.extend(-mono[i] for i in reversed(blk))
        return tuple(parts)


class ModuleOrder:
    """Extension of a TermOrder to labelled monomials (component, mono).

    position "tp" = term over position, "pt" = position over term.  top_comps,
    when given with "pt", lists components that dominate all others (used for
    component elimination).
    """

    def __init__(self, term_order, position="tp", top_comps=None):
        self.term_order = term_order
        self.position = position
        self.top_comps = frozenset(top_comps) if top_comps is not None else None

    def __eq__(self, other):
        return (isinstance(other, ModuleOrder) and self.term_order == other.term_order
                and self.position == other.position and self.top_comps == other.top_comps)

    def __hash__(self):
        return hash((self.term_order, self.position, self.top_comps))

    def key(self, lab):
        comp = lab[0]
        mono = lab[1:]
        tkey = self.term_order.key(mono)
        if self.position == "tp":
            return tkey + (-comp,)
        if self.top_comps is not None:
            lead = 1 if comp in self.top_comps else 0
            return (lead, -comp) + tkey
        return (-comp,) + tkey

    @property
    def has_negative_row(self):
        return self.term_order.has_negative_row


# ---------------------------------------------------------------------------
# division and Buchberger on packed labelled monomials
#
# Inside the engine a monomial is a single integer with 16 bits per slot
# (low slot first); a labelled monomial is (component, packed).  Monomial
# product without commutation corrections is then one integer addition, and
# divisibility is a subtraction plus a guard-bit test.
# ---------------------------------------------------------------------------

_PACK_BITS = 16
_PACK_MAX = (1 << (_PACK_BITS - 1)) - 1


class _Pack:
    __slots__ = ("nslots", "shifts", "guard", "dmask", "pairs", "h_shift")

    def __init__(self, sig):
        n = sig.nslots
        self.nslots = n
        self.shifts = tuple(i * _PACK_BITS for i in range(n))
        self.guard = sum(1 << (i * _PACK_BITS + _PACK_BITS - 1) for i in range(n))
        mask = (1 << _PACK_BITS) - 1
        dm = 0
        prs = []
        for xs, ds in sig._pairs:
            dm |= mask << (ds * _PACK_BITS)
            prs.append((xs * _PACK_BITS, ds * _PACK_BITS))
        self.dmask = dm
        self.pairs = tuple(prs)
        self.h_shift = sig.h_slot * _PACK_BITS if sig.h_slot is not None else None


_PACK_CACHE = {}


def _get_pack(sig):
    pk = _PACK_CACHE.get(sig)
    if pk is None:
        pk = _PACK_CACHE[sig] = _Pack(sig)
    return pk


def _pack(pk, mono):
    out = 0
    for e, sh in zip(mono, pk.shifts):
        if e > _PACK_MAX:
            raise OverflowError("exponent too large for packed monomials")
        out += e << sh
    return out


def _unpack(pk, packed):
    return tuple((packed >> sh) & 0x7FFF for sh in pk.shifts)


def _pdeg(pk, packed):
    total = 0
    for sh in pk.shifts:
        total += (packed >> sh) & 0x7FFF
    return total


class _Red:
    __slots__ = ("lm", "lc", "terms", "sugar", "key")

    def __init__(self, terms, keyf, pk):
        self.terms = tuple(terms.items())
        self.lm = max(terms, key=keyf)
        self.lc = terms[self.lm]
        self.key = keyf(self.lm)
        self.sugar = max(_pdeg(pk, lab[1]) for lab in terms)


def _neg_key(key):
    return tuple(-v for v in key)


def _mono_mul_packed(pk, A, B):
    """Normally ordered product of packed monomials as ((packed, int), ...)."""
    base = A + B
    inter = None
    for xsh, dsh in pk.pairs:
        a = (A >> dsh) & 0x7FFF
        if a:
            b = (B >> xsh) & 0x7FFF
            if b:
                if inter is None:
                    inter = []
                inter.append((xsh, dsh, a, b))
    if inter is None:
        return ((base, 1),)
    hs = pk.h_shift
    out = [(base, 1)]
    for xsh, dsh, a, b in inter:
        nxt = []
        for m, c in out:
            for k in range(min(a, b) + 1):
                cc = c * math.comb(a, k) * math.comb(b, k) * math.factorial(k)
                m2 = m - (k << xsh) - (k << dsh)
                if hs is not None:
                    m2 += (2 * k) << hs
                nxt.append((m2, cc))
        out = nxt
    return out


def _term_mul_into(pk, res, coef, quot, terms, inserted=None):
    """res += coef * (quot (x) each labelled term), in place.

    terms is a sequence of (lab, coeff); inserted (when given) collects labels
    that were newly created (updates of existing entries are not reported).
    """
    get = res.get
    if quot & pk.dmask == 0:
        # no derivation exponents on the left: plain exponent addition
        for lab, c in terms:
            lab2 = (lab[0], lab[1] + quot)
            old = get(lab2)
            if old is None:
                res[lab2] = coef * c
                if inserted is not None:
                    inserted.append(lab2)
            else:
                v = old + coef * c
                if v:
                    res[lab2] = v
                else:
                    del res[lab2]
        return
    for lab, c in terms:
        comp = lab[0]
        cc = coef * c
        for m2, k in _mono_mul_packed(pk, quot, lab[1]):
            lab2 = (comp, m2)
            old = get(lab2)
            if old is None:
                res[lab2] = cc * k
                if inserted is not None:
                    inserted.append(lab2)
            else:
                v = old + cc * k
                if v:
                    res[lab2] = v
                else:
                    del res[lab2]


def _nf(p, reds, pk, keyf, track=False, sparsest=False):
    """Left normal form of a packed labelled-term dict against reducers.

    Returns (remainder dict, cofactors), cofactors[i] a packed-mono -> coeff
    dict with p = sum_i cofactor_i * reds_i + remainder.  The reducer is the
    first match in listing order, or the one with fewest terms when sparsest
    is set (less fill-in during basis completion; both are deterministic).
    """
    work = dict(p)
    rem = {}
    cof = [dict() for _ in reds] if track else None
    guard = pk.guard
    ncache = {}

    def nkey(lab):
        k = ncache.get(lab)
        if k is None:
            k = ncache[lab] = _neg_key(keyf(lab))
        return k

    heap = [(nkey(lab), lab) for lab in work]
    heapq.heapify(heap)
    touched = []
    while heap:
        _, lab = heapq.heappop(heap)
        c = work.get(lab)
        if not c:
            continue
        comp, m = lab
        red = None
        quot = 0
        idx = -1
        best = None
        for i, r in enumerate(reds):
            rlm = r.lm
            if rlm[0] == comp:
                d = m - rlm[1]
                if d >= 0 and not (d & guard):
                    if not sparsest:
                        red, quot, idx = r, d, i
                        break
                    size = len(r.terms)
                    if best is None or size < best:
                        red, quot, idx, best = r, d, i, size
        if red is None:
            rem[lab] = c
            del work[lab]
            continue
        coef = c / red.lc
        touched.clear()
        _term_mul_into(pk, work, -coef, quot, red.terms, touched)
        push = heapq.heappush
        for lab2 in touched:
            if lab2 != lab:
                push(heap, (nkey(lab2), lab2))
        if lab in work:  # cancellation is exact; the leading term must go
            raise AssertionError("leading term failed to cancel")
        if track:
            dct = cof[idx]
            dct[quot] = dct.get(quot, QQ0) + coef
    return rem, cof


def _primitive(terms, keyf):
    """Scale so coefficients are coprime integers, leading one positive."""
    if not terms:
        return terms
    cont = rational_content(terms.values())
    lead = max(terms, key=keyf)
    if terms[lead] < 0:
        cont = -cont
    return {m: c / cont for m, c in terms.items()}


def _monic(terms, keyf):
    if not terms:
        return terms
    lc = terms[max(terms, key=keyf)]
    return {m: c / lc for m, c in terms.items()}


@dataclass
class GBStats:
    pairs_considered: int = 0
    pairs_skipped: int = 0
    zero_reductions: int = 0
    basis_size: int = 0


_LAST_STATS = GBStats()


def last_gb_stats():
    return _LAST_STATS


def _check_weight_admissibility(gens, order):
    """Negative-weight orders are only run on graded input.

    Acceptable gradings: total degree (the Bernstein-homogenized setting) or
    weight-homogeneity with respect to every negative row.  Either keeps the
    division loop inside finite graded pieces, which restores termination.
    """
    term_order = order.term_order if isinstance(order, ModuleOrder) else order
    if not term_order.has_negative_row:
        return
    def total_graded(g):
        return len({sum(m[1:]) for m in g}) <= 1
    for g in gens:
        if total_graded(g):
            continue
        for row in term_order.weight_rows:
            if all(w >= 0 for w in row):
                continue
            ws = {sum(w * e for w, e in zip(row, m[1:])) for m in g}
            if len(ws) > 1:
                raise NonHomogeneousInput(
                    "negative-weight order requires graded input; "
                    f"offending weights {sorted(ws)}")


def _make_keyf(order, pk):
    """Order key on packed labelled monomials (decode, then the tuple key)."""
    okey = order.key
    shifts = pk.shifts

    def keyf(lab):
        packed = lab[1]
        return okey((lab[0],) + tuple((packed >> sh) & 0x7FFF for sh in shifts))

    return keyf


def groebner_engine(gens, sig, order, deadline=None, stage="groebner",
                    pair_components=None):
    """Reduced monic left Groebner basis of labelled-term dicts.

    Input/output dicts are keyed by (component,) + exponent-tuple; internally
    monomials are packed integers.  Deterministic: sugar-then-lcm pair
    selection, first-match reduction, final basis sorted by leading monomial.
    When pair_components is given, S-pairs are only formed between elements
    whose leading components lie in that set; the other components ride along
    as exact payload (used for representation tracking, where completeness
    is only needed in front).
    """
    global _LAST_STATS
    stats = GBStats()
    _LAST_STATS = stats
    _check_weight_admissibility(gens, order)
    pk = _get_pack(sig)
    keyf = _make_keyf(order, pk)
    guard = pk.guard

    basis = []
    for g in gens:
        g = {(m[0], _pack(pk, m[1:])): QQ(c) for m, c in g.items() if c}
        if g:
            basis.append(_Red(_primitive(g, keyf), keyf, pk))
    basis.sort(key=lambda r: r.key)

    def lcm_of(a, b):
        am, bm = a.lm[1], b.lm[1]
        out = 0
        for sh in pk.shifts:
            out += max((am >> sh) & 0x7FFF, (bm >> sh) & 0x7FFF) << sh
        return (a.lm[0], out)

    pairs = []
    def push_pairs(j):
        rj = basis[j]
        if pair_components is not None and rj.lm[0] not in pair_components:
            return
        for i in range(j):
            ri = basis[i]
            if ri.lm[0] != rj.lm[0]:
                continue
            if pair_components is not None and ri.lm[0] not in pair_components:
                continue
            l = lcm_of(ri, rj)
            dl = _pdeg(pk, l[1])
            sugar = max(ri.sugar + dl - _pdeg(pk, ri.lm[1]),
                        rj.sugar + dl - _pdeg(pk, rj.lm[1]))
            heapq.heappush(pairs, (sugar, keyf(l), i, j, l))

    for j in range(len(basis)):
        push_pairs(j)

    while pairs:
        if deadline is not None and time.monotonic() > deadline:
            raise GBTimeout(stage, len(basis), len(pairs))
        sugar, lkey, i, j, l = heapq.heappop(pairs)
        stats.pairs_considered += 1
        fi, fj = basis[i], basis[j]
        # chain criterion, stateless proper-divisor form
        skip = False
        lm_comp, lm_mono = l
        for k, fk in enumerate(basis):
            if k == i or k == j:
                continue
            klm = fk.lm
            if klm[0] == lm_comp:
                d = lm_mono - klm[1]
                if d >= 0 and not (d & guard):
                    if lcm_of(fi, fk) != l and lcm_of(fj, fk) != l:
                        skip = True
                        break
        if skip:
            stats.pairs_skipped += 1
            continue
        s = {}
        _term_mul_into(pk, s, QQ1 / fi.lc, lm_mono - fi.lm[1], fi.terms)
        _term_mul_into(pk, s, -(QQ1 / fj.lc), lm_mono - fj.lm[1], fj.terms)
        rem, _ = _nf(s, basis, pk, keyf, sparsest=True)
        if rem:
            basis.append(_Red(_primitive(rem, keyf), keyf, pk))
            push_pairs(len(basis) - 1)
        else:
            stats.zero_reductions += 1

    # minimalize
    basis.sort(key=lambda r: r.key)
    kept = []
    for r in basis:
        ok = True
        for k in kept:
            if k.lm[0] == r.lm[0]:
                d = r.lm[1] - k.lm[1]
                if d >= 0 and not (d & guard):
                    ok = False
                    break
        if ok:
            kept.append(r)
    # tail-reduce each against the others
    reduced = []
    for idx, r in enumerate(kept):
        others = kept[:idx] + kept[idx + 1:]
        rem, _ = _nf(dict(r.terms), others, pk, keyf) if others else (dict(r.terms), None)
        reduced.append(_monic(rem, keyf))
    reduced.sort(key=lambda t: keyf(max(t, key=keyf)))
    stats.basis_size = len(reduced)
    return [{(lab[0],) + _unpack(pk, lab[1]): c for lab, c in t.items()}
            for t in reduced]


# ---------------------------------------------------------------------------
# operator-level wrappers
# ---------------------------------------------------------------------------

def _to_lab(op):
    return {(0,) + m: c for m, c in op.terms.items()}


def _from_lab(lab, sig):
    out = WeylOperator(sig)
    out.terms = {m[1:]: c for m, c in lab.items()}
    return out


def _vec_to_lab(vec):
    lab = {}
    for comp, op in enumerate(vec):
        for m, c in op.terms.items():
            lab[(comp,) + m] = c
    return lab


def _lab_to_vec(lab, sig, rank):
    vec = [WeylOperator(sig) for _ in range(rank)]
    for m, c in lab.items():
        vec[m[0]].terms[m[1:]] = c
    return tuple(vec)


def _nf_ops(p_lab, gen_labs, sig, morder, track=False):
    """Normal form on tuple-labelled dicts via the packed engine."""
    pk = _get_pack(sig)
    keyf = _make_keyf(morder, pk)
    reds = [_Red({(m[0], _pack(pk, m[1:])): c for m, c in g.items()}, keyf, pk)
            for g in gen_labs]
    packed_p = {(m[0], _pack(pk, m[1:])): c for m, c in p_lab.items()}
    rem, cof = _nf(packed_p, reds, pk, keyf, track=track)
    rem_t = {(lab[0],) + _unpack(pk, lab[1]): c for lab, c in rem.items()}
    if not track:
        return rem_t, None
    cof_t = [{_unpack(pk, m): c for m, c in d.items()} for d in cof]
    return rem_t, cof_t


def normal_form(p, gens, order=None, track_cofactors=False):
    """Left division remainder of p by gens; optionally the cofactors too.

    p = sum_i cofactor_i * gens_i + remainder, no remainder term divisible by
    a leading monomial of gens.
    """
    if not gens:
        raise ValueError("empty divisor list")
    sig = p.sig
    for g in gens:
        if g.sig != sig:
            raise SignatureMismatch("normal_form operands differ in signature")
    order = order or TermOrder.grevlex(sig)
    morder = ModuleOrder(order)
    rem, cof = _nf_ops(_to_lab(p), [_to_lab(g) for g in gens if g.terms],
                       sig, morder, track=track_cofactors)
    r = _from_lab(rem, sig)
    if not track_cofactors:
        return r, None
    cofactors = []
    i = 0
    for g in gens:
        if g.terms:
            d = cof[i]
            i += 1
            op = WeylOperator(sig)
            op.terms = {m: c for m, c in d.items() if c}
            cofactors.append(op)
        else:
            cofactors.append(WeylOperator.zero(sig))
    return r, cofactors


@dataclass(frozen=True)
class IdealPresentation:
    """Left ideal given by generators, with an optional cached reduced GB."""

    sig: RingSignature
    generators: tuple
    cached_gb: tuple = None
    cached_order: TermOrder = None

    @classmethod
    def make(cls, sig, gens):
        return cls(sig, tuple(gens))

    def groebner(self, order=None, deadline=None, stage="groebner"):
        order = order or TermOrder.grevlex(self.sig)
        if self.cached_gb is not None and self.cached_order == order:
            return self
        morder = ModuleOrder(order)
        basis = groebner_engine([_to_lab(g) for g in self.generators],
                                self.sig, morder, deadline, stage)
        ops = tuple(_from_lab(b, self.sig) for b in basis)
        return IdealPresentation(self.sig, self.generators, ops, order)

    def basis(self, order=None, deadline=None, stage="groebner"):
        return self.groebner(order, deadline, stage).cached_gb

    def normal_form(self, p, track_cofactors=False):
        gb = self.groebner(self.cached_order)
        if not gb.cached_gb:           # zero ideal
            return (p.copy(), []) if track_cofactors else (p.copy(), None)
        return normal_form(p, list(gb.cached_gb), gb.cached_order, track_cofactors)

    def contains(self, p):
        return self.normal_form(p)[0].is_zero()

    def is_unit(self):
        gb = self.basis()
        return len(gb) == 1 and gb[0] == WeylOperator.one(self.sig)

    def same_ideal(self, other, order=None):
        order = order or TermOrder.grevlex(self.sig)
        return self.groebner(order).cached_gb == other.groebner(order).cached_gb


@dataclass(frozen=True)
class SubmodulePresentation:
    """Left submodule of D^rank given by generating vectors of operators."""

    rank: int
    sig: RingSignature
    generators: tuple          # tuple of length-rank tuples of WeylOperator
    cached_gb: tuple = None
    cached_order: ModuleOrder = None

    @classmethod
    def make(cls, rank, sig, gens):
        gens = tuple(tuple(v) for v in gens)
        for v in gens:
            if len(v) != rank:
                raise ValueError(f"generator vector of length {len(v)} != rank {rank}")
        return cls(rank, sig, gens)

    def groebner(self, order=None, deadline=None, stage="module-groebner"):
        order = order or ModuleOrder(TermOrder.grevlex(self.sig))
        if self.cached_gb is not None and self.cached_order == order:
            return self
        basis = groebner_engine([_vec_to_lab(v) for v in self.generators],
                                self.sig, order, deadline, stage)
        vecs = tuple(_lab_to_vec(b, self.sig, self.rank) for b in basis)
        return SubmodulePresentation(self.rank, self.sig, self.generators, vecs, order)

    def contains(self, vec, order=None):
        gb = self.groebner(order or self.cached_order)
        gen_labs = [_vec_to_lab(v) for v in gb.cached_gb]
        if not gen_labs:
            return all(op.is_zero() for op in vec)
        rem, _ = _nf_ops(_vec_to_lab(vec), gen_labs, self.sig, gb.cached_order)
        return not rem


def eliminate(ideal, kill, deadline=None, stage="elimination"):
    """Intersect an ideal with the subalgebra omitting the named generators.

    The named generators must be central extras (the only case needed here);
    the result lives in the reduced signature.
    """
    kill = tuple(kill)
    order = TermOrder.elimination(ideal.sig, kill)
    gb = ideal.groebner(order, deadline, stage)
    slots = [ideal.sig.slot(n) for n in kill]
    new_sig = ideal.sig.without_extras(*kill)
    kept = [g.strip_slots(kill, new_sig) for g in gb.cached_gb
            if not any(g.uses_slot(i) for i in slots)]
    inner = TermOrder.grevlex(new_sig)
    return IdealPresentation(new_sig, tuple(kept), tuple(kept), inner)


def colon_kernel(vec, module, deadline=None, stage="colon"):
    """{P : P * vec in module}, via the augmented module D(1, vec) + (0, J)."""
    rank = module.rank
    if len(vec) != rank:
        raise ValueError("vector length does not match module rank")
    sig = module.sig
    aug = []
    one = (WeylOperator.one(sig),) + tuple(vec)
    aug.append(one)
    zero = WeylOperator.zero(sig)
    for g in module.generators:
        aug.append((zero,) + tuple(g))
    order = ModuleOrder(TermOrder.grevlex(sig), position="pt",
                        top_comps=range(1, rank + 1))
    pres = SubmodulePresentation.make(rank + 1, sig, aug)
    gb = pres.groebner(order, deadline, stage)
    gens = [v[0] for v in gb.cached_gb if all(op.is_zero() for op in v[1:])]
    out = IdealPresentation.make(sig, gens)
    return out.groebner(TermOrder.grevlex(sig), deadline, stage)


def component_zero_ideal(module, comp=0, deadline=None, stage="component-colon"):
    """{P : P e_comp in module} for a unit vector, by component elimination."""
    sig = module.sig
    others = [c for c in range(module.rank) if c != comp]
    order = ModuleOrder(TermOrder.grevlex(sig), position="pt", top_comps=others)
    gb = module.groebner(order, deadline, stage)
    gens = [v[comp] for v in gb.cached_gb
            if all(v[c].is_zero() for c in others)]
    out = IdealPresentation.make(sig, gens)
    return out.groebner(TermOrder.grevlex(sig), deadline, stage)


def represent(p, gens, deadline=None, stage="represent"):
    """Cofactors a_i with p = sum a_i gens_i, or None if p is not a member.

    Extended Buchberger: a Groebner basis of the ideal is completed in the
    leading component of {(g_i, e_i)} while the unit-vector payload records
    exact representations; the tail of the normal form of (p, 0, ..., 0)
    against the front-headed elements is minus a representation of p.
    """
    sig = p.sig
    k = len(gens)
    aug = []
    for i, g in enumerate(gens):
        lab = {(0,) + m: c for m, c in g.terms.items()}
        lab[(1 + i,) + sig.zero_mono()] = QQ1
        aug.append(lab)
    order = ModuleOrder(TermOrder.grevlex(sig), position="pt", top_comps=[0])
    keyf = order.key
    basis = groebner_engine(aug, sig, order, deadline, stage, pair_components={0})
    front = [b for b in basis if max(b, key=keyf)[0] == 0]
    rem, _ = _nf_ops(_to_lab(p), front, sig, order)
    vec = _lab_to_vec(rem, sig, k + 1)
    if not vec[0].is_zero():
        return None
    return [-op for op in vec[1:]]


def univariate_generator(gens, var="s"):
    """Monic gcd of operators that are commutative polynomials in one extra."""
    from .upoly import UPoly
    polys = []
    for g in gens:
        slot = g.sig.slot(var)
        coeffs = {}
        for m, c in g.terms.items():
            if any(e for i, e in enumerate(m) if i != slot and e):
                raise ValueError(f"generator {g!r} is not a polynomial in {var}")
            coeffs[m[slot]] = c
        if coeffs:
            lst = [QQ0] * (max(coeffs) + 1)
            for e, c in coeffs.items():
                lst[e] = c
            polys.append(UPoly(lst))
    out = UPoly.zero()
    for p in polys:
        out = out.gcd(p)
    return out
