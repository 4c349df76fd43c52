"""Integration of D_{n+1}/J along the x's, and difference equations for Z.

The integral module D_{n+1}/(J + dx_1 D_{n+1} + ... + dx_n D_{n+1}) is the
restriction to x = 0 of the Fourier transform of J (x_j -> dx_j,
dx_j -> -x_j, t and dt fixed).  The restriction is computed the standard way:
a w-adapted Groebner basis for the weight w(x) = -1, w(dx) = +1 obtained
through Bernstein homogenization, the weight b-function b_w(theta) by
eliminating everything but theta = sum x_j dx_j, truncation at the largest
nonnegative integer root k0, and an exact module elimination over
D_1 = C<t, dt>.  The Mellin map mu(t) = E, mu(dt) = -s E^{-1} then turns the
D_1-annihilator of the class of 1 into difference operators for
Z(lambda) = int f_+^lambda phi dx.
"""
from __future__ import annotations

from dataclasses import dataclass

from .annihilator import build_malgrange
from .upoly import UPoly
from .weyl_core import (
    QQ,
    QQ0,
    QQ1,
    IdealPresentation,
    SignatureMismatch,
    SubmodulePresentation,
    TermOrder,
    WeylOperator,
    component_zero_ideal,
    d_1,
    rational_content,
    univariate_generator,
)


class NotHolonomic(RuntimeError):
    """The weight b-function vanished: restriction data unavailable."""


def fourier_transform(ideal):
    """x_j -> dx_j, dx_j -> -x_j on every generator; t, dt are fixed.

    A ring automorphism of D_{n+1}; applying it four times is the identity.
    """
    sig = ideal.sig if isinstance(ideal, IdealPresentation) else ideal.sig
    if isinstance(ideal, WeylOperator):
        return _fourier_op(ideal)
    return IdealPresentation.make(sig, [_fourier_op(g) for g in ideal.generators])


def _fourier_op(op):
    sig = op.sig
    n = sig.n_x
    out = WeylOperator.zero(sig)
    for m, c in op.terms.items():
        a = m[:n]                      # x exponents -> dx
        b = m[n:2 * n]                 # dx exponents -> -x
        rest = m[2 * n:]
        sign = (-1) ** sum(b)
        # dx^a * x^b needs normal ordering
        left = [0] * sig.nslots
        right = [0] * sig.nslots
        for i in range(n):
            left[sig.d_slot(i)] = a[i]
            right[i] = b[i]
        for j, e in enumerate(rest):
            right[2 * n + j] = e
        prod = WeylOperator(sig, {tuple(left): QQ1}) * WeylOperator(sig, {tuple(right): QQ1})
        out = out + prod.scale(c * sign)
    return out


# ---------------------------------------------------------------------------
# Bernstein homogenization and the w-adapted basis
# ---------------------------------------------------------------------------

def _bernstein_homogenize(op, hsig):
    deg = op.total_degree()
    out = WeylOperator(hsig)
    for m, c in op.terms.items():
        m2 = list(m) + [deg - sum(m)]
        out.terms[tuple(m2)] = c
    return out


def _w_row(sig):
    """Restriction weight: x_j -> -1, dx_j -> +1, everything else 0."""
    row = [0] * sig.nslots
    for i in range(sig.n_x):
        row[i] = -1
        row[sig.d_slot(i)] = 1
    return tuple(row)


def w_adapted_basis(ideal, deadline=None, stage="w-adapted-basis"):
    """Groebner basis of the ideal adapted to the restriction weight.

    Generators are Bernstein-homogenized; the graded engine runs with the
    weight row first and h scanned last in the grevlex tiebreak, and the
    result is dehomogenized.  Initial forms of the output generate in_w.
    """
    sig = ideal.sig
    hsig = sig.homogenize()
    row = _w_row(hsig)
    order = TermOrder(hsig, blocks=[tuple(range(hsig.nslots))], weight_rows=[row])
    pre = ideal.groebner(deadline=deadline, stage=stage + "-prereduce")
    gens = [_bernstein_homogenize(g, hsig) for g in pre.cached_gb]
    hideal = IdealPresentation.make(hsig, gens)
    gb = hideal.groebner(order, deadline, stage)
    out = []
    for g in gb.cached_gb:
        deh = WeylOperator(sig)
        for m, c in g.terms.items():
            key = m[:-1]
            deh.terms[key] = deh.terms.get(key, QQ0) + c
        deh.terms = {m: c for m, c in deh.terms.items() if c}
        if deh.terms:
            out.append(deh)
    return out


@dataclass(frozen=True)
class RestrictionData:
    """Weight b-function, truncation order, basis and relations at x = 0.

    k0 is None when b_w has no nonnegative integer root; the degree-0
    restriction then vanishes and downstream ideals are the unit ideal.
    basis lists the dx-exponent tuples of weight <= k0; relations is the
    D_1-submodule they satisfy.
    """

    bw: UPoly
    k0: object
    basis: tuple
    relations: SubmodulePresentation


def weight_bfunction(ideal, deadline=None, adapted=None):
    """Generator of in_w(J) cap C[theta], theta = sum x_j dx_j."""
    sig = ideal.sig
    if adapted is None:
        adapted = w_adapted_basis(ideal, deadline=deadline)
    row = _w_row(sig)
    initials = [g.initial_form(row) for g in adapted]
    sig_th = sig.with_extras("th")
    theta = WeylOperator.zero(sig_th)
    for i in range(sig.n_x):
        theta = theta + (WeylOperator.gen(sig_th, sig.x_names[i])
                         * WeylOperator.gen(sig_th, "d" + sig.x_names[i]))
    gens = [g.embed(sig_th) for g in initials]
    gens.append(theta - WeylOperator.gen(sig_th, "th"))
    front = [n for n in sig_th.names if n != "th"]
    order = TermOrder.elimination(sig_th, front)
    gb = IdealPresentation.make(sig_th, gens).groebner(order, deadline,
                                                       stage="theta-elimination")
    th_slot = sig_th.slot("th")
    pure = [g for g in gb.cached_gb
            if all(not g.uses_slot(i) for i in range(sig_th.nslots) if i != th_slot)]
    bw = univariate_generator(pure, var="th") if pure else UPoly.zero()
    if not bw:
        raise NotHolonomic("weight b-function is zero: not holonomic along the restriction")
    return bw.monic()


def _dx_monomials(sig, max_weight):
    """dx-exponent tuples of total degree <= max_weight, degree-0 first."""
    n = sig.n_x
    if n == 0:
        return ((),)
    out = [()]
    for _ in range(n):
        out = [m + (e,) for m in out for e in range(max_weight + 1 - sum(m))]
    return tuple(sorted(out, key=lambda m: (sum(m), m)))


def restriction_data(ideal, deadline=None):
    """All data of the degree-0 restriction of D_{n+1}/ideal to x = 0."""
    sig = ideal.sig
    if not sig.has_t:
        raise SignatureMismatch("restriction expects a D_{n+1} ideal")
    adapted = w_adapted_basis(ideal, deadline=deadline)
    row = _w_row(sig)
    bw = weight_bfunction(ideal, deadline=deadline, adapted=adapted)
    k0 = bw.integer_roots_max()
    sig1 = d_1()
    if k0 is None:
        empty = SubmodulePresentation.make(1, sig1, [])
        return RestrictionData(bw, None, ((0,) * sig.n_x,), empty)
    basis = _dx_monomials(sig, k0)
    index = {b: i for i, b in enumerate(basis)}
    n = sig.n_x
    ts, dts = sig.t_slot, sig.dt_slot
    relations = []
    for g in adapted:
        mg = g.max_weight(row)
        budget = k0 - mg
        if budget < 0:
            continue
        for gamma in _dx_monomials(sig, budget):
            mono = [0] * sig.nslots
            for i in range(n):
                mono[sig.d_slot(i)] = gamma[i]
            shifted = WeylOperator(sig, {tuple(mono): QQ1}) * g
            vec = [WeylOperator.zero(sig1) for _ in basis]
            for m, c in shifted.terms.items():
                if any(m[i] for i in range(n)):
                    continue           # x * D_{n+1} dies at x = 0
                beta = tuple(m[sig.d_slot(i)] for i in range(n))
                d1mono = (m[ts], m[dts])
                vec[index[beta]].terms[d1mono] = vec[index[beta]].terms.get(d1mono, QQ0) + c
            for op in vec:
                op.terms = {m: c for m, c in op.terms.items() if c}
            if any(op.terms for op in vec):
                relations.append(tuple(vec))
    module = SubmodulePresentation.make(len(basis), sig1, relations)
    return RestrictionData(bw, k0, basis, module)


def integration_ideal(ideal, deadline=None):
    """Annihilator in D_1 of the class of 1 in the degree-0 integral module.

    Fourier transform, then restriction to x = 0; the answer is the
    component-0 colon ideal of the truncated relation module.
    """
    FJ = fourier_transform(ideal)
    rd = restriction_data(FJ, deadline=deadline)
    sig1 = d_1()
    if rd.k0 is None:
        one = WeylOperator.one(sig1)
        return IdealPresentation(sig1, (one,), (one,), TermOrder.grevlex(sig1))
    comp = rd.basis.index((0,) * ideal.sig.n_x)
    return component_zero_ideal(rd.relations, comp, deadline=deadline,
                                stage="integration-colon")


# ---------------------------------------------------------------------------
# difference operators and the Mellin transform
# ---------------------------------------------------------------------------

class DifferenceOperator:
    """Laurent polynomial in the shift E with coefficients in Q[s].

    E acts by s -> s+1; the commutation E a(s) = a(s+1) E is built into the
    arithmetic.  Normalized form: minimal E-power 0, integer content 1,
    leading coefficient with positive leading sign.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs = {}
        if coeffs:
            for k, p in coeffs.items():
                p = p if isinstance(p, UPoly) else UPoly((p,))
                if p:
                    self.coeffs[k] = p

    @classmethod
    def from_poly(cls, p, power=0):
        return cls({power: p})

    @classmethod
    def shift(cls, k=1):
        return cls({k: UPoly.one()})

    def is_zero(self):
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, DifferenceOperator) and self.coeffs == other.coeffs

    @property
    def order(self):
        return max(self.coeffs) - min(self.coeffs) if self.coeffs else 0

    @property
    def max_power(self):
        return max(self.coeffs)

    @property
    def min_power(self):
        return min(self.coeffs)

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, p in other.coeffs.items():
            q = out.get(k, UPoly.zero()) + p
            if q:
                out[k] = q
            else:
                out.pop(k, None)
        return DifferenceOperator(out)

    def __neg__(self):
        return DifferenceOperator({k: -p for k, p in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, UPoly):
            other = DifferenceOperator({0: other})
        out = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                q = out.get(i + j, UPoly.zero()) + a * b.shift(i)
                if q:
                    out[i + j] = q
                else:
                    out.pop(i + j, None)
        return DifferenceOperator(out)

    def scale(self, c):
        return DifferenceOperator({k: p * c for k, p in self.coeffs.items()})

    def normalized(self):
        """Shift so the minimal E-power is 0, clear content, fix the sign."""
        if not self.coeffs:
            return DifferenceOperator()
        k = -min(self.coeffs)
        shifted = {i + k: p.shift(k) for i, p in self.coeffs.items()}
        cont = rational_content([c for p in shifted.values() for c in p.c])
        if shifted[max(shifted)].lead < 0:
            cont = -cont
        return DifferenceOperator({i: p * (QQ1 / cont) for i, p in shifted.items()})

    def is_normalized(self):
        return self == self.normalized()

    def to_str(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs, reverse=True):
            p = self.coeffs[k]
            sign = "-" if p.lead < 0 else "+"
            q = p if p.lead > 0 else -p
            e = "E" if k == 1 else f"E^{k}"
            if k == 0:
                body = q.to_str(compact=True) if q.degree == 0 else f"({q.to_str(compact=True)})"
            elif q.degree == 0:
                body = e if q.lead == 1 else f"{_qabs(q.lead)}*{e}"
            else:
                body = f"({q.to_str(compact=True)})*{e}"
            parts.append((sign, body))
        sign0, body0 = parts[0]
        out = ("-" if sign0 == "-" else "") + body0
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"<DifferenceOperator {self.to_str()}>"


def _qabs(c):
    n, d = int(abs(c).numerator), int(abs(c).denominator)
    return str(n) if d == 1 else f"{n}/{d}"


def mellin_raw(op):
    """mu(t^a dt^b) term by term; may carry negative E-powers (unnormalized)."""
    sig = op.sig
    if sig.n_x != 0 or not sig.has_t:
        raise SignatureMismatch("mellin transform expects a D_1 operator")
    ts, dts = sig.t_slot, sig.dt_slot
    out = DifferenceOperator()
    for m, c in op.terms.items():
        a, b = m[ts], m[dts]
        # E^a (-s E^-1)^b = (-1)^b (s+a)(s+a-1)...(s+a-b+1) E^(a-b)
        poly = UPoly.one()
        for i in range(b):
            poly = poly * UPoly((QQ(a - i), 1))
        if b % 2:
            poly = -poly
        out = out + DifferenceOperator({a - b: poly * c})
    return out


def mellin_to_difference(ideal):
    """Normalized Mellin images of the generators of a D_1 ideal."""
    return [mellin_raw(g).normalized() for g in ideal.generators]


def zeta_difference(inst, deadline=None):
    """Difference operators annihilating Z(lambda) = int f_+^lambda phi dx."""
    J = build_malgrange(inst)
    ann = integration_ideal(J, deadline=deadline)
    ops = [op for op in mellin_to_difference(ann) if op]
    if not ops:
        raise NotHolonomic("empty difference ideal: integration failed to terminate")
    return ops


# ---------------------------------------------------------------------------
# skew Euclidean layer over Q(s) for membership tests and display, done
# fraction-free: primitive pseudo-remainder sequences keep the coefficients
# as integer-content-1 polynomials instead of deep Q(s) gcd chains
# ---------------------------------------------------------------------------

def _to_poly_list(op):
    """Dense coefficient list [c_0, ..., c_d] over Q[s], min power cleared."""
    norm = op.normalized()
    return [norm.coeffs.get(i, UPoly.zero()) for i in range(norm.max_power + 1)]


def _strip_primitive(cs):
    while cs and not cs[-1]:
        cs.pop()
    if not cs:
        return cs
    pcont = UPoly.zero()
    for c in cs:
        pcont = pcont.gcd(c)
    if pcont.degree > 0:
        cs = [c.exact_div(pcont) for c in cs]
    cont = rational_content([v for c in cs for v in c.c])
    if cs[-1].lead < 0:
        cont = -cont
    return [c * (QQ1 / cont) for c in cs]


def _pseudo_right_rem(a, b):
    """Pseudo-remainder of a under right division by b (dense Q[s] lists).

    Vanishes exactly when the true Q(s) remainder does; intermediate results
    are kept primitive.
    """
    a = [c for c in a]
    db = len(b) - 1
    while True:
        while a and not a[-1]:
            a.pop()
        if len(a) - 1 < db or not a:
            break
        d = len(a) - 1 - db
        lead = b[db].shift(d)
        lca = a[-1]
        a = [c * lead for c in a]
        for i, bc in enumerate(b):
            a[i + d] = a[i + d] - lca * bc.shift(d)
        a = _strip_primitive(a)
    return a


def difference_gcrd(ops):
    """Greatest common right divisor over Q(s)<E>, normalized.

    Generates the same left ideal of Q(s)<E, E^{-1}> as the inputs.
    """
    ops = [op for op in ops if op]
    if not ops:
        return DifferenceOperator()
    cur = _strip_primitive(_to_poly_list(ops[0]))
    for op in ops[1:]:
        a, b = cur, _strip_primitive(_to_poly_list(op))
        while b:
            a, b = b, _pseudo_right_rem(a, b)
        cur = a
    return DifferenceOperator({i: c for i, c in enumerate(cur)}).normalized()


def difference_member(op, gens):
    """Is op in the left Q(s)<E, E^{-1}>-ideal generated by gens?"""
    g = difference_gcrd(gens)
    if g.is_zero():
        return op.is_zero()
    return not _pseudo_right_rem(_to_poly_list(op), _to_poly_list(g))
