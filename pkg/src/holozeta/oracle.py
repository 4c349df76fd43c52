"""Independent verification: exact operator actions on f^s log-sections, and
numeric quadrature of Z(lambda) for residual checks of difference operators.

A LogSection represents sum_j f^(-k_j) f^s (log f)^j (x) (op_j u) over the
module M = D_n/I; operators act exactly (the derivation rule
d_i f^s = s f_i f^{-1} f^s plus the product rule on log powers), with the
M-side reduced against a Groebner basis of I.  Zero testing uses the
saturation criterion: for f-saturated M the section vanishes iff every op_j
reduces to 0; in general f^m op_j is tested for increasing m and the m used
is reported.
"""
from __future__ import annotations

from dataclasses import dataclass

import mpmath

from .weyl_core import (
    QQ,
    QQ0,
    IdealPresentation,
    SignatureMismatch,
    TermOrder,
    WeylOperator,
    normal_form,
)


class OracleError(RuntimeError):
    pass


def _comm_poly_div(num, den):
    """Exact division of commutative exponent-dict polynomials, or None.

    Single-divisor long division under lex; remainder-free iff divisible.
    """
    den_lead = max(den)
    lc = den[den_lead]
    work = dict(num)
    quot = {}
    while work:
        m = max(work)
        diff = tuple(a - b for a, b in zip(m, den_lead))
        if any(d < 0 for d in diff):
            return None
        c = work[m] / lc
        quot[diff] = c
        for dm, dc in den.items():
            key = tuple(a + b for a, b in zip(diff, dm))
            v = work.get(key, QQ0) - c * dc
            if v:
                work[key] = v
            else:
                work.pop(key, None)
    return quot


def _gb_of_I(inst, sig):
    """Groebner basis of I inside the given signature (s rides along freely)."""
    gens = [g.embed(sig) for g in inst.I_gens]
    return IdealPresentation.make(sig, gens).groebner(TermOrder.grevlex(sig))


class LogSection:
    """Exact section of the log tower over M = D_n/I.

    entries maps a log power j to (op, fpow): the summand
    f^(-fpow) f^e (log f)^j (x) (op u), where the exponent e is the symbol s
    (symbolic mode) or a fixed rational a (numeric mode).  In symbolic mode
    op lives in D_n[s], in numeric mode in D_n.
    """

    def __init__(self, inst, entries=None, symbolic=True, a=None):
        self.inst = inst
        self.symbolic = symbolic
        self.a = None if symbolic else QQ(a)
        self.sig = inst.sig_s if symbolic else inst.sig
        self._gb = _gb_of_I(inst, self.sig)
        self.entries = {}
        if entries:
            for j, (op, fpow) in entries.items():
                self._put(j, op, fpow)

    # -- construction -----------------------------------------------------------
    @classmethod
    def fs(cls, inst, j=0, mult=None, symbolic=True, a=None):
        """The section f^e (log f)^j (x) (mult * u); mult defaults to 1."""
        sec = cls(inst, symbolic=symbolic, a=a)
        op = WeylOperator.one(sec.sig) if mult is None else mult.embed(sec.sig)
        sec._put(j, op, 0)
        return sec

    def _reduce(self, op):
        if not self._gb.cached_gb:
            return op
        return normal_form(op, list(self._gb.cached_gb), self._gb.cached_order)[0]

    def _left_div_f(self, op):
        """op = f * q exactly (as a left factor), or None.

        f is a pure x-polynomial, so f * (sum c x^a d^b) groups per d-monomial
        and the test is a commutative polynomial division on each coefficient.
        """
        sig = self.sig
        n = len(self.inst.x_names)
        nx = sig.n_x
        groups = {}
        for m, c in op.terms.items():
            key = m[nx:]
            groups.setdefault(key, {})[m[:nx]] = c
        fterms = {m[:nx]: c for m, c in self.inst.f.embed(sig).terms.items()}
        out = {}
        for key, poly in groups.items():
            q = _comm_poly_div(poly, fterms)
            if q is None:
                return None
            for xm, c in q.items():
                out[xm + key] = c
        res = WeylOperator(sig)
        res.terms = out
        return res

    def _put(self, j, op, fpow):
        op = op if op.sig == self.sig else op.embed(self.sig)
        cur = self.entries.get(j)
        if cur is not None:
            cop, ck = cur
            # align f powers
            f = self.inst.f.embed(self.sig)
            k = max(ck, fpow)
            if ck < k:
                cop = f ** (k - ck) * cop
            if fpow < k:
                op = f ** (k - fpow) * op
            op, fpow = cop + op, k
        op = self._reduce(op)
        # canonical form: clear common left f-factors against the denominator
        while fpow > 0 and op.terms:
            q = self._left_div_f(op)
            if q is None:
                break
            op, fpow = self._reduce(q), fpow - 1
        if op.is_zero():
            self.entries.pop(j, None)
        else:
            self.entries[j] = (op, fpow)

    def copy(self):
        out = LogSection(self.inst, symbolic=self.symbolic, a=self.a)
        out.entries = dict(self.entries)
        return out

    # -- linear structure ---------------------------------------------------------
    def __add__(self, other):
        if (self.inst is not other.inst and self.inst != other.inst) or \
           self.symbolic != other.symbolic or self.a != other.a:
            raise OracleError("sections over different towers")
        out = self.copy()
        for j, (op, k) in other.entries.items():
            out._put(j, op, k)
        return out

    def scale(self, c):
        out = self.copy()
        out.entries = {j: (op.scale(c), k) for j, (op, k) in out.entries.items()}
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    # -- zero testing --------------------------------------------------------------
    def is_zero(self, m_cap=8):
        return self.vanishing_m(m_cap) is not None

    def vanishing_m(self, m_cap=8):
        """Smallest m with f^m op_j = 0 mod I for every entry, or None.

        For f-saturated input m = 0 always suffices; the search is kept for
        robustness on unsaturated modules and the bound is reported.
        """
        f = self.inst.f.embed(self.sig)
        worst = 0
        for j, (op, _k) in self.entries.items():
            cur = op
            m = 0
            while m <= m_cap:
                if self._reduce(cur).is_zero():
                    break
                cur = f * cur
                m += 1
            if m > m_cap:
                return None
            worst = max(worst, m)
        return worst

    def __repr__(self):
        kind = "s" if self.symbolic else str(self.a)
        inner = ", ".join(f"log^{j}: f^-{k} (x) {op.to_str()}"
                          for j, (op, k) in sorted(self.entries.items()))
        return f"<LogSection e={kind} {{{inner}}}>"


def _exponent_factor(sec, sig_work):
    """The multiplier in the derivation rule: s (symbolic) or the rational a."""
    if sec.symbolic:
        return WeylOperator.gen(sig_work, "s")
    return WeylOperator.constant(sig_work, sec.a)


def _apply_dx(sec, i):
    """Action of d_i: product rule over f^e, the log power, and the M-side."""
    inst = sec.inst
    sig = sec.sig
    f = inst.f.embed(sig)
    fi = inst.f.x_derivative(i).embed(sig)
    di = WeylOperator.gen(sig, "d" + inst.x_names[i])
    efac = _exponent_factor(sec, sig)
    out = LogSection(inst, symbolic=sec.symbolic, a=sec.a)
    for j, (op, k) in sec.entries.items():
        # d_i (f^{-k} f^e log^j (x) op u) =
        #   f^{-(k+1)} f^e log^j (x) (f d_i + (e-k) f_i) op u
        # + j f^{-(k+1)} f^e log^(j-1) (x) f_i op u
        main = (f * di + (efac - k) * fi) * op
        out._put(j, main, k + 1)
        if j:
            out._put(j - 1, fi.scale(j) * op, k + 1)
    return out


def _apply_x(sec, i):
    out = LogSection(sec.inst, symbolic=sec.symbolic, a=sec.a)
    xi = WeylOperator.gen(sec.sig, sec.inst.x_names[i])
    for j, (op, k) in sec.entries.items():
        out._put(j, xi * op, k)
    return out


def _apply_s(sec):
    if not sec.symbolic:
        raise OracleError("s acts on symbolic sections only")
    out = LogSection(sec.inst, symbolic=True)
    s = WeylOperator.gen(sec.sig, "s")
    for j, (op, k) in sec.entries.items():
        out._put(j, s * op, k)
    return out


def _apply_t(sec):
    """t acts through the Mellin identification as E_s: shift s, multiply by f."""
    if not sec.symbolic:
        raise OracleError("t/dt act on symbolic sections only")
    inst = sec.inst
    f = inst.f.embed(sec.sig)
    out = LogSection(inst, symbolic=True)
    for j, (op, k) in sec.entries.items():
        out._put(j, f * op.shift_extra("s", 1), k)
    return out


def _apply_dt(sec):
    """dt = -s E_s^{-1}: shift s by -1, divide by f, multiply by -s."""
    if not sec.symbolic:
        raise OracleError("t/dt act on symbolic sections only")
    inst = sec.inst
    out = LogSection(inst, symbolic=True)
    s = WeylOperator.gen(sec.sig, "s")
    for j, (op, k) in sec.entries.items():
        out._put(j, (-s) * op.shift_extra("s", -1), k + 1)
    return out


def apply_log_section(P, v):
    """Exact action of P on the section v.

    P may live in D_n, D_n[s] or D_{n+1} (x-names must match the instance);
    monomial factors act right to left.  Numeric-exponent sections only admit
    D_n operators.
    """
    psig = P.sig
    inst = v.inst
    if psig.x_names != inst.x_names:
        raise SignatureMismatch("operator over different x variables")
    n = len(inst.x_names)
    out = None
    for m, c in P.terms.items():
        cur = v.scale(c)
        # rightmost factors first: extras, dt, t, dx, x
        for name_i, e in reversed(list(enumerate(m))):
            if not e:
                continue
            name = psig.names[name_i]
            for _ in range(e):
                if name == "s":
                    cur = _apply_s(cur)
                elif name == "t":
                    cur = _apply_t(cur)
                elif name == "dt":
                    cur = _apply_dt(cur)
                elif name.startswith("d"):
                    cur = _apply_dx(cur, inst.x_names.index(name[1:]))
                else:
                    cur = _apply_x(cur, inst.x_names.index(name))
        out = cur if out is None else out + cur
    if out is None:
        out = LogSection(inst, symbolic=v.symbolic, a=v.a)
    return out


def annihilates(P, v, m_cap=8):
    """Convenience: does P send the section v to zero (exactly)?"""
    return apply_log_section(P, v).is_zero(m_cap)


# ---------------------------------------------------------------------------
# numeric side
# ---------------------------------------------------------------------------

PHI_FAMILIES = ("gaussian", "exponential", "one_sided_exp_inv", "one_sided_exp_inv_exp")


@dataclass(frozen=True)
class PhiSpec:
    """Numeric weight phi for quadrature; each family is integrable against
    f_+^lambda for Re lambda >= 0 on its domain.

    gaussian: exp(-sum x_i^2); exponential: exp(-sum x_i);
    one_sided_exp_inv: exp(-x - 1/x) for x > 0 else 0 (n = 1);
    one_sided_exp_inv_exp: exp(-x - 1/x) [x>0] * exp(-y) (n = 2).
    """

    family: str

    def __post_init__(self):
        if self.family not in PHI_FAMILIES:
            raise ValueError(f"unknown phi family {self.family!r}; "
                             f"choose one of {PHI_FAMILIES}")

    def callable_for(self, n):
        fam = self.family
        if fam == "gaussian":
            return lambda *xs: mpmath.exp(-sum(v * v for v in xs))
        if fam == "exponential":
            return lambda *xs: mpmath.exp(-sum(xs))
        if fam == "one_sided_exp_inv":
            if n != 1:
                raise ValueError("one_sided_exp_inv is one-dimensional")
            return lambda x: mpmath.exp(-x - 1 / x) if x > 0 else mpmath.mpf(0)
        if n != 2:
            raise ValueError("one_sided_exp_inv_exp is two-dimensional")
        return lambda x, y: (mpmath.exp(-x - 1 / x) if x > 0 else mpmath.mpf(0)) * mpmath.exp(-y)


@dataclass
class ZetaValues:
    lambdas: list
    values: list
    errors: list

    def value_at(self, lam):
        lam = QQ(lam)
        for l, v in zip(self.lambdas, self.values):
            if QQ(l) == lam:
                return v
        raise KeyError(f"lambda = {lam} not sampled")


def _f_callable(f):
    sig = f.sig
    names = sig.x_names

    def fx(*xs):
        vals = dict(zip(names, xs))
        return f.eval_point(vals)

    return fx


def _split_roots(g, lo, hi, samples):
    """Sign-change brackets of g on [lo, hi], refined by bisection."""
    pts = [lo + (hi - lo) * i / samples for i in range(samples + 1)]
    vals = [g(p) for p in pts]
    roots = []
    for i in range(samples):
        a, b, fa, fb = pts[i], pts[i + 1], vals[i], vals[i + 1]
        if fa == 0:
            roots.append(a)
            continue
        if fa * fb < 0:
            for _ in range(60):
                mid = (a + b) / 2
                fm = g(mid)
                if fa * fm <= 0:
                    b, fb = mid, fm
                else:
                    a, fa = mid, fm
            roots.append((a + b) / 2)
    return roots


def numeric_zeta(f, phi, lambdas, tol=1e-6, box=12.0, depth=14):
    """Adaptive quadrature of Z(lambda) = int_{f>0} f^lambda phi dx.

    n <= 2 and lambda >= 0 only (no numeric analytic continuation).  The
    region {f > 0} is clipped to [-box, box]^n; integration is split at the
    numerically located boundary of {f = 0} so the integrand stays smooth on
    each piece.  Returns values with error estimates.
    """
    sig = f.sig
    n = sig.n_x
    if n > 2:
        raise OracleError("numeric_zeta supports n <= 2")
    if any(QQ(l) < 0 for l in lambdas):
        raise OracleError("numeric_zeta needs lambda >= 0")
    fx = _f_callable(f)
    phif = phi.callable_for(n)
    old = mpmath.mp.prec
    mpmath.mp.prec = 80
    values, errors = [], []
    try:
        for lam in lambdas:
            lamf = mpmath.mpf(int(QQ(lam).numerator)) / mpmath.mpf(int(QQ(lam).denominator))
            if n == 1:
                def integrand(x):
                    fv = fx(x)
                    if fv <= 0:
                        return mpmath.mpf(0)
                    return fv ** lamf * phif(x)
                cuts = _split_roots(lambda x: float(fx(x)), -box, box, 4 * depth)
                pts = [-box] + [c for c in cuts if -box < c < box] + [box]
                total = mpmath.mpf(0)
                err = mpmath.mpf(0)
                for a, b in zip(pts, pts[1:]):
                    val = mpmath.quad(integrand, [a, b])
                    total += val
                values.append(float(total))
                # two-resolution style estimate on the whole interval
                coarse = mpmath.quad(integrand, pts)
                errors.append(abs(float(total - coarse)) + 1e-30)
            else:
                # outer composite Simpson over exact 1-D inner integrals; the
                # inner integrand is split at the numerically located
                # boundary of {f = 0} so each piece is smooth
                def inner(y):
                    def gx(x):
                        fv = fx(x, y)
                        if fv <= 0:
                            return mpmath.mpf(0)
                        return fv ** lamf * phif(x, y)
                    cuts = _split_roots(lambda x: float(fx(x, y)), -box, box, 2 * depth)
                    pts = [-box] + [c for c in cuts if -box < c < box] + [box]
                    return mpmath.quad(gx, pts)

                def simpson(npts):
                    h = mpmath.mpf(2 * box) / (npts - 1)
                    total = mpmath.mpf(0)
                    for i in range(npts):
                        yv = -box + i * h
                        wgt = 1 if i in (0, npts - 1) else (4 if i % 2 else 2)
                        total += wgt * inner(yv)
                    return total * h / 3

                n1 = 8 * depth + 1
                coarse = simpson(n1 // 2 | 1)
                fine = simpson(n1)
                values.append(float(fine))
                errors.append(abs(float(fine - coarse)) + 1e-30)
    finally:
        mpmath.mp.prec = old
    return ZetaValues(list(lambdas), values, errors)


def residual_check(ops, grid):
    """Max over ops and admissible points of |sum a_i(lam) Z(lam+i)| / max|term|.

    grid is a list of (lambda, value) pairs spaced exactly by 1.
    """
    lams = [QQ(l) for l, _ in grid]
    vals = {str(l): v for l, v in zip(lams, (v for _, v in grid))}
    for a, b in zip(lams, lams[1:]):
        if b - a != 1:
            raise OracleError("grid must be integer-spaced with step 1")
    worst = 0.0
    for op in ops:
        order = op.max_power
        if len(lams) <= order:
            raise OracleError("grid too short for operator order")
        npts = 0
        for l0 in lams:
            if l0 + order > lams[-1]:
                break
            terms = []
            for i, p in op.coeffs.items():
                z = vals[str(l0 + i)]
                terms.append(float(p.eval(l0)) * z)
            scale = max((abs(t) for t in terms), default=0.0)
            resid = abs(sum(terms))
            if scale > 0:
                worst = max(worst, resid / scale)
            elif resid > 0:
                worst = max(worst, 1.0)
            npts += 1
        if npts == 0:
            raise OracleError("grid too short for operator order")
    return worst
