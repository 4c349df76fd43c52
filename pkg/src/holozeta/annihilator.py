"""Annihilator of f^s (x) u via the Malgrange ideal.

Pipeline: J = <tau(I), t - f> in D_{n+1}; homogenize each generator with
respect to the weights x:0, dx:0, t:-1, dt:+1 using the central variable
tau_h, adjoin 1 - sigma*tau_h, eliminate {sigma, tau_h}; every survivor is
weight-homogeneous, factors as t^nu * P'(-dt t) or dt^nu * P'(-dt t), and the
P' generate Ann_{D_n[s]}(f^s (x) u).
"""
from __future__ import annotations

from dataclasses import dataclass

from .weyl_core import (
    QQ,
    QQ0,
    QQ1,
    IdealPresentation,
    NonHomogeneousInput,
    RingSignature,
    SignatureMismatch,
    WeylOperator,
    d_n,
    d_n_s,
    d_np1,
    eliminate,
)

# weight table for the homogenization step: x_j, dx_j weight 0;
# t: -1, dt: +1, tau_h: -1, sigma: +1
WEIGHT_TABLE = {"t": -1, "dt": 1, "tau_h": -1, "sigma": 1}


def _weight_row(sig):
    return tuple(WEIGHT_TABLE.get(name, 0) for name in sig.names)


@dataclass(frozen=True)
class ProblemInstance:
    """A polynomial f and an annihilating ideal for phi, assumed f-saturated.

    f is a non-constant commutative polynomial in the x's; I_gens generate a
    left ideal of D_n with D_n/I holonomic (use {dx_1, ..., dx_n} for phi = 1).
    Saturation (injectivity of f on D_n/I) is the caller's assertion; for a
    non-saturated module the computed ideal annihilates f^s (x) u for the
    saturation instead.
    """

    x_names: tuple
    f: WeylOperator
    I_gens: tuple
    saturated: bool = True

    def __post_init__(self):
        sig = self.sig
        if self.f.sig != sig:
            raise SignatureMismatch("f must live in D_n")
        if any(g.sig != sig for g in self.I_gens):
            raise SignatureMismatch("annihilator generators must live in D_n")
        if not self.I_gens:
            raise ValueError("I_gens must be nonempty; use the dx_j for phi = 1")
        n = len(self.x_names)
        if any(any(m[sig.d_slot(i)] for i in range(n)) for m in self.f.terms):
            raise ValueError("f must be a commutative polynomial in the x's")
        if self.f.total_degree() < 1:
            raise ValueError("f must be non-constant")

    @property
    def n(self):
        return len(self.x_names)

    @property
    def sig(self):
        return d_n(self.x_names)

    @property
    def sig_s(self):
        return d_n_s(self.x_names)

    @property
    def sig_t(self):
        return d_np1(self.x_names)

    @classmethod
    def make(cls, x_names, f, I_gens, saturated=True):
        return cls(tuple(x_names), f, tuple(I_gens), saturated)


def tau_substitute(P, f):
    """tau(P) = P(x, dx_1 + f_1 dt, ..., dx_n + f_n dt) in D_{n+1}.

    The substituted derivations commute with one another and satisfy
    [dx_j + f_j dt, x_i] = delta_ij, so the map is a ring homomorphism.
    """
    sig = P.sig
    if f.sig != sig:
        raise SignatureMismatch("P and f must share the D_n signature")
    n = sig.n_x
    sig_t = d_np1(sig.x_names)
    dt = WeylOperator.gen(sig_t, "dt")
    subs = [WeylOperator.gen(sig_t, "d" + x) + f.x_derivative(i).embed(sig_t) * dt
            for i, x in enumerate(sig.x_names)]
    pows = [{0: WeylOperator.one(sig_t)} for _ in range(n)]

    def power(i, e):
        cache = pows[i]
        while e not in cache:
            m = max(cache)
            cache[m + 1] = cache[m] * subs[i]
        return cache[e]

    out = WeylOperator.zero(sig_t)
    for m, c in P.terms.items():
        term = WeylOperator.constant(sig_t, c)
        mono = [0] * sig_t.nslots
        has_x = False
        for i, e in enumerate(m[:n]):
            if e:
                mono[i] = e
                has_x = True
        if has_x:
            term = term * WeylOperator(sig_t, {tuple(mono): QQ1})
        for i in range(n):
            e = m[sig.d_slot(i)]
            if e:
                term = term * power(i, e)
        out = out + term
    return out


def build_malgrange(inst):
    """Generators {tau(P) : P in I} together with t - f, in D_{n+1}."""
    sig_t = inst.sig_t
    t = WeylOperator.gen(sig_t, "t")
    gens = [tau_substitute(P, inst.f) for P in inst.I_gens]
    gens.append(t - inst.f.embed(sig_t))
    return IdealPresentation.make(sig_t, gens)


def homogenize_w(P):
    """Weight-homogenize P in D_{n+1} by padding with tau_h powers.

    Every term of weight d picks up tau_h^(d - d_min); the result has weight
    d_min throughout and recovers P under tau_h -> 1.
    """
    sig = P.sig
    out_sig = RingSignature(sig.x_names, True, sig.extras + ("sigma", "tau_h"))
    row = _weight_row(sig)
    tau_slot = out_sig.slot("tau_h")
    if not P.terms:
        return WeylOperator.zero(out_sig)
    weights = {m: sum(w * e for w, e in zip(row, m)) for m in P.terms}
    dmin = min(weights.values())
    emb = [out_sig.slot(n) for n in sig.names]
    out = WeylOperator(out_sig)
    for m, c in P.terms.items():
        m2 = [0] * out_sig.nslots
        for i, e in enumerate(m):
            if e:
                m2[emb[i]] = e
        m2[tau_slot] = weights[m] - dmin
        out.terms[tuple(m2)] = c
    return out


def tau_to_one(P):
    """Map tau_h -> 1 and drop the unused sigma slot (inverse of homogenize_w)."""
    sig = P.sig
    sig_t = d_np1(sig.x_names)
    drop = {sig.slot("sigma"), sig.slot("tau_h")}
    keep = [i for i in range(sig.nslots) if i not in drop]
    out = WeylOperator(sig_t)
    for m, c in P.terms.items():
        if m[sig.slot("sigma")]:
            raise SignatureMismatch("operator still uses sigma")
        key = tuple(m[i] for i in keep)
        v = out.terms.get(key, QQ0) + c
        if v:
            out.terms[key] = v
        else:
            out.terms.pop(key, None)
    return out


def _falling_factor(j, offset):
    """Coefficient list of (-1)^j (s+offset+1)(s+offset+2)...(s+offset+j)."""
    coeffs = [QQ1]
    for i in range(1, j + 1):
        root = QQ(offset + i)
        nxt = [QQ0] * (len(coeffs) + 1)
        for e, c in enumerate(coeffs):
            nxt[e] += c * root
            nxt[e + 1] += c
        coeffs = nxt
    if j % 2:
        coeffs = [-c for c in coeffs]
    return coeffs


def psi_dehomogenize(P):
    """Factor a weight-homogeneous P in D_{n+1} as S * P'(-dt t).

    Returns (P', shift) with P' in D_n[s]; shift >= 0 means S = t^shift,
    shift < 0 means S = dt^(-shift).  Uses t^j dt^j = (-1)^j (s+1)...(s+j)
    and, on the dt-heavy side, an extra argument shift by nu.
    """
    sig = P.sig
    if not sig.has_t:
        raise SignatureMismatch("psi expects a D_{n+1} operator")
    row = _weight_row(sig)
    sig_s = d_n_s(sig.x_names)
    if not P.terms:
        return WeylOperator.zero(sig_s), 0
    ws = P.weights(row)
    if len(ws) > 1:
        raise NonHomogeneousInput(
            f"psi needs weight-homogeneous input, got weights {sorted(ws)}")
    (m_w,) = ws
    nu = abs(m_w)
    ts, dts = sig.t_slot, sig.dt_slot
    s_slot = sig_s.slot("s")
    n = sig.n_x
    res = {}
    for m, c in P.terms.items():
        j = min(m[ts], m[dts])
        offset = 0 if m_w <= 0 else nu
        poly = _falling_factor(j, offset)
        base = [0] * sig_s.nslots
        for i in range(n):
            base[i] = m[i]
            base[n + i] = m[sig.d_slot(i)]
        for e, coeff in enumerate(poly):
            if not coeff:
                continue
            base[s_slot] = e
            key = tuple(base)
            v = res.get(key, QQ0) + c * coeff
            if v:
                res[key] = v
            else:
                res.pop(key, None)
    out = WeylOperator(sig_s)
    out.terms = res
    return out, (nu if m_w <= 0 else -nu)


def psi_embed(P, shift=0):
    """Inverse of psi: S * P'(-dt t) expanded in D_{n+1} (for round trips)."""
    sig_s = P.sig
    sig_t = d_np1(sig_s.x_names)
    t = WeylOperator.gen(sig_t, "t")
    dt = WeylOperator.gen(sig_t, "dt")
    minus_dtt = -(dt * t)
    out = WeylOperator.zero(sig_t)
    for e in range(P.max_extra_degree("s") + 1):
        coeff = P.coeff_of_extra_power("s", e).embed(sig_t)
        if coeff.is_zero():
            continue
        out = out + coeff * minus_dtt ** e
    S = t ** shift if shift >= 0 else dt ** (-shift)
    return S * out


def ann_fs(inst, deadline=None):
    """Generators of Ann_{D_n[s]}(f^s (x) u), via sigma/tau elimination."""
    J = build_malgrange(inst)
    hom = [homogenize_w(g) for g in J.generators]
    sig_st = hom[0].sig
    sigma = WeylOperator.gen(sig_st, "sigma")
    tau = WeylOperator.gen(sig_st, "tau_h")
    Jp = IdealPresentation.make(sig_st, hom + [WeylOperator.one(sig_st) - sigma * tau])
    J2 = eliminate(Jp, ("sigma", "tau_h"), deadline=deadline, stage="sigma-tau-elimination")
    row = _weight_row(J2.sig)
    gens = []
    for g in J2.cached_gb:
        if not g.is_weight_homogeneous(row):
            raise NonHomogeneousInput(
                "internal error: element of J'' is not weight-homogeneous")
        p, _shift = psi_dehomogenize(g)
        if p.terms:
            gens.append(p)
    return IdealPresentation.make(inst.sig_s, gens)
