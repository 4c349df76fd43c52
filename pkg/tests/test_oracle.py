"""The verification oracle: exact log-section actions and numeric quadrature."""
import math
import random

import mpmath
import pytest

from holozeta import (
    QQ,
    DifferenceOperator,
    PhiSpec,
    UPoly,
    WeylOperator,
    ann_fs,
    apply_log_section,
    bfunction,
    build_malgrange,
    d_n,
    functional_operator,
    numeric_zeta,
    residual_check,
    tau_substitute,
)
from holozeta.oracle import LogSection, OracleError, annihilates

W = WeylOperator


def rand_op(sig, rng, max_terms=2, max_deg=2):
    out = W.zero(sig)
    for _ in range(rng.randint(1, max_terms)):
        mono = [0] * sig.nslots
        for _ in range(rng.randint(0, max_deg)):
            mono[rng.randrange(sig.nslots)] += 1
        c = rng.randint(-3, 3)
        if c:
            out = out + W(sig, {tuple(mono): QQ(c)})
    return out


# ---------------------------------------------------------------------------
# symbolic side
# ---------------------------------------------------------------------------

def test_euler_kills_xs(inst_x):
    sig_s = inst_x.sig_s
    x, dx, s = (W.gen(sig_s, n) for n in ("x", "dx", "s"))
    assert annihilates(x * dx - s, LogSection.fs(inst_x))


def test_dx_on_log_section(inst_cusp):
    # dx (f^s log f) = s f_x f^{-1} f^s log f + f_x f^{-1} f^s
    sig_s = inst_cusp.sig_s
    dx = W.gen(sig_s, "dx")
    out = apply_log_section(dx, LogSection.fs(inst_cusp, j=1))
    fx = inst_cusp.f.x_derivative(0).embed(sig_s)
    s = W.gen(sig_s, "s")
    assert set(out.entries) == {0, 1}
    op1, k1 = out.entries[1]
    op0, k0 = out.entries[0]
    assert k1 == 1 and op1 == s * fx
    assert k0 == 1 and op0 == fx


def test_tau_substitution_intertwines_action(inst_cusp):
    # tau(P)(f^s (x) v) = f^s (x) (P v) for random P, v
    rng = random.Random(31)
    sig = inst_cusp.sig
    for _ in range(10):
        P = rand_op(sig, rng)
        v = rand_op(sig, rng)
        section_v = LogSection.fs(inst_cusp, mult=v)
        lhs = apply_log_section(tau_substitute(P, inst_cusp.f), section_v)
        rhs = LogSection.fs(inst_cusp, mult=P * v)
        assert (lhs - rhs).is_zero()


def test_malgrange_annihilates_fs(inst_cusp, inst_gamma, inst_ex3):
    for inst in (inst_cusp, inst_gamma, inst_ex3):
        J = build_malgrange(inst)
        section = LogSection.fs(inst)
        for g in J.generators:
            assert annihilates(g, section)


def test_linearity_and_composition(inst_cusp):
    rng = random.Random(37)
    sig_s = inst_cusp.sig_s
    v = LogSection.fs(inst_cusp, j=1)
    for _ in range(10):
        P, Q = rand_op(sig_s, rng), rand_op(sig_s, rng)
        both = apply_log_section(P + Q, v)
        sep = apply_log_section(P, v) + apply_log_section(Q, v)
        assert (both - sep).is_zero()
        comp = apply_log_section(P * Q, v)
        nested = apply_log_section(P, apply_log_section(Q, v))
        assert (comp - nested).is_zero()


def test_functional_identity_is_oracle_checked(inst_xsq):
    ann = ann_fs(inst_xsq)
    b = bfunction(ann, inst_xsq.f)
    eqn = functional_operator(ann, inst_xsq.f, b)
    lhs = apply_log_section(eqn.P0, LogSection.fs(inst_xsq, mult=inst_xsq.f))
    rhs = apply_log_section(b.as_operator(inst_xsq.sig_s), LogSection.fs(inst_xsq))
    assert (lhs - rhs).is_zero()


def test_vanishing_m_reported(inst_x):
    v = LogSection.fs(inst_x)
    sig_s = inst_x.sig_s
    x, dx, s = (W.gen(sig_s, n) for n in ("x", "dx", "s"))
    out = apply_log_section(x * dx - s, v)
    assert out.vanishing_m() == 0
    nonzero = apply_log_section(dx, v)
    assert nonzero.vanishing_m() is None


def test_numeric_section_mode(inst_cusp):
    # numeric-exponent sections only admit D_n operators
    w = LogSection.fs(inst_cusp, symbolic=False, a=QQ(1, 6))
    sig = inst_cusp.sig
    x, y, dx, dy = (W.gen(sig, n) for n in ("x", "y", "dx", "dy"))
    # Euler relation specializes at s = 1/6
    op = 2 * x * dx + 3 * y * dy - 1
    assert annihilates(op, w)


# ---------------------------------------------------------------------------
# numeric side
# ---------------------------------------------------------------------------

def test_numeric_zeta_gamma_values(inst_gamma):
    phi = PhiSpec("exponential")
    zv = numeric_zeta(inst_gamma.f, phi, [0, 1], tol=1e-8, box=40.0)
    assert abs(zv.values[0] - 1.0) < 1e-8
    assert abs(zv.values[1] - 1.0) < 1e-8


def test_numeric_zeta_two_resolutions(inst_ex3):
    phi = PhiSpec("one_sided_exp_inv")
    a = numeric_zeta(inst_ex3.f, phi, [0, 1, 2], tol=1e-8, box=60.0)
    b = numeric_zeta(inst_ex3.f, phi, [0, 1, 2], tol=1e-8, box=80.0)
    for va, vb in zip(a.values, b.values):
        assert abs(va - vb) <= 1e-8 * max(1.0, abs(va))


def test_numeric_zeta_rejects():
    sig = d_n(("x",))
    x = W.gen(sig, "x")
    with pytest.raises(OracleError):
        numeric_zeta(x, PhiSpec("exponential"), [QQ(-1)])
    with pytest.raises(ValueError):
        PhiSpec("nonsense")


def test_numeric_zeta_empty_region_is_zero():
    # f = -x^2 - 1 < 0 everywhere: Z vanishes identically on the grid
    sig = d_n(("x",))
    x = W.gen(sig, "x")
    f = -(x * x) - 1
    zv = numeric_zeta(f, PhiSpec("gaussian"), [0, 1, 2], box=8.0)
    assert all(abs(v) < 1e-12 for v in zv.values)


def test_residual_check_gamma_closed_form():
    op = DifferenceOperator({1: UPoly.one(), 0: UPoly((-1, -1))})
    grid = [(i, float(mpmath.gamma(i + 1))) for i in range(0, 8)]
    assert residual_check([op], grid) < 1e-12


def test_residual_check_unit_sanity():
    unit = DifferenceOperator({0: UPoly.one()})
    grid = [(i, float(mpmath.gamma(i + 1))) for i in range(0, 4)]
    assert residual_check([unit], grid) == 1.0


def test_residual_check_guards():
    op = DifferenceOperator({3: UPoly.one(), 0: UPoly.one()})
    grid = [(0, 1.0), (1, 1.0)]
    with pytest.raises(OracleError):
        residual_check([op], grid)
    with pytest.raises(OracleError):
        residual_check([op], [(0, 1.0), (2, 1.0), (3, 1.0), (4, 1.0)])
