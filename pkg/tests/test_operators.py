"""Normal symbols, Lambda contractions, model operators, leading-term table."""

import math

import numpy as np
import pytest

from fockcalc import (
    Bergman,
    CutoffSpec,
    Dims,
    Extension,
    IDENTITY_CUTOFF,
    InsufficientNodesError,
    MOpField,
    Poly,
    Restriction,
    ScaledKernel,
    Symbol,
    TOEPLITZ_KINDS,
    bracket,
    c1_c2,
    compose,
    flat_defect_checks,
    h_gp,
    lambda_a,
    lambda_a_quadrature,
    lambda_eq,
    lambda_eq_quadrature,
    lambda_h,
    lambda_h_quadrature,
    m_op,
    rotate_symbol,
    toeplitz_flat_composite,
    toeplitz_leading,
    toeplitz_predicted_kernel,
)
from fockcalc.geometry import hermitian_eigs

from conftest import random_symbol

PI = math.pi


def _symbol_diff(a: Symbol, b: Symbol) -> float:
    return a.poly.max_coef_diff(b.poly)


# -- Symbol ------------------------------------------------------------------------


def test_symbol_construction_and_accessors():
    g = Symbol.monomial(3, 1, (2, 0), (0, 1), coef=2.0)
    assert (g.n, g.m, g.k, g.fiber_rank) == (3, 1, 2, 1)
    assert g.bidegrees() == [(2, 1)]
    assert g.degree() == 3
    assert g.parity() == 1
    assert not g.is_zero()
    z = Symbol.zero(2, 1)
    assert z.is_zero() and z.parity() is None and z.degree() == -1


def test_symbol_validation():
    with pytest.raises(ValueError, match="length"):
        Symbol.monomial(3, 1, (1,), (0, 0))
    with pytest.raises(ValueError, match="negative"):
        Symbol.monomial(2, 1, (-1,), (0,))
    dims = Dims.of(2, m=1)
    with pytest.raises(ValueError, match="tangential"):
        Symbol(dims, Poly.monomial(dims, {"z1": 1}))
    with pytest.raises(ValueError, match="primed"):
        Symbol(dims, Poly.monomial(dims, {"z'2": 1}))
    with pytest.raises(ValueError, match="dims"):
        Symbol(dims, Poly.one(Dims.of(2, m=0)))


def test_symbol_algebra():
    a = Symbol.monomial(1, 0, (1,), (0,))
    b = Symbol.monomial(1, 0, (0,), (1,), coef=3.0)
    s = a.add(b).scale(2.0)
    assert s.terms()[((1,), (0,))][0, 0] == 2.0
    assert s.terms()[((0,), (1,))][0, 0] == 6.0
    prod = a.mul(b)
    assert prod.bidegrees() == [(1, 1)]
    # matrix coefficients multiply left-to-right
    E01 = [[0.0, 1.0], [0.0, 0.0]]
    E10 = [[0.0, 0.0], [1.0, 0.0]]
    x = Symbol.monomial(1, 0, (1,), (0,), coef=E01, fiber_rank=2)
    y = Symbol.monomial(1, 0, (0,), (1,), coef=E10, fiber_rank=2)
    xy = x.mul(y).terms()[((1,), (1,))]
    yx = y.mul(x).terms()[((1,), (1,))]
    assert np.allclose(xy, [[1.0, 0.0], [0.0, 0.0]])
    assert np.allclose(yx, [[0.0, 0.0], [0.0, 1.0]])


def test_symbol_adjoint():
    g = Symbol.monomial(1, 0, (2,), (1,), coef=[[1.0, 2.0j], [0.0, 1.0]], fiber_rank=2)
    ga = g.adjoint()
    assert ga.bidegrees() == [(1, 2)]
    assert np.allclose(ga.terms()[((1,), (2,))], [[1.0, 0.0], [-2.0j, 1.0]])
    assert _symbol_diff(ga.adjoint(), g) == 0.0
    h = Symbol.monomial(1, 0, (1,), (0,), coef=[[0, 1], [0, 0]], fiber_rank=2)
    assert _symbol_diff(g.mul(h).adjoint(), h.adjoint().mul(g.adjoint())) == 0.0


def test_symbol_evaluate():
    g = Symbol.monomial(2, 1, (2,), (1,), coef=2.0)
    w = 0.3 + 0.4j
    got = g.evaluate([w])[0, 0]
    assert abs(got - 2.0 * w**2 * np.conj(w)) < 1e-15
    split = g.evaluate_split([w], [1.0 - 1.0j])[0, 0]
    assert abs(split - 2.0 * w**2 * (1.0 - 1.0j)) < 1e-15
    with pytest.raises(ValueError):
        g.evaluate([w, w])


def test_symbol_to_poly_slots():
    g = Symbol.monomial(2, 1, (1,), (2,))
    unprimed = g.to_poly("unprimed")
    primed = g.to_poly("primed")
    w, wp = 0.2 + 0.1j, -0.5 + 0.3j
    # unprimed slot reads the unprimed normal coordinate of Z
    vu = unprimed.evaluate([0.9, w], [0.0, 0.0])[0, 0]
    assert abs(vu - w * np.conj(w) ** 2) < 1e-15
    # primed slot reads the primed normal coordinate of Z'
    vp = primed.evaluate([0.0, 0.0], [0.9, wp])[0, 0]
    assert abs(vp - wp * np.conj(wp) ** 2) < 1e-15
    with pytest.raises(ValueError):
        g.to_poly("sideways")


def test_symbol_json_round_trip():
    g = Symbol.monomial(2, 1, (2,), (1,), coef=[[1.0, 1.0j], [0.0, 2.0]], fiber_rank=2)
    d = g.to_json_dict()
    assert set(d) == {"n", "m", "fiber_rank", "terms"}
    back = Symbol.from_json_dict(d)
    assert _symbol_diff(back, g) == 0.0
    with pytest.raises(ValueError, match="unknown symbol keys"):
        Symbol.from_json_dict({**d, "extra": 1})
    bad = {**d, "terms": [{**d["terms"][0], "note": "x"}]}
    with pytest.raises(ValueError, match="unknown symbol term keys"):
        Symbol.from_json_dict(bad)


def test_rotate_symbol(rng):
    # unitary substitution: lambda_eq is invariant, lambda_h is equivariant
    theta = 0.7
    U = np.array(
        [
            [math.cos(theta), -math.sin(theta)],
            [math.sin(theta), math.cos(theta)],
        ],
        dtype=complex,
    )
    for _ in range(5):
        g = random_symbol(rng, 2, 0, max_deg=3)
        gU = rotate_symbol(g, U)
        assert np.max(np.abs(lambda_eq(gU) - lambda_eq(g))) < 1e-12
        lhs = lambda_h(gU)
        rhs = rotate_symbol(lambda_h(g), U)
        assert _symbol_diff(lhs, rhs) < 1e-12
    with pytest.raises(ValueError, match="2x2"):
        rotate_symbol(Symbol.monomial(2, 0, (1, 0), (0, 0)), np.eye(3))


# -- cutoff profiles ------------------------------------------------------------------


def test_cutoff_profile_values():
    c = CutoffSpec(r_perp=2.0)
    assert not c.is_identity
    assert c.rho(0.0) == 1.0
    assert c.rho(0.25) == 1.0
    assert c.rho(0.5) == 0.0
    assert c.rho(1.7) == 0.0
    assert abs(c.rho(0.375) - math.exp(1.0 - 1.0 / (1.0 - 0.25))) < 1e-15
    arr = c.rho(np.array([0.1, 0.375, 0.9]))
    assert arr.shape == (3,)
    assert arr[0] == 1.0 and arr[2] == 0.0
    assert IDENTITY_CUTOFF.is_identity and IDENTITY_CUTOFF.rho(7.0) == 1.0


def test_cutoff_validation():
    with pytest.raises(ValueError):
        CutoffSpec(r_perp=0.0)
    with pytest.raises(ValueError):
        CutoffSpec(profile="hard_edge")


# -- Lambda contractions ---------------------------------------------------------------


def test_lambda_eq_goldens():
    g = Symbol.monomial(1, 0, (1,), (1,))
    assert abs(lambda_eq(g)[0, 0] - 1.0 / PI) < 1e-15
    assert np.max(np.abs(lambda_eq(Symbol.monomial(1, 0, (2,), (1,))))) == 0.0
    g2 = Symbol.monomial(2, 0, (2, 0), (2, 0))
    assert abs(lambda_eq(g2)[0, 0] - 2.0 / PI**2) < 1e-15
    const = Symbol.monomial(1, 0, (0,), (0,), coef=5.0)
    assert lambda_eq(const)[0, 0] == 5.0


def test_lambda_h_goldens():
    g = Symbol.monomial(1, 0, (2,), (1,))
    out = lambda_h(g)
    assert out.bidegrees() == [(1, 0)]
    assert abs(out.terms()[((1,), (0,))][0, 0] - 2.0 / PI) < 1e-15
    pure = lambda_h(Symbol.monomial(1, 0, (2,), (0,)))
    assert abs(pure.terms()[((2,), (0,))][0, 0] - 1.0) < 1e-15
    assert lambda_h(Symbol.monomial(1, 0, (1,), (1,))).is_zero()
    # antiholomorphic-dominant bidegrees are dropped entirely
    assert lambda_h(Symbol.monomial(1, 0, (1,), (2,))).is_zero()


def test_lambda_a_goldens():
    g = Symbol.monomial(1, 0, (1,), (2,))
    out = lambda_a(g)
    assert out.bidegrees() == [(0, 1)]
    assert abs(out.terms()[((0,), (1,))][0, 0] - 2.0 / PI) < 1e-15
    assert lambda_a(Symbol.monomial(1, 0, (2,), (1,))).is_zero()


def test_lambda_duality(rng):
    for _ in range(6):
        g = random_symbol(rng, 2, 1, fiber_rank=2, max_deg=3)
        lhs = lambda_a(g)
        rhs = lambda_h(g.adjoint()).adjoint()
        assert _symbol_diff(lhs, rhs) < 1e-13
        eq_dual = lambda_eq(g.adjoint())
        assert np.max(np.abs(eq_dual - lambda_eq(g).conj().T)) < 1e-13


def test_lambda_quadrature_cross_checks(rng):
    g = random_symbol(rng, 2, 1, max_deg=3)
    assert np.max(np.abs(lambda_eq(g) - lambda_eq_quadrature(g))) < 1e-10
    z = np.array([0.4 - 0.2j])
    got_h = lambda_h_quadrature(g, z)
    want_h = lambda_h(g).evaluate_split(z, np.zeros(1))
    assert np.max(np.abs(got_h - want_h)) < 1e-10
    got_a = lambda_a_quadrature(g, z)
    want_a = lambda_a(g).evaluate_split(np.zeros(1), z)
    assert np.max(np.abs(got_a - want_a)) < 1e-10


def test_lambda_quadrature_rank_two():
    g = Symbol.monomial(2, 0, (1, 1), (0, 1), coef=[[1.0, 2.0], [0.5j, 0.0]], fiber_rank=2)
    z = np.array([0.3, -0.6j])
    got = lambda_h_quadrature(g, z, nodes=24)
    want = lambda_h(g).evaluate_split(z, np.zeros(2))
    assert np.max(np.abs(got - want)) < 1e-10


def test_lambda_eq_positive_on_squares(rng):
    for _ in range(5):
        g = random_symbol(rng, 2, 0, fiber_rank=2, max_deg=2)
        mat = lambda_eq(g.adjoint().mul(g))
        assert np.max(np.abs(mat - mat.conj().T)) < 1e-12
        eigs = hermitian_eigs(mat)
        assert eigs[0] > -1e-12


# -- bracket fields ---------------------------------------------------------------------


def test_bracket_field():
    g = Symbol.monomial(1, 0, (0,), (1,))
    assert abs(bracket(g, 1.0)([1.0])[0, 0] - 1.0) < 1e-15
    assert abs(bracket(g, 4.0)([1.0])[0, 0] - 2.0) < 1e-15
    bump = bracket(g, 4.0, CutoffSpec(r_perp=1.0))
    assert bump([0.6])[0, 0] == 0.0
    assert abs(bump([0.2])[0, 0] - 0.4) < 1e-15


def test_bracket_polynomial():
    g = Symbol.monomial(1, 0, (2,), (0,))
    poly = bracket(g, 9.0).polynomial()
    w = 0.5 + 0.25j
    assert abs(poly.evaluate([w], [0.0])[0, 0] - 9.0 * w**2) < 1e-14
    with pytest.raises(ValueError):
        bracket(g, 4.0, CutoffSpec()).polynomial()
    with pytest.raises(ValueError):
        bracket(g, 0.5)


# -- model operators ---------------------------------------------------------------------


def test_m_op_direct_golden():
    g = Symbol.monomial(1, 0, (0,), (1,))
    op = m_op(g, p=4.0)
    assert isinstance(op, ScaledKernel)
    assert op.p == 4.0 and op.prefactor == 1.0  # p^m with m = 0
    Z = [0.3 + 0.1j]
    from fockcalc import kernel_eval

    want = np.conj(2.0 * Z[0]) * kernel_eval(Extension(1, 0), [2.0 * Z[0]], [])
    assert abs(op.evaluate(Z, [])[0, 0] - want) < 1e-14


def test_m_op_adjoint_prefactor():
    g = Symbol.monomial(2, 1, (0,), (1,))
    direct = m_op(g, p=4.0)
    adj = m_op(g, p=4.0, variant="adjoint")
    assert direct.prefactor == 4.0  # p^m, m = 1
    assert adj.prefactor == 16.0  # p^n, n = 2
    assert adj.expr.kind == Restriction(2, 1)


def test_m_op_errors():
    g = Symbol.monomial(1, 0, (0,), (1,))
    with pytest.raises(ValueError):
        m_op(g, p=0.5)
    with pytest.raises(ValueError, match="dimension mismatch"):
        m_op(g, p=2.0, n=2, m=0)
    with pytest.raises(ValueError, match="variant"):
        m_op(g, p=2.0, variant="sideways")
    with pytest.raises(ValueError, match="symbolic"):
        m_op(g, p=2.0, cutoff=CutoffSpec(), symbolic=True)


def test_m_op_bump_field():
    g = Symbol.monomial(2, 1, (1,), (0,))
    op = m_op(g, p=1.0, cutoff=CutoffSpec(r_perp=1.0))
    assert isinstance(op, MOpField)
    inside = op.evaluate([0.5, 0.1], [0.4])
    base = op.base.evaluate([0.5, 0.1], [0.4])
    assert np.max(np.abs(inside - base)) < 1e-15  # |w| = 0.1 on the plateau
    assert np.max(np.abs(op.evaluate([0.5, 0.9], [0.4]))) == 0.0  # |w| = 0.9 cut off
    adj = m_op(g, p=1.0, cutoff=CutoffSpec(r_perp=1.0), variant="adjoint")
    # adjoint reads the normal radius off the primed argument
    assert np.max(np.abs(adj.evaluate([0.4], [0.5, 0.9]))) == 0.0


def test_m_op_adjoint_identity(rng):
    # (adjoint-variant kernel).adjoint() == p^(n-m) * direct kernel of g*
    for n, m in ((1, 0), (2, 1), (3, 1)):
        g = random_symbol(rng, n, m, fiber_rank=2, max_deg=2)
        p = 4.0
        lhs = m_op(g, p=p, variant="adjoint").adjoint()
        rhs = m_op(g.adjoint(), p=p)
        worst = 0.0
        for _ in range(6):
            Z = rng.normal(size=n) + 1j * rng.normal(size=n)
            Zp = rng.normal(size=m) + 1j * rng.normal(size=m)
            a = lhs.evaluate(Z, Zp)
            b = p ** (n - m) * rhs.evaluate(Z, Zp)
            worst = max(worst, float(np.max(np.abs(a - b))))
        assert worst < 1e-10, f"(n,m)=({n},{m}): {worst:.2e}"


# -- the h^2 fibre integral -----------------------------------------------------------


def test_h_gp_identity_goldens():
    g = Symbol.monomial(1, 0, (0,), (1,))
    res = h_gp(g, p=1.0)
    assert abs(res.h_sq[0, 0] - 1.0 / PI) < 1e-12
    assert res.max_abs_diff < 1e-12
    res4 = h_gp(g, p=4.0)
    assert abs(res4.leading[0, 0] - 1.0 / (4.0 * PI)) < 1e-15
    assert res4.max_abs_diff < 1e-12


def test_h_gp_identity_matches_contraction(rng):
    for n, m in ((1, 0), (2, 0), (2, 1)):
        g = random_symbol(rng, n, m, max_deg=2)
        res = h_gp(g, p=2.0)
        assert res.max_abs_diff < 1e-12, f"(n,m)=({n},{m}): {res.max_abs_diff:.2e}"


def test_h_gp_bump_below_identity():
    g = Symbol.monomial(1, 0, (0,), (1,))
    ident = h_gp(g, p=4.0)
    bump = h_gp(g, p=4.0, cutoff=CutoffSpec(r_perp=1.0))
    assert 0.0 < bump.h_sq[0, 0].real < ident.h_sq[0, 0].real
    # at large p the bump misses almost nothing
    tight = h_gp(g, p=64.0, cutoff=CutoffSpec(r_perp=1.0))
    assert tight.max_abs_diff < 1e-6


def test_h_gp_constant_symbol():
    g = Symbol.monomial(2, 2, (), (), coef=2.0)
    res = h_gp(g, p=4.0)
    assert res.h_sq[0, 0] == 4.0 and res.max_abs_diff == 0.0


def test_h_gp_errors():
    g = Symbol.monomial(1, 0, (0,), (1,))
    with pytest.raises(ValueError):
        h_gp(g, p=0.25)
    with pytest.raises(InsufficientNodesError):
        h_gp(g, grid=4)


# -- norm constants ----------------------------------------------------------------------


def test_c1_c2():
    g = Symbol.monomial(1, 0, (0,), (1,))
    c1, c2 = c1_c2(g)
    assert abs(c1 - 1.0 / math.sqrt(PI)) < 1e-12
    assert abs(c2 - 1.0 / math.sqrt(PI)) < 1e-12
    c1b, _ = c1_c2(g.scale(2.0))
    assert abs(c1b - 2.0 / math.sqrt(PI)) < 1e-12
    c1k, c2k = c1_c2(g, kappa_samples=[1.0, 4.0])
    assert abs(c1k - 2.0 / math.sqrt(PI)) < 1e-12
    assert abs(c2k - 1.0 / math.sqrt(PI)) < 1e-12
    with pytest.raises(ValueError):
        c1_c2(g, kappa_samples=[])
    with pytest.raises(ValueError):
        c1_c2(g, kappa_samples=[-1.0])


# -- leading-term dispatch ------------------------------------------------------------


def test_toeplitz_leading_dispatch():
    even = Symbol.monomial(1, 0, (1,), (1,))
    odd = Symbol.monomial(1, 0, (2,), (1,))
    yy = toeplitz_leading("YY", even)
    assert abs(yy[0, 0] - 1.0 / PI) < 1e-15
    # parity reroute: an odd symbol fed to the even kind lands on the odd one
    out = toeplitz_leading("XY_even", odd)
    assert out.bidegrees() == [(1, 0)]
    out2 = toeplitz_leading("YX_odd", even.mul(even))
    assert out2.is_zero() or all(a == b for a, b in out2.bidegrees())
    mixed = even.add(odd)
    with pytest.raises(ValueError, match="mixed parity"):
        toeplitz_leading("XY_even", mixed)
    with pytest.raises(ValueError, match="unknown kind"):
        toeplitz_leading("XX", even)
    assert "YY" in TOEPLITZ_KINDS and len(TOEPLITZ_KINDS) == 5


def test_toeplitz_odd_kinds_have_no_constant_term():
    for hol, antihol in (((1,), (0,)), ((2,), (1,)), ((3,), (0,))):
        g = Symbol.monomial(2, 1, hol, antihol)
        out = toeplitz_leading("XY_odd", g)
        zero_key = ((0,), (0,))
        assert zero_key not in out.terms()
        out_a = toeplitz_leading("YX_odd", g.adjoint())
        assert zero_key not in out_a.terms()


def _composite_matches_prediction(family: str, g: Symbol) -> float:
    got = toeplitz_flat_composite(family, g)
    want = toeplitz_predicted_kernel(family, g)
    assert got.kind == want.kind
    return got.numerator.max_coef_diff(want.numerator)


def test_toeplitz_composites_match_predictions():
    worst = 0.0
    for n, m in ((1, 0), (2, 1)):
        for a in range(4):
            for b in range(4 - a):
                g = Symbol.monomial(n, m, (a,), (b,))
                for family in ("YY", "XY", "YX"):
                    worst = max(worst, _composite_matches_prediction(family, g))
    assert worst < 1e-12, f"worst deviation {worst:.2e}"


def test_toeplitz_composites_rank_two():
    g = Symbol.monomial(1, 0, (2,), (1,), coef=[[1.0, 2.0j], [0.0, -1.0]], fiber_rank=2)
    for family in ("YY", "XY", "YX"):
        assert _composite_matches_prediction(family, g) < 1e-12
    with pytest.raises(ValueError, match="unknown family"):
        toeplitz_flat_composite("ZZ", g)
    with pytest.raises(ValueError, match="unknown family"):
        toeplitz_predicted_kernel("ZZ", g)


# -- flat defect identities ------------------------------------------------------------


def test_flat_defects_vanish():
    records = flat_defect_checks(max_n=3)
    assert len(records) == 30
    assert all(r.deviation == 0.0 for r in records)
    names = {r.name for r in records}
    assert len(names) == 2


def test_flat_defect_record_shape():
    records = flat_defect_checks(max_n=2)
    trans = next(r for r in records if r.l is not None)
    d = trans.to_json_dict()
    assert set(d) == {"name", "n", "m", "deviation", "l"}
    adj = next(r for r in records if r.l is None)
    assert set(adj.to_json_dict()) == {"name", "n", "m", "deviation"}
