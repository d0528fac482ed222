from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from laxnovikov.diffalg import DiffPoly, U
from laxnovikov.errors import InsufficientTruncation, NotMonic, OrderNotDivisible
from laxnovikov.psdo import (PsdOp, gbinom, op_commutator, op_diff_part, op_inverse, op_minus_part,
                             op_mul, op_pow, op_pow_frac, op_residue, op_root, op_sigma2)

u1, u2, u3 = (DiffPoly.u(k) for k in range(1, 4))
D = PsdOp.d()
L = PsdOp.lax()
ONE = PsdOp.identity()


def poly_op(p):
    return PsdOp.from_poly(p)


def test_generalized_binomial():
    assert gbinom(3, 2) == 3
    assert gbinom(2, 3) == 0
    assert gbinom(-1, 4) == 1
    assert gbinom(-2, 3) == -4
    assert gbinom(Fraction(1, 2).numerator, 0) == 1


def test_leibniz_first_order():
    assert op_mul(D, poly_op(U)) == PsdOp({1: U, 0: u1})


def test_inverse_d_times_u():
    prod = op_mul(PsdOp.d(-1), poly_op(U))
    assert prod.coeff(-1) == U
    assert prod.coeff(-2) == -u1
    assert prod.coeff(-3) == u2
    # multiplying by d on the left recovers u on the certified range
    back = op_mul(D, prod)
    assert back.agrees_with(poly_op(U))
    assert back.floor is not None


def test_l_squared():
    expected = PsdOp({4: 1, 2: U * 2, 1: u1 * 2, 0: u2 + U * U})
    assert op_mul(L, L) == expected


def test_inverse_examples():
    assert op_inverse(D) == PsdOp({-1: 1}, op_inverse(D).floor)
    assert op_inverse(D).agrees_with(PsdOp.d(-1))
    inv = op_inverse(L)
    assert inv.coeff(-2) == DiffPoly.constant(1)
    assert inv.coeff(-3) == DiffPoly()
    assert inv.coeff(-4) == -U
    assert op_mul(L, inv).agrees_with(ONE)
    assert op_mul(inv, L).agrees_with(ONE)
    with pytest.raises(NotMonic):
        op_inverse(PsdOp({1: U, 0: 1}))


def test_root_examples():
    assert op_root(PsdOp.d(2), 2).agrees_with(D)
    y = op_root(L, 2)
    assert y.coeff(1) == DiffPoly.constant(1)
    assert y.coeff(0) == DiffPoly()
    assert y.coeff(-1) == U.scale(Fraction(1, 2))
    assert y.coeff(-2) == u1.scale(Fraction(-1, 4))
    assert op_mul(y, y).agrees_with(L)
    with pytest.raises(OrderNotDivisible):
        op_root(L, 3)
    with pytest.raises(NotMonic):
        op_root(PsdOp({2: U}), 2)


def test_cube_root_of_third_order_operator():
    x = PsdOp({3: 1, 1: U, 0: u1})
    y = op_root(x, 3)
    assert op_pow(y, 3).agrees_with(x)


def test_fractional_power_residues():
    assert op_residue(op_pow_frac(L, -1, 2)) == DiffPoly.constant(1)
    assert op_residue(op_pow_frac(L, 3, 2)) == (u2 + U * U * 3).scale(Fraction(1, 8))
    assert op_residue(L) == DiffPoly()
    half = op_pow_frac(L, 1, 2)
    assert op_pow(half, 2).agrees_with(L)


def test_parts_and_sigma2():
    p = op_diff_part(op_pow_frac(L, 3, 2))
    assert p == PsdOp({3: 1, 1: U.scale(Fraction(3, 2)), 0: u1.scale(Fraction(3, 4))})
    assert p.exact
    assert op_sigma2(op_inverse(L)) == PsdOp({-2: 1})
    x = op_pow_frac(L, 5, 2)
    recombined = op_diff_part(x) + op_minus_part(x)
    assert recombined == x


def test_truncation_guards():
    coarse = op_root(L, 2, depth=2)
    assert coarse.floor == -1
    with pytest.raises(InsufficientTruncation):
        op_sigma2(coarse)
    with pytest.raises(InsufficientTruncation):
        op_residue(PsdOp({3: 1}, 0))
    with pytest.raises(InsufficientTruncation):
        op_diff_part(PsdOp({3: 1}, 1))


def test_commutator_examples():
    assert op_commutator(L, L).is_zero()
    assert op_commutator(D, poly_op(U)) == poly_op(u1)
    p = op_diff_part(op_pow_frac(L, 3, 2))
    expected = (u3 + U * u1 * 6).scale(Fraction(1, 4))
    assert op_commutator(p, L) == poly_op(expected)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_commutator_is_twice_derived_residue(k):
    power = op_pow_frac(L, 2 * k + 1, 2)
    comm = op_commutator(op_diff_part(power), L)
    assert comm.exact
    assert comm == poly_op(op_residue(power).derive().scale(2))


def test_half_power_commutes_with_l():
    half = op_pow_frac(L, 1, 2)
    comm = op_commutator(half, L)
    assert comm.is_zero()
    assert comm.floor is not None


def test_text_round_trip():
    for op in (L, op_root(L, 2), op_inverse(L, depth=5), PsdOp(), PsdOp({}, -3)):
        assert PsdOp.parse(str(op)) == op


def test_floor_is_certified():
    # a shallow computation agrees with a deep one wherever the shallow one claims validity
    shallow = op_pow_frac(L, 3, 2, depth=6)
    deep = op_pow_frac(L, 3, 2, depth=14)
    assert shallow.floor > deep.floor
    assert shallow.agrees_with(deep)


# -- randomized associativity ----------------------------------------------------

small_polys = st.sampled_from([U, u1, u2, U * U, DiffPoly.constant(2), U * u1, DiffPoly()])
ops = st.builds(
    lambda top, a, b, c: PsdOp({top: 1, top - 1: a, top - 2: b, top - 3: c}),
    st.integers(-1, 2), small_polys, small_polys, small_polys)


@settings(max_examples=30, deadline=None)
@given(ops, ops, ops)
def test_associativity_on_retained_range(x, y, z):
    left = op_mul(op_mul(x, y, 8), z, 8)
    right = op_mul(x, op_mul(y, z, 8), 8)
    assert left.agrees_with(right)


@settings(max_examples=20, deadline=None)
@given(ops)
def test_inverse_property(x):
    inv = op_inverse(x, 8)
    assert op_mul(x, inv, 8).agrees_with(ONE)
