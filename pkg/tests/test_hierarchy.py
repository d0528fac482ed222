from fractions import Fraction

import mpmath
import pytest

from laxnovikov.diffalg import DiffPoly, ProfileSample, U
from laxnovikov.errors import PoleAt, PreconditionViolated
from laxnovikov.hierarchy import (StationaryCoeffs, elementary_symmetric, gd_r_recur, gd_r_residue,
                                  hierarchy_rhs, stationary_poly, stationary_residual)
from laxnovikov.soliton import SolitonProfile, SolitonSpec

u1, u2, u3, u4, u5 = (DiffPoly.u(k) for k in range(1, 6))


def zero_profile(x):
    return ProfileSample(x, (0,) * 10)


def test_recurrence_examples():
    assert gd_r_recur(0) == DiffPoly.constant(Fraction(1, 2))
    assert gd_r_recur(1) == U.scale(Fraction(-1, 4))
    assert gd_r_recur(2) == (u2 + U * U * 3).scale(Fraction(1, 16))
    r7 = (u4 + u1 * u1 * 5 + U * u2 * 10 + U * U * U * 10).scale(Fraction(-1, 64))
    assert gd_r_recur(3) == r7


@pytest.mark.parametrize("k", range(5))
def test_recurrence_agrees_with_residue(k):
    assert gd_r_residue(k) == gd_r_recur(k)


def test_negative_level_rejected():
    with pytest.raises(ValueError):
        gd_r_recur(-1)


def test_flows():
    assert hierarchy_rhs(0) == u1
    assert hierarchy_rhs(1) == (u3 + U * u1 * 6).scale(Fraction(1, 4))
    t5 = (u5 + U * u3 * 10 + u1 * u2 * 20 + U * U * u1 * 30).scale(Fraction(1, 16))
    assert hierarchy_rhs(2) == t5


def test_stationary_poly_one_soliton_form():
    # C(-u/4) + R_5 for C = 3, which is d_3 = C, d_5 = 1
    expected = U.scale(Fraction(-3, 4)) + (u2 + U * U * 3).scale(Fraction(1, 16))
    assert stationary_poly(StationaryCoeffs({3: 3, 5: 1})) == expected
    # the s-form s = (-C, 1) is the same equation up to sign
    assert stationary_poly(StationaryCoeffs.from_s([-3, 1])) == -expected
    assert stationary_poly(StationaryCoeffs({})) == DiffPoly()


def test_coefficient_forms():
    c = StationaryCoeffs.from_s([4, -5, 1])
    assert c.d == {3: 4, 5: 5, 7: 1}
    assert c.s() == [4, -5, 1]
    assert c.N == 2
    with pytest.raises(PreconditionViolated):
        StationaryCoeffs.from_d([1, 2]).s()
    with pytest.raises(ValueError):
        StationaryCoeffs({2: 1})


def test_elementary_symmetric():
    assert elementary_symmetric([1, 2]).s() == [4, -5, 1]
    assert elementary_symmetric([Fraction(3, 2)]).s() == [Fraction(-9, 4), 1]
    # conjugate pair gives real coefficients: (x - 2i)(x + 2i) with squares of 1+i, 1-i
    assert elementary_symmetric([1 + 1j, 1 - 1j]).s() == [4, 0, 1]
    with pytest.raises(PreconditionViolated):
        elementary_symmetric([1 + 1j])


def test_residual_one_soliton_at_center():
    poly = stationary_poly(StationaryCoeffs.from_s([-1, 1]))
    sample = ProfileSample(0, (2, 0, -4))
    assert stationary_residual(poly, lambda x: sample, [0]).max_abs == 0


def test_residual_one_soliton_against_finite_differences():
    f = lambda x: 2 / mpmath.cosh(x) ** 2  # noqa: E731
    poly = stationary_poly(StationaryCoeffs.from_s([-1, 1]))

    def profile(x):
        x = mpmath.mpf(x)
        return ProfileSample(x, tuple(mpmath.diff(f, x, k) for k in range(3)))

    report = stationary_residual(poly, profile, [-3, -1, 0.5, 2])
    assert report.max_abs < 1e-10


def test_residual_zero_profile():
    poly = stationary_poly(StationaryCoeffs.from_s([4, -5, 1]))
    report = stationary_residual(poly, zero_profile, [-1, 0, 1])
    assert report.max_abs == 0 and report.max_rel == 0


def test_residual_two_soliton_and_sensitivity():
    profile = SolitonProfile(SolitonSpec((1, 2), (1, -1)))
    grid = [-20 + 0.4 * i for i in range(101)]
    good = stationary_residual(stationary_poly(StationaryCoeffs.from_s([4, -5, 1])),
                               lambda x: profile.sample(x, 4), grid)
    assert good.max_rel <= 1e-9
    bad = stationary_residual(stationary_poly(StationaryCoeffs.from_s([4, "-5.01", 1])),
                              lambda x: profile.sample(x, 4), grid)
    assert bad.max_rel > 1e-4
    d = good.to_dict()
    assert d["grid"] == {"min": -20.0, "max": 20.0} and d["samples"] == 101


def test_residual_poles():
    def profile(x):
        if x == 0:
            raise PoleAt(0.0)
        return zero_profile(x)

    with pytest.raises(PoleAt):
        stationary_residual(U, profile, [-1, 0, 1])
    report = stationary_residual(U, profile, [-1, 0, 1], skip_poles=True)
    assert report.poles == [0.0]
