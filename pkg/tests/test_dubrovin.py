import cmath
import random

import numpy as np
import pytest

from laxnovikov.diffalg import ProfileSample
from laxnovikov.dubrovin import (DegenerateCase, DubrovinState, QuadPencil, classify, conserved_product,
                                 degenerate_determinant, dubrovin_rhs, expected_product, find_real_zero,
                                 integrate_dubrovin, integrate_on_grid, m_data, pencil_roots_along,
                                 quadratic_roots, sqrt_branch)
from laxnovikov.errors import (BranchViolation, NoSignChange, PoleInM, PreconditionViolated,
                               RootCollision)
from laxnovikov.soliton import SolitonProfile, SolitonSpec, psi_eval

ASYM = SolitonSpec((1, 2), (3, -0.2))


def zero_profile(x):
    return ProfileSample(x, (0,) * 8)


def soliton_pencil(spec):
    prof = SolitonProfile(spec)
    c = [complex(a) ** 2 for a in spec.alphas]
    d3, d5 = (c[0] * c[1]).real, (c[0] + c[1]).real
    return QuadPencil(lambda x: prof.sample(x, 4), d3, d5)


# -- roots and pencil --------------------------------------------------------------

@pytest.mark.parametrize("d3, d5, tag, roots", [
    (4, 5, "distinct-positive", (1, 4)),
    (9, 6, "degenerate-equal", (3, 3)),
    (0, 7, "has-zero", (0, 7)),
    (2, -1, "conjugate-pair", None),
    (-4, 0, "mixed", (-2, 2)),
])
def test_quadratic_roots(d3, d5, tag, roots):
    c1, c2, got = quadratic_roots(d3, d5)
    assert got == tag
    if roots:
        assert (c1, c2) == pytest.approx(roots)


def test_zero_profile_pencil():
    p = QuadPencil(zero_profile, 4, 5)
    for z in (0.3, -2.0, 1 + 1j):
        assert p.value(0, z) == pytest.approx(0.5 * (z * z + 5 * z + 4))
        assert conserved_product(p, 0, z) == pytest.approx(z * (z * z + 5 * z + 4) ** 2)
    assert sorted(r.real for r in p.roots(1.0)) == pytest.approx([-4, -1])
    traj = pencil_roots_along(p, np.linspace(-1, 1, 5))
    assert all(s.u == pytest.approx(0) for s in traj.states)


def test_conserved_product_on_two_soliton():
    p = soliton_pencil(SolitonSpec((1, 2), (1, -1)))
    for z in (-0.5, 0.7, 2.3, -3.1 + 0.4j):
        ref = expected_product(z, 1, 4)
        for x in (-2.0, 0.4, 3.0):
            assert abs(conserved_product(p, x, z) - ref) <= 1e-10 * abs(ref)
    assert abs(conserved_product(p, 0.9, -1.0)) < 1e-12


def test_roots_reconstruct_profile():
    prof = SolitonProfile(ASYM)
    p = soliton_pencil(ASYM)
    for x in (-3.0, -0.1, 1.2):
        a, b = p.roots(x)
        assert abs(a.imag) < 1e-12 and abs(b.imag) < 1e-12
        assert a.real < 0 and b.real < 0
        assert 2 * (a + b + 5) == pytest.approx(float(prof(x)), abs=1e-12)


# -- root dynamics -------------------------------------------------------------------

def test_sqrt_branch():
    assert sqrt_branch(-4) == pytest.approx(2j)
    assert sqrt_branch(-1e-300 - 1j).real < 0  # argument just below 2 pi
    with pytest.raises(BranchViolation):
        sqrt_branch(2.0)


def test_rhs_fixed_point_and_symmetry():
    st = DubrovinState(-1.0, -2.5, 1, -1, 1.0, 4.0)
    d1, d2 = dubrovin_rhs(DubrovinState(-1.0, -2.5, 1, -1, 1.0, 4.0))
    assert d1 == 0
    d1, d2 = dubrovin_rhs(DubrovinState(-0.5, -2.5, 1, -1, 1.0, 4.0))
    assert abs(d1.imag) < 1e-15 and abs(d2.imag) < 1e-15
    z = DubrovinState(-0.5 + 0.3j, -2.5 - 0.1j, 1, -1, 1.0, 4.0)
    w = DubrovinState(-0.5 - 0.3j, -2.5 + 0.1j, 1, -1, 1.0, 4.0)
    for a, b in zip(dubrovin_rhs(z), dubrovin_rhs(w)):
        assert b == pytest.approx(a.conjugate())
    with pytest.raises(RootCollision):
        dubrovin_rhs(DubrovinState(-2.0, -2.0, 1, 1, 1.0, 4.0))
    assert st.u == pytest.approx(2 * (-3.5 + 5))


def test_fixed_point_start_is_constant():
    st = DubrovinState(-1.0, -4.0, 1, 1, 1.0, 4.0)
    traj = integrate_dubrovin(st, 0.0, 2.0, step=0.1)
    assert all(abs(s.u) < 1e-12 for s in traj.states)


def test_trajectory_slopes_match_rhs():
    p = soliton_pencil(ASYM)
    h = 1e-4
    for x in (-2.0, 0.8):
        traj = pencil_roots_along(p, [x - 2 * h, x - h, x, x + h, x + 2 * h])
        mid = traj.states[2]
        rhs = dubrovin_rhs(mid)
        fd1 = (traj.states[3].zeta1 - traj.states[1].zeta1) / (2 * h)
        fd2 = (traj.states[3].zeta2 - traj.states[1].zeta2) / (2 * h)
        assert abs(fd1 - rhs[0]) < 1e-6 and abs(fd2 - rhs[1]) < 1e-6


def test_short_round_trip():
    p = soliton_pencil(ASYM)
    start = pencil_roots_along(p, [-2e-3, -1e-3, 0.0, 1e-3, 2e-3]).states[2]
    grid = np.linspace(-1, 1, 9)
    traj = integrate_on_grid(start, 0.0, grid, step=1e-3)
    err = max(abs(s.u - complex(psi_eval(ASYM, x))) for x, s in zip(traj.xs, traj.states))
    assert err < 1e-6


# -- degenerate determinants ---------------------------------------------------------

def limit_free_d(V1, V2, s, t, X):
    """Oracle: the two-parameter determinant t sinh A(s) cosh A(t) - s sinh A(t) cosh A(s)."""
    def A(q):
        em = (q + V1) * (q + V2) / ((q - V1) * (q - V2))
        return q * X + cmath.log(em)
    return t * cmath.sinh(A(s)) * cmath.cosh(A(t)) - s * cmath.sinh(A(t)) * cmath.cosh(A(s))


def test_m_data_against_finite_differences():
    V1, V2, s = 0.7 + 0.4j, 0.7 - 0.4j, 1.3
    em, mp, mppp = m_data(V1, V2, s)
    logm = lambda q: cmath.log(m_data(V1, V2, q)[0])  # noqa: E731
    h = 1e-5
    assert abs((logm(s + h) - logm(s - h)) / (2 * h) - mp) < 1e-8
    h = 1e-3
    fd3 = (logm(s + 2 * h) - 2 * logm(s + h) + 2 * logm(s - h) - logm(s - 2 * h)) / (2 * h ** 3)
    assert abs(fd3 - mppp) < 1e-4
    assert m_data(0.5, -0.5, 2.0)[0] == pytest.approx(1)
    assert abs(em.imag) < 1e-15  # conjugate V with real s
    with pytest.raises(PoleInM):
        m_data(1.0, 2.0, 1.0)


def test_d1_is_derivative_of_two_parameter_determinant():
    case = DegenerateCase("DoubleNonzero", 1.5, 0.6 + 0.8j, 0.6 - 0.8j, 0.3)
    h = 1e-6
    for x in (-1.0, 0.2, 2.0):
        X = x - case.x0
        fd = (limit_free_d(case.V1, case.V2, 1.5, 1.5 + h, X)
              - limit_free_d(case.V1, case.V2, 1.5, 1.5 - h, X)) / (2 * h)
        assert abs(fd - degenerate_determinant(case, x)) < 1e-7 * max(1, abs(fd))


@pytest.mark.parametrize("tag, alpha, V", [("OneZeroRootPos", 1.2, (0.5 + 1j, 0.5 - 1j)),
                                           ("OneZeroRootNeg", 1.2j, (0.5, 2.0))])
def test_d2_is_limit_of_two_parameter_determinant(tag, alpha, V):
    case = DegenerateCase(tag, alpha, *V)
    h = 1e-7
    for x in (-1.5, 0.4):
        lim = limit_free_d(case.V1, case.V2, h, alpha, x) / h
        assert abs(lim - degenerate_determinant(case, x)) < 1e-5 * max(1, abs(lim))


def test_degenerate_zeros():
    rng = random.Random(3)
    cases = [DegenerateCase("DoubleNonzero", 1.0, 0.3 + 0.5j, 0.3 - 0.5j),
             DegenerateCase("DoubleNonzero", 0.8j, 0.4, 1.7),
             DegenerateCase("OneZeroRootPos", 2.0, 1 + 1j, 1 - 1j),
             DegenerateCase("OneZeroRootNeg", 0.5j, 0.9, 0.2),
             DegenerateCase("DoubleZero", 0, rng.uniform(0.1, 2), rng.uniform(0.1, 2))]
    for case in cases:
        rep = find_real_zero(case)
        assert abs(degenerate_determinant(case, rep.root)) < 1e-10
    dz = cases[-1]
    assert find_real_zero(dz).root == pytest.approx(dz.explicit_root(), abs=1e-8)


def test_degenerate_input_checks():
    with pytest.raises(PreconditionViolated):
        DegenerateCase("Nope", 1, 1, 2)
    with pytest.raises(PreconditionViolated):
        DegenerateCase("OneZeroRootPos", -1, 1, 2)
    assert DegenerateCase.from_roots(0, 0, 1, 2).tag == "DoubleZero"
    assert DegenerateCase.from_roots(-4, -4, 1, 2).alpha == 2j
    with pytest.raises(PreconditionViolated):
        DegenerateCase.from_roots(1, 4, 1, 2)
    with pytest.raises(PreconditionViolated):
        DegenerateCase("DoubleZero", 0, 1, 2).explicit_root() and DegenerateCase("DoubleNonzero", 1, 1j, -1j).explicit_root()


def test_no_sign_change():
    # far-away root with a tiny window and no widening
    case = DegenerateCase("DoubleZero", 0, 0.1, 0.2, x0=500.0)
    with pytest.raises(NoSignChange):
        find_real_zero(case, bracket=(-1, 1), widenings=0, samples=11)


# -- classification --------------------------------------------------------------------

@pytest.mark.parametrize("d3, d5, families, certificate", [
    (4, 5, ["1-soliton C=1", "1-soliton C=4", "2-soliton family C1=1 C2=4 (a2 < 0 < a1)"], None),
    (1, 2, ["1-soliton C=1"], "DoubleNonzero"),
    (0, 1, ["1-soliton C=1"], "OneZeroRootPos"),
    (0, 0, [], "DoubleZero"),
    (2, -1, [], "ConjugatePair"),
    (1, -2, [], "DoubleNonzero"),
])
def test_classifier_table(d3, d5, families, certificate):
    out = classify(d3, d5).to_dict()
    assert out["families"] == families
    assert out["certificate"] == certificate
