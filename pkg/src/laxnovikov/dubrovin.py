"""Quadratic pencil, root dynamics and degenerate-case determinants for N = 2.

The stationary equation d_3 R_3 + d_5 R_5 + R_7 = 0 (d_1 = 0, d_7 = 1) is
studied through R^(x, z) = R0 + R1 z + z^2/2, whose roots z_1, z_2 move by a
separable first-order system.  Square roots use the branch with argument in
(0, 2 pi), cut along the nonnegative real axis.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .diffalg import DiffPoly, ProfileSample, U
from .errors import (BranchViolation, NoSignChange, PoleInM, PreconditionViolated,
                     RootCollision, StepUnderflow)

_TINY = 1e-300


# -- roots of z^2 - d5 z + d3 -----------------------------------------------

def quadratic_roots(d3, d5, tol: float = 1e-12) -> tuple:
    """(C1, C2, tag) with Re C1 <= Re C2."""
    d3, d5 = complex(d3), complex(d5)
    disc = cmath.sqrt(d5 * d5 - 4 * d3)
    c1, c2 = sorted(((d5 - disc) / 2, (d5 + disc) / 2), key=lambda z: (z.real, z.imag))
    c1, c2 = (_clean(c1, tol), _clean(c2, tol))
    scale = max(1.0, abs(d3), abs(d5))
    if abs(c1) <= tol * scale or abs(c2) <= tol * scale:
        tag = "has-zero"
    elif abs(c1 - c2) <= tol * scale:
        tag = "degenerate-equal"
    elif abs(c1.imag) > tol * scale:
        tag = "conjugate-pair"
    elif c1.real > 0:
        tag = "distinct-positive"
    else:
        tag = "mixed"
    return c1, c2, tag


def _clean(z: complex, tol: float):
    if abs(z.imag) <= tol * max(1.0, abs(z)):
        return z.real
    return z


# -- the pencil -------------------------------------------------------------

def pencil_polys(d3, d5) -> tuple[DiffPoly, DiffPoly, DiffPoly]:
    """R^0, R^1, R^2 as differential polynomials."""
    d3, d5 = Fraction(d3), Fraction(d5)
    r0 = (DiffPoly.constant(d3 / 2) - U.scale(d5 / 4)
          + (DiffPoly.u(2) + U * U * 3).scale(Fraction(1, 16)))
    r1 = DiffPoly.constant(d5 / 2) - U.scale(Fraction(1, 4))
    return r0, r1, DiffPoly.constant(Fraction(1, 2))


@dataclass
class QuadPencil:
    profile: Callable[[object], ProfileSample]
    d3: Fraction
    d5: Fraction

    def __post_init__(self):
        self.d3, self.d5 = Fraction(self.d3), Fraction(self.d5)
        r0, r1, r2 = pencil_polys(self.d3, self.d5)
        # value and first two derivatives of each coefficient
        self._polys = [[p, p.derive(), p.derive().derive()] for p in (r0, r1, r2)]
        self.C1, self.C2, self.tag = quadratic_roots(self.d3, self.d5)

    def sample(self, x) -> ProfileSample:
        s = self.profile(x)
        if s.max_order < 4:
            from .errors import MissingDerivative
            raise MissingDerivative("pencil needs u up to the fourth derivative")
        return s

    def coeffs(self, x, nderiv: int = 0, sample: ProfileSample | None = None) -> list:
        """[[R0, R0', ...], [R1, ...], [R2, ...]] at x, complex."""
        s = sample or self.sample(x)
        return [[complex(p[k].eval(s)) for k in range(nderiv + 1)] for p in self._polys]

    def value(self, x, z) -> complex:
        r = self.coeffs(x)
        return r[0][0] + r[1][0] * z + r[2][0] * z * z

    def roots(self, x, sample: ProfileSample | None = None) -> tuple[complex, complex]:
        (r0,), (r1,), _ = self.coeffs(x, 0, sample)
        disc = cmath.sqrt(r1 * r1 - 2 * r0)
        return -r1 + disc, -r1 - disc

    def root_slopes(self, x, zetas, sample: ProfileSample | None = None) -> list:
        """z' from differentiating R^(x, z(x)) = 0."""
        (r0, r0p), (r1, r1p), _ = self.coeffs(x, 1, sample)
        out = []
        for z in zetas:
            den = z + r1
            out.append(-(r0p + r1p * z) / den if abs(den) > _TINY else complex("nan"))
        return out


def pencil_from_profile(profile: Callable[[object], ProfileSample], d3, d5) -> QuadPencil:
    return QuadPencil(profile, d3, d5)


def conserved_product(pencil: QuadPencil, x, zeta) -> complex:
    """2 R'' R - R'^2 + 4 (u + z) R^2, which should equal z (z + C1)^2 (z + C2)^2."""
    s = pencil.sample(x)
    c = pencil.coeffs(x, 2, s)
    u = complex(s.derivs[0])
    val = [c[0][k] + c[1][k] * zeta + c[2][k] * zeta * zeta for k in range(3)]
    return 2 * val[2] * val[0] - val[1] ** 2 + 4 * (u + zeta) * val[0] ** 2


def expected_product(zeta, c1, c2) -> complex:
    return zeta * (zeta + c1) ** 2 * (zeta + c2) ** 2


# -- branch and states ------------------------------------------------------

def sqrt_branch(z) -> complex:
    """sqrt(r) e^{i t/2} with t in (0, 2 pi); undefined on the nonnegative reals."""
    z = complex(z)
    if z.imag == 0 and z.real >= 0:
        raise BranchViolation(f"{z} lies on the branch cut")
    if z.imag == 0:  # negative real axis, argument pi: keep the result exactly imaginary
        return complex(0.0, math.sqrt(-z.real))
    t = math.atan2(z.imag, z.real)
    if t <= 0:
        t += 2 * math.pi
    return math.sqrt(abs(z)) * cmath.exp(0.5j * t)


@dataclass(frozen=True)
class DubrovinState:
    zeta1: complex
    zeta2: complex
    theta1: int
    theta2: int
    C1: complex
    C2: complex

    @property
    def u(self) -> complex:
        return 2 * (self.zeta1 + self.zeta2 + self.C1 + self.C2)

    def to_v(self) -> tuple[complex, complex]:
        return (-1j * self.theta1 * sqrt_branch(self.zeta1),
                1j * self.theta2 * sqrt_branch(self.zeta2))


def dubrovin_rhs(state: DubrovinState) -> tuple[complex, complex]:
    z1, z2 = complex(state.zeta1), complex(state.zeta2)
    gap = z1 - z2
    if abs(gap) <= 1e-14 * max(1.0, abs(z1)):
        raise RootCollision(None, f"roots coincide at {z1}")
    c1, c2 = state.C1, state.C2
    d1 = 2j * state.theta1 * sqrt_branch(z1) * (z1 + c1) * (z1 + c2) / gap
    d2 = 2j * state.theta2 * sqrt_branch(z2) * (z2 + c1) * (z2 + c2) / gap
    return d1, d2


def _theta(slope: complex, state_factor: complex) -> int | None:
    if abs(state_factor) < 1e-12 or not cmath.isfinite(slope):
        return None
    ratio = slope / state_factor
    if abs(abs(ratio) - 1) > 1e-3 or abs(ratio.imag) > 1e-3:
        return None
    return 1 if ratio.real > 0 else -1


@dataclass
class Trajectory:
    xs: list
    states: list

    @property
    def u(self) -> list:
        return [s.u for s in self.states]

    def rows(self):
        for x, s in zip(self.xs, self.states):
            yield (x, s.zeta1, s.zeta2, s.u)


def pencil_roots_along(pencil: QuadPencil, grid: Sequence) -> Trajectory:
    """Roots on the grid, paired against a linear predictor, with sign flags from z'."""
    grid = list(grid)
    c1, c2 = pencil.C1, pencil.C2
    xs, states = [], []
    history: list[tuple[complex, complex]] = []
    for x in grid:
        s = pencil.sample(x)
        a, b = pencil.roots(x, s)
        if history:
            # linear predictor, so branches that cross transversally keep their labels
            if len(history) > 1:
                pred = tuple(2 * p - q for p, q in zip(history[-1], history[-2]))
            else:
                pred = history[-1]
            keep = abs(a - pred[0]) + abs(b - pred[1])
            swap = abs(a - pred[1]) + abs(b - pred[0])
            if swap < keep:
                a, b = b, a
            gap = abs(pred[0] - pred[1])
            miss = max(abs(a - pred[0]), abs(b - pred[1]))
            if gap > 0 and miss > 0.5 * gap and miss > 0.5 * abs(a - b):
                raise RootCollision(x, f"cannot pair pencil roots near x={x}")
        if abs(a - b) <= 1e-13 * max(1.0, abs(a)):
            raise RootCollision(x)
        slopes = pencil.root_slopes(x, (a, b), s)
        thetas = []
        for i, (z, sl) in enumerate(zip((a, b), slopes)):
            try:
                f = 2j * sqrt_branch(z) * (z + c1) * (z + c2) / (a - b)
            except BranchViolation:
                f = 0
            t = _theta(sl, f)
            thetas.append(t)
        xs.append(x)
        states.append([a, b, thetas[0], thetas[1]])
        history.append((a, b))
    # fill undetermined flags from neighbours, default +1
    for i in (2, 3):
        last = None
        for st in states:
            if st[i] is None:
                st[i] = last
            else:
                last = st[i]
        nxt = None
        for st in reversed(states):
            if st[i] is None:
                st[i] = nxt if nxt is not None else 1
            else:
                nxt = st[i]
    return Trajectory(xs, [DubrovinState(a, b, t1, t2, c1, c2) for a, b, t1, t2 in states])


# -- integration ------------------------------------------------------------

def _v_rhs(v, c1, c2):
    v1, v2 = v
    s1, s2 = v1 * v1, v2 * v2
    den = s2 - s1
    if abs(den) < _TINY:
        raise RootCollision(None, "roots coincide during integration")
    return np.array([(c1 - s1) * (c2 - s1) / den, -(c1 - s2) * (c2 - s2) / den])


def _rk4(v, h, c1, c2):
    k1 = _v_rhs(v, c1, c2)
    k2 = _v_rhs(v + 0.5 * h * k1, c1, c2)
    k3 = _v_rhs(v + 0.5 * h * k2, c1, c2)
    k4 = _v_rhs(v + h * k3, c1, c2)
    return v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _state_from_v(v, c1, c2, prev: DubrovinState) -> DubrovinState:
    v1, v2 = complex(v[0]), complex(v[1])
    z1, z2 = -v1 * v1, -v2 * v2
    t1, t2 = prev.theta1, prev.theta2
    try:
        r = 1j * v1 / sqrt_branch(z1)
        if abs(abs(r) - 1) < 1e-6:
            t1 = 1 if r.real > 0 else -1
    except (BranchViolation, ZeroDivisionError):
        pass
    try:
        r = -1j * v2 / sqrt_branch(z2)
        if abs(abs(r) - 1) < 1e-6:
            t2 = 1 if r.real > 0 else -1
    except (BranchViolation, ZeroDivisionError):
        pass
    return DubrovinState(z1, z2, t1, t2, c1, c2)


def integrate_dubrovin(state0: DubrovinState, x0: float, x1: float, step: float = 1e-3,
                       tol: float = 1e-12, record_every: float | None = None) -> Trajectory:
    """RK4 in v_1 = -i t_1 sqrt(z_1), v_2 = i t_2 sqrt(z_2), which is regular where a root passes 0.

    Each step is compared against two half steps; the step is halved until they
    agree to tol, and StepUnderflow is raised below 1e-12 of the span.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    c1, c2 = complex(state0.C1), complex(state0.C2)
    v = np.array(state0.to_v(), dtype=complex)
    direction = 1.0 if x1 >= x0 else -1.0
    span = abs(x1 - x0)
    min_step = 1e-12 * max(span, 1.0)
    record = record_every if record_every is not None else step
    x = float(x0)
    xs, states = [x], [state0]
    next_record = x + direction * record
    h = step
    prev = state0
    while direction * (x1 - x) > 1e-15 * max(1.0, span):
        h = min(h, abs(x1 - x), abs(next_record - x) if direction * (next_record - x) > 0 else h)
        hs = direction * h
        full = _rk4(v, hs, c1, c2)
        half = _rk4(_rk4(v, hs / 2, c1, c2), hs / 2, c1, c2)
        err = np.max(np.abs(full - half))
        if not np.all(np.isfinite(half)) or err > tol * max(1.0, np.max(np.abs(half))):
            h /= 2
            if h < min_step:
                raise StepUnderflow(f"step fell below {min_step} near x={x}")
            continue
        v = half + (half - full) / 15
        x += hs
        prev = _state_from_v(v, c1, c2, prev)
        if abs(x - next_record) <= 1e-12 * max(1.0, abs(x)) or direction * (x - x1) >= 0:
            xs.append(x)
            states.append(prev)
            next_record += direction * record
        if err < tol / 64:
            h = min(2 * h, step)
    if xs[-1] != x:
        xs.append(x)
        states.append(prev)
    return Trajectory(xs, states)


def integrate_interval(state0: DubrovinState, x0: float, lo: float, hi: float,
                       step: float = 1e-3, **kw) -> Trajectory:
    """Integrate from x0 to both ends and join the pieces in increasing x."""
    left = integrate_dubrovin(state0, x0, lo, step, **kw)
    right = integrate_dubrovin(state0, x0, hi, step, **kw)
    return Trajectory(left.xs[::-1] + right.xs[1:], left.states[::-1] + right.states[1:])


def integrate_on_grid(state0: DubrovinState, x0: float, grid: Sequence, step: float = 1e-3,
                      **kw) -> Trajectory:
    """States at exactly the grid points, integrating outward from x0 in both directions."""
    grid = sorted(float(g) for g in grid)
    out: dict[float, DubrovinState] = {}
    for side in (1, -1):
        pts = [g for g in grid if (g - x0) * side >= 0]
        pts = pts if side > 0 else pts[::-1]
        x, st = float(x0), state0
        for g in pts:
            if g != x:
                st = integrate_dubrovin(st, x, g, step, **kw).states[-1]
                x = g
            out[g] = st
    return Trajectory(grid, [out[g] for g in grid])


# -- degenerate cases -------------------------------------------------------

def m_data(V1, V2, s) -> tuple[complex, complex, complex]:
    """(e^{M(s)}, M'(s), M'''(s)) for e^{M(s)} = (s+V1)(s+V2)/((s-V1)(s-V2))."""
    V1, V2, s = complex(V1), complex(V2), complex(s)
    scale = max(1.0, abs(V1), abs(V2), abs(s))
    for p in (s + V1, s + V2, s - V1, s - V2):
        if abs(p) <= 1e-14 * scale:
            raise PoleInM(f"s={s} hits a singular point of M")
    em = (s + V1) * (s + V2) / ((s - V1) * (s - V2))
    mp = 1 / (s + V1) + 1 / (s + V2) - 1 / (s - V1) - 1 / (s - V2)
    mppp = 2 * (1 / (s + V1) ** 3 + 1 / (s + V2) ** 3 - 1 / (s - V1) ** 3 - 1 / (s - V2) ** 3)
    return em, mp, mppp


DEGENERATE_TAGS = ("DoubleNonzero", "OneZeroRootPos", "OneZeroRootNeg", "DoubleZero")


@dataclass(frozen=True)
class DegenerateCase:
    tag: str
    alpha: complex
    V1: complex
    V2: complex
    x0: float = 0.0

    def __post_init__(self):
        if self.tag not in DEGENERATE_TAGS:
            raise PreconditionViolated(f"unknown degenerate case {self.tag!r}")
        if self.tag == "DoubleZero" and self.alpha != 0:
            raise PreconditionViolated("DoubleZero has alpha = 0")
        if self.tag == "OneZeroRootPos" and (complex(self.alpha).imag or complex(self.alpha).real <= 0):
            raise PreconditionViolated("OneZeroRootPos needs a positive real alpha")
        if self.tag == "OneZeroRootNeg" and (complex(self.alpha).real or complex(self.alpha).imag <= 0):
            raise PreconditionViolated("OneZeroRootNeg needs alpha = i beta with beta > 0")

    @classmethod
    def from_roots(cls, c1, c2, V1, V2, x0: float = 0.0) -> DegenerateCase:
        c1, c2 = complex(c1), complex(c2)
        if c1 == 0 and c2 == 0:
            return cls("DoubleZero", 0, V1, V2, x0)
        if c1 == 0 or c2 == 0:
            c = c2 if c1 == 0 else c1
            if c.imag or c.real == 0:
                raise PreconditionViolated("the nonzero root must be real")
            if c.real > 0:
                return cls("OneZeroRootPos", math.sqrt(c.real), V1, V2, x0)
            return cls("OneZeroRootNeg", 1j * math.sqrt(-c.real), V1, V2, x0)
        if c1 == c2 and not c1.imag:
            alpha = math.sqrt(c1.real) if c1.real > 0 else 1j * math.sqrt(-c1.real)
            return cls("DoubleNonzero", alpha, V1, V2, x0)
        raise PreconditionViolated(f"roots {c1}, {c2} are not a degenerate configuration")

    @property
    def M_alpha(self) -> complex:
        return cmath.log(m_data(self.V1, self.V2, self.alpha)[0])

    @property
    def Mp_alpha(self) -> complex:
        return m_data(self.V1, self.V2, self.alpha)[1]

    @property
    def Mp0(self) -> float:
        return m_data(self.V1, self.V2, 0)[1].real

    @property
    def Mppp0(self) -> float:
        return m_data(self.V1, self.V2, 0)[2].real

    def parameters(self) -> dict:
        out = {"alpha": _enc(self.alpha), "V1": _enc(self.V1), "V2": _enc(self.V2), "x0": self.x0}
        if self.tag != "DoubleZero":
            out.update(M_alpha=_enc(self.M_alpha), Mp_alpha=_enc(self.Mp_alpha))
        if self.tag != "DoubleNonzero":
            out.update(Mp0=self.Mp0)
        if self.tag == "DoubleZero":
            out.update(Mppp0=self.Mppp0, explicit_root=self.explicit_root())
        return out

    def explicit_root(self) -> float:
        if self.tag != "DoubleZero":
            raise PreconditionViolated("closed-form root only exists for DoubleZero")
        return self.x0 - self.Mp0 + float(np.cbrt(self.Mppp0 / 2))


def _enc(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def degenerate_determinant(case: DegenerateCase, x) -> complex:
    X = x - case.x0
    a = complex(case.alpha)
    if case.tag == "DoubleNonzero":
        return 0.5 * cmath.sinh(2 * a * X + 2 * case.M_alpha) - a * X - a * case.Mp_alpha
    if case.tag in ("OneZeroRootPos", "OneZeroRootNeg"):
        arg = a * X + case.M_alpha
        return a * cmath.cosh(arg) * (X + case.Mp0) - cmath.sinh(arg)
    return (X + case.Mp0) ** 3 / 3 - case.Mppp0 / 6


@dataclass
class ZeroReport:
    case: str
    parameters: dict
    bracket: tuple
    root: float
    residual: float

    def to_dict(self) -> dict:
        return {"case": self.case, "parameters": self.parameters, "bracket": list(self.bracket),
                "root": self.root, "residual": self.residual}


def _phase(case: DegenerateCase, xs) -> complex:
    vals = [degenerate_determinant(case, x) for x in xs]
    ref = max(vals, key=abs)
    return ref / abs(ref) if ref else 1.0


def find_real_zero(case: DegenerateCase, bracket: tuple = (-10.0, 10.0), widenings: int = 8,
                   samples: int = 4001, xtol: float = 1e-13) -> ZeroReport:
    """A real zero of the limit determinant; the bracket widens geometrically until one shows up."""
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    for _ in range(widenings + 1):
        xs = np.linspace(lo, hi, samples)
        phase = _phase(case, xs)

        def f(x):
            return (degenerate_determinant(case, x) / phase).real

        vals = np.array([f(x) for x in xs])
        for i in range(len(xs) - 1):
            if vals[i] == 0 or vals[i] * vals[i + 1] < 0:
                a, b = xs[i], xs[i + 1]
                root = a if vals[i] == 0 else brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps)
                residual = abs(degenerate_determinant(case, root))
                return ZeroReport(case.tag, case.parameters(), (lo, hi), float(root), float(residual))
        mid, half = (lo + hi) / 2, (hi - lo)
        lo, hi = mid - half, mid + half
    raise NoSignChange(f"no sign change for {case.tag} on [{lo}, {hi}]")


# -- classification ---------------------------------------------------------

@dataclass(frozen=True)
class Family:
    kind: str
    C: tuple

    def describe(self) -> str:
        if self.kind == "1-soliton":
            return f"1-soliton C={_fmt(self.C[0])}"
        return f"2-soliton family C1={_fmt(self.C[0])} C2={_fmt(self.C[1])} (a2 < 0 < a1)"


def _fmt(v) -> str:
    v = complex(v)
    if v.imag:
        return f"{v.real:g}{v.imag:+g}i"
    return f"{v.real:g}"


@dataclass
class Classification:
    d3: float
    d5: float
    C1: complex
    C2: complex
    tag: str
    families: list
    certificate: str | None
    note: str

    def to_dict(self) -> dict:
        return {"d1": 0, "d3": self.d3, "d5": self.d5, "d7": 1,
                "C1": _enc(self.C1), "C2": _enc(self.C2), "roots": self.tag,
                "families": [f.describe() for f in self.families],
                "certificate": self.certificate, "note": self.note}


def classify(d3, d5) -> Classification:
    """Nontrivial decaying solution families of d_3 R_3 + d_5 R_5 + R_7 = 0.

    Every positive root C of z^2 - d5 z + d3 carries a 1-soliton with that
    speed, and a 2-soliton family exists exactly when 0 < C1 < C2.  When no
    2-soliton family exists the name of the excluding argument is attached.
    """
    c1, c2, tag = quadratic_roots(d3, d5)
    fams = []
    for c in sorted({c for c in (c1, c2) if not complex(c).imag and complex(c).real > 0},
                    key=lambda c: complex(c).real):
        fams.append(Family("1-soliton", (complex(c).real,)))
    cert = None
    if tag == "distinct-positive":
        fams.append(Family("2-soliton", (complex(c1).real, complex(c2).real)))
        note = "distinct positive roots"
    elif tag == "degenerate-equal":
        cert = "DoubleNonzero"
        note = "C1 = C2 != 0: the limit determinant D1 has a real zero"
    elif tag == "has-zero":
        if c1 == 0 and c2 == 0:
            cert = "DoubleZero"
            note = "C1 = C2 = 0: the cubic D4 has a real zero"
        else:
            other = c2 if c1 == 0 else c1
            cert = "OneZeroRootPos" if complex(other).real > 0 else "OneZeroRootNeg"
            note = "one root zero: the limit determinant D2 has a real zero"
    elif tag == "conjugate-pair":
        cert = "ConjugatePair"
        note = "complex roots: no real wavespeeds"
    else:
        cert = "NonpositiveRoot"
        note = "a negative root gives no decaying 2-soliton"
    return Classification(float(d3), float(d5), c1, c2, tag, fams, cert, note)
