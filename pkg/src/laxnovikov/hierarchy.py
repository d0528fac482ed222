"""Gelfand-Dickey polynomials, hierarchy flows and stationary equations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from .diffalg import DiffPoly, ProfileSample, U
from .errors import PreconditionViolated
from .psdo import DEFAULT_DEPTH, PsdOp, op_pow_frac, op_residue

_HALF = DiffPoly.constant(Fraction(1, 2))


# -- the R_{2k+1} ----------------------------------------------------------

@lru_cache(maxsize=None)
def gd_r_recur(k: int) -> DiffPoly:
    """R_{2k+1} from the third-order recurrence, starting at R_1 = 1/2."""
    if k < 0:
        raise ValueError("level must be nonnegative")
    if k == 0:
        return _HALF
    r = gd_r_recur(k - 1)
    rhs = r.nth_derivative(3) + U * r.derive() * 4 + U.derive() * r * 2
    return rhs.integrate_exact().scale(Fraction(-1, 4))


def gd_r_residue(k: int, depth: int = DEFAULT_DEPTH) -> DiffPoly:
    """R_{2k+1} = ((-1)^k / 2) Res L^{(2k-1)/2}."""
    if k < 0:
        raise ValueError("level must be nonnegative")
    power = op_pow_frac(PsdOp.lax(), 2 * k - 1, 2, depth)
    return op_residue(power).scale(Fraction((-1) ** k, 2))


def hierarchy_rhs(k: int) -> DiffPoly:
    """Right-hand side of the flow in t_{2k+1}: 4(-1)^{k+1} R_{2k+3}'."""
    return gd_r_recur(k + 1).derive().scale(4 * (-1) ** (k + 1))


# -- stationary coefficients ------------------------------------------------

def _exact(value) -> Fraction:
    if isinstance(value, complex):
        if value.imag:
            raise PreconditionViolated(f"coefficient {value} is not real")
        value = value.real
    if isinstance(value, str):
        return Fraction(value)
    if hasattr(value, "man_exp"):  # mpmath mpf, converted without rounding
        man, exp = value.man_exp
        return Fraction(int(man)) * Fraction(2) ** int(exp)
    return Fraction(value)


@dataclass(frozen=True)
class StationaryCoeffs:
    """Coefficients d_1, d_3, ... of sum d_i R_i = 0, keyed by odd index.

    The s-form s_0 R_3 - s_1 R_5 + ... + (-1)^N s_N R_{2N+3} corresponds to
    d_{2i+3} = (-1)^i s_i and d_1 = 0.
    """

    d: Mapping[int, Fraction]
    roots: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        clean = {}
        for i, v in dict(self.d).items():
            if i < 1 or i % 2 == 0:
                raise ValueError(f"index {i} is not a positive odd integer")
            v = _exact(v)
            if v:
                clean[int(i)] = v
        object.__setattr__(self, "d", dict(sorted(clean.items())))

    @classmethod
    def from_s(cls, s: Sequence, roots=None) -> StationaryCoeffs:
        return cls({2 * i + 3: (-1) ** i * _exact(v) for i, v in enumerate(s)}, roots)

    @classmethod
    def from_d(cls, d: Sequence) -> StationaryCoeffs:
        """From the sequence d_1, d_3, d_5, ..."""
        return cls({2 * i + 1: v for i, v in enumerate(d)})

    @property
    def N(self) -> int:
        top = max(self.d, default=3)
        return max((top - 3) // 2, 0)

    def s(self) -> list[Fraction]:
        if self.d.get(1):
            raise PreconditionViolated("the s-form requires d_1 = 0")
        return [(-1) ** i * self.d.get(2 * i + 3, Fraction(0)) for i in range(self.N + 1)]

    def coefficient(self, index: int) -> Fraction:
        return self.d.get(index, Fraction(0))


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def elementary_symmetric(alphas: Iterable) -> StationaryCoeffs:
    """s_0..s_N from prod_j (x - alpha_j^2); exact for float, Fraction or complex input."""
    poly = [(Fraction(1), Fraction(0))]  # ascending powers of x
    squares = []
    for a in alphas:
        c = complex(a) if not isinstance(a, (int, Fraction, float)) else a
        if isinstance(c, complex):
            z = (Fraction(c.real), Fraction(c.imag))
        else:
            z = (Fraction(c), Fraction(0))
        sq = _cmul(z, z)
        squares.append(sq)
        shifted = [(Fraction(0), Fraction(0))] + poly
        for i, p in enumerate(poly):
            m = _cmul(sq, p)
            shifted[i] = (shifted[i][0] - m[0], shifted[i][1] - m[1])
        poly = shifted
    if any(im for _re, im in poly):
        raise PreconditionViolated("alphas do not give real symmetric functions")
    roots = tuple(complex(float(r), float(i)) if i else r for r, i in squares)
    return StationaryCoeffs.from_s([re for re, _im in poly], roots)


def stationary_poly(c: StationaryCoeffs) -> DiffPoly:
    total = DiffPoly()
    for index, value in c.d.items():
        total = total + gd_r_recur((index - 1) // 2).scale(value)
    return total


# -- numeric residuals ------------------------------------------------------

@dataclass
class ResidualReport:
    grid_min: float
    grid_max: float
    samples: int
    max_abs: float
    max_rel: float
    argmax_x: float | None
    poles: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "grid": {"min": self.grid_min, "max": self.grid_max},
            "samples": self.samples,
            "max_abs": self.max_abs,
            "max_rel": self.max_rel,
            "argmax_x": self.argmax_x,
            "poles": self.poles,
        }


def stationary_residual(poly: DiffPoly, profile: Callable[[object], ProfileSample],
                        grid: Sequence, skip_poles: bool = False) -> ResidualReport:
    """Max of |poly(u)| over the grid, with a relative figure scaled by the largest term."""
    from .errors import PoleAt

    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")
    max_abs, scale, argmax = 0.0, 0.0, None
    poles = []
    for x in grid:
        try:
            sample = profile(x)
        except PoleAt:
            if not skip_poles:
                raise
            poles.append(float(x))
            continue
        terms = poly.eval_terms(sample)
        total = sum(terms[1:], terms[0]) if terms else 0
        r = float(abs(total))
        if argmax is None or r > max_abs:
            max_abs, argmax = r, float(x)
        for t in terms:
            scale = max(scale, float(abs(t)))
    max_rel = max_abs / scale if scale else (0.0 if max_abs == 0 else math.inf)
    return ResidualReport(float(min(grid)), float(max(grid)), len(grid), max_abs, max_rel,
                          argmax, poles)
