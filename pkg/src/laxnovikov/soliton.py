"""N-soliton profiles u = 2 (D'/D)' from Wronskians of y_j = e^{a x} + a_j e^{-a x}.

D is expanded as a sum over sign vectors eps in {+1,-1}^N: the term for eps
has rate sum_j eps_j alpha_j and coefficient prod_{eps_j=-1} a_j times a
Vandermonde-type determinant.  Replacing the derivative rows 0..N-1 by any
other row set gives the cofactor minors used for the dressing coefficients.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .config import make_context
from .diffalg import ProfileSample
from .errors import ConsistencyError, PoleAt, PreconditionViolated
from .expsum import ExpFamily, ExpSum, POLE_GUARD, profile_derivatives

_REL_TOL = 1e-12


def _close(a, b, tol=_REL_TOL) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _parse_times(times) -> dict[int, object]:
    if not times:
        return {}
    if isinstance(times, Mapping):
        out = {}
        for k, v in times.items():
            idx = int(str(k).lstrip("t"))
            if idx < 1 or idx % 2 == 0:
                raise PreconditionViolated(f"time index {k} is not odd")
            out[idx] = v
        return out
    # a plain list means t3, t5, ...
    return {2 * i + 3: v for i, v in enumerate(times)}


@dataclass(frozen=True)
class SolitonSpec:
    alphas: tuple
    amps: tuple
    times: Mapping[int, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(self.alphas))
        object.__setattr__(self, "amps", tuple(self.amps))
        object.__setattr__(self, "times", _parse_times(self.times))
        if len(self.alphas) != len(self.amps):
            raise PreconditionViolated("alphas and amps differ in length")
        for j, (al, a) in enumerate(zip(self.alphas, self.amps)):
            if al == 0 or a == 0:
                raise PreconditionViolated(f"alpha_{j + 1} and a_{j + 1} must be nonzero")
        for j in range(1, self.n):
            if complex(self.alphas[j - 1]).real > complex(self.alphas[j]).real:
                raise PreconditionViolated("real parts of the alphas must be nondecreasing")
        if any(complex(al).real < 0 for al in self.alphas):
            raise PreconditionViolated("alphas need nonnegative real part")
        for i, j in itertools.combinations(range(self.n), 2):
            if self.alphas[i] == self.alphas[j]:
                raise PreconditionViolated("alphas must be pairwise distinct")

    @property
    def n(self) -> int:
        return len(self.alphas)

    @classmethod
    def from_json(cls, data: Mapping) -> SolitonSpec:
        def num(v):
            if isinstance(v, Mapping):
                re, im = float(v.get("re", 0)), float(v.get("im", 0))
                return complex(re, im) if im else re
            return v

        alphas = [num(v) for v in data.get("alphas", [])]
        amps = [num(v) for v in data.get("amps", [])]
        if "n" in data and int(data["n"]) != len(alphas):
            raise PreconditionViolated(f"n={data['n']} but {len(alphas)} alphas given")
        return cls(tuple(alphas), tuple(amps), data.get("times") or {})

    def to_json(self) -> dict:
        def enc(v):
            c = complex(v)
            return {"re": c.real, "im": c.imag}

        return {"n": self.n, "alphas": [enc(v) for v in self.alphas],
                "amps": [enc(v) for v in self.amps],
                "times": {f"t{k}": float(v) for k, v in sorted(self.times.items())}}


# -- time flows -------------------------------------------------------------

def _shifted_amps(alphas, amps, times: Mapping[int, object], ctx) -> list:
    out = []
    for al, a in zip(alphas, amps):
        al = ctx.mpc(al)
        expo = ctx.fsum(al ** k * ctx.mpf(t) for k, t in times.items())
        out.append(ctx.mpc(a) * ctx.exp(-2 * expo))
    return out


def time_shift(spec: SolitonSpec, t, precision_bits: int | None = None) -> SolitonSpec:
    """Replace a_j by a_j exp(-2 sum_k alpha_j^k t_k); t maps odd k (3, 5, ...) to t_k."""
    times = _parse_times(t)
    if not any(times.values()):
        return spec
    ctx = make_context(precision_bits)
    amps = _shifted_amps(spec.alphas, spec.amps, times, ctx)
    amps = [a.real if a.imag == 0 else a for a in amps]
    return SolitonSpec(spec.alphas, tuple(amps), spec.times)


# -- determinant expansion --------------------------------------------------

def _expansion(alphas, amps, rows: Sequence[int], ctx):
    """Terms (coefficient, rate) of det[(row r of) y_j^(r)] summed over sign vectors."""
    n = len(alphas)
    terms = []
    for eps in itertools.product((1, -1), repeat=n):
        lam = [e * al for e, al in zip(eps, alphas)]
        coef = ctx.mpc(1)
        for e, a in zip(eps, amps):
            if e < 0:
                coef *= a
        if n:
            coef *= ctx.det(ctx.matrix([[l ** r for l in lam] for r in rows]))
        terms.append((coef, ctx.fsum(lam) if n else ctx.mpc(0)))
    return terms


def _direct_wronskian(alphas, amps, x, ctx):
    n = len(alphas)
    if n == 0:
        return ctx.mpc(1)
    mat = [[al ** r * ctx.exp(al * x) + a * (-al) ** r * ctx.exp(-al * x)
            for al, a in zip(alphas, amps)] for r in range(n)]
    return ctx.det(ctx.matrix(mat))


def wronskian(spec: SolitonSpec, precision_bits: int | None = None, check: bool = True) -> ExpSum:
    """D as an exponential sum, cross-checked against direct determinants."""
    ctx = make_context(precision_bits)
    alphas = [ctx.mpc(a) for a in spec.alphas]
    amps = _shifted_amps(spec.alphas, spec.amps, spec.times, ctx)
    d = ExpSum(_expansion(alphas, amps, range(spec.n), ctx), ctx)
    if check:
        rng = random.Random(0)
        for _ in range(3):
            x = ctx.mpf(rng.uniform(-1, 1))
            value, shift, mag = d.eval_scaled(x)
            direct = _direct_wronskian(alphas, amps, x, ctx) * ctx.exp(-shift)
            if abs(value - direct) > ctx.mpf(2) ** (40 - ctx.prec) * max(mag, 1):
                raise ConsistencyError(f"Wronskian expansion disagrees with direct determinant at x={x}")
    return d


# -- reality ----------------------------------------------------------------

def is_real(spec: SolitonSpec, tol: float = _REL_TOL) -> bool:
    """True when every index falls under one of the three reality cases."""
    alphas = [complex(a) for a in spec.alphas]
    amps = [complex(a) for a in spec.amps]
    for j, (al, a) in enumerate(zip(alphas, amps)):
        if abs(al.imag) <= tol * abs(al) and abs(a.imag) <= tol * abs(a):
            continue
        if abs(al.real) <= tol * abs(al) and abs(abs(a) - 1) <= tol:
            continue
        partner = any(k != j and _close(alphas[k], al.conjugate(), tol)
                      and _close(amps[k], a.conjugate(), tol) for k in range(len(alphas)))
        if not partner:
            return False
    return True


# -- profiles ---------------------------------------------------------------

class SolitonProfile:
    """Evaluator for u = 2 (D'/D)' and the cofactor ratios W_i of one spec."""

    def __init__(self, spec: SolitonSpec, precision_bits: int | None = None):
        self.spec = spec
        self.ctx = ctx = make_context(precision_bits)
        self.alphas = [ctx.mpc(a) for a in spec.alphas]
        self.amps = _shifted_amps(spec.alphas, spec.amps, spec.times, ctx)
        self.real = is_real(spec)
        rates = []
        index: dict = {}
        for eps in itertools.product((1, -1), repeat=spec.n):
            r = ctx.fsum(e * a for e, a in zip(eps, self.alphas)) if spec.n else ctx.mpc(0)
            if r not in index:
                index[r] = len(rates)
                rates.append(r)
        self._index = index
        self.family = ExpFamily(rates, ctx)
        self._minors: dict[tuple, list] = {}

    def minor_coefs(self, rows: Sequence[int]) -> list:
        rows = tuple(rows)
        if rows not in self._minors:
            coefs = [self.ctx.mpc(0)] * len(self.family.rates)
            for c, r in _expansion(self.alphas, self.amps, rows, self.ctx):
                coefs[self._index[r]] += c
            self._minors[rows] = coefs
        return self._minors[rows]

    @property
    def d_coefs(self) -> list:
        return self.minor_coefs(range(self.spec.n))

    def _out(self, v):
        return self.ctx.re(v) if self.real else v

    def derivs(self, x, order: int = 0, complex_values: bool = False) -> list:
        """u, u', ..., u^(order) at x; PoleAt where D vanishes."""
        m, _w = self.family.checked_moments(self.d_coefs, x, order + 2)
        vals = profile_derivatives(m, order)
        return vals if complex_values else [self._out(v) for v in vals]

    def sample(self, x, order: int) -> ProfileSample:
        return ProfileSample(self.ctx.mpf(x), tuple(self.derivs(x, order)))

    def __call__(self, x):
        return self.derivs(x, 0)[0]

    def dressing(self, x) -> list:
        """W_0 .. W_{N-1} at x."""
        n = self.spec.n
        w, _shift = self.family.weights(x)
        d = self.family.moments(self.d_coefs, w, 0)[0]
        if abs(d) < POLE_GUARD * self.family.magnitude(self.d_coefs, w):
            raise PoleAt(x)
        out = []
        for i in range(n):
            rows = [r for r in range(n + 1) if r != i]
            minor = self.family.moments(self.minor_coefs(rows), w, 0)[0]
            out.append(self._out((-1) ** (n + i) * minor / d))
        return out

    def riccati(self, x):
        """W'_{N-1} - W_{N-1}^2 + 2 W_{N-2} + sum alpha_i^2 at x."""
        n = self.spec.n
        if n == 0:
            return self.ctx.mpc(0)
        m, _w = self.family.checked_moments(self.d_coefs, x, 2)
        r1, r2 = m[1] / m[0], m[2] / m[0]
        w = self.dressing(x)
        wn1 = w[n - 1]
        wn2 = w[n - 2] if n >= 2 else 0
        dwn1 = -(r2 - r1 * r1)
        return dwn1 - wn1 * wn1 + 2 * wn2 + self.ctx.fsum(a * a for a in self.alphas)


def psi_eval(spec: SolitonSpec, x, precision_bits: int | None = None):
    return SolitonProfile(spec, precision_bits)(x)


def dressing_coeffs(spec: SolitonSpec, x, precision_bits: int | None = None) -> list:
    return SolitonProfile(spec, precision_bits).dressing(x)


def riccati_residual(spec: SolitonSpec, grid: Sequence, precision_bits: int | None = None,
                     skip_poles: bool = False) -> float:
    prof = SolitonProfile(spec, precision_bits)
    worst = 0.0
    for x in grid:
        try:
            worst = max(worst, float(abs(prof.riccati(x))))
        except PoleAt:
            if not skip_poles:
                raise
    return worst


# -- nonsingularity ---------------------------------------------------------

@dataclass(frozen=True)
class Nonsingular:
    reason: str = "sign condition"


@dataclass(frozen=True)
class SingularAt:
    x: float
    bracket: tuple = ()


@dataclass(frozen=True)
class Unknown:
    reason: str = ""


def satisfies_sign_condition(spec: SolitonSpec) -> bool:
    for j, (al, a) in enumerate(zip(spec.alphas, spec.amps)):
        al, a = complex(al), complex(a)
        if al.imag or a.imag or al.real <= 0:
            return False
        if (-1) ** j * a.real <= 0:
            return False
    return True


def is_nonsingular(spec: SolitonSpec, interval: tuple = (-50.0, 50.0), step: float | None = None,
                   precision_bits: int | None = None):
    """Nonsingular via the sign condition, else a scan of D for a real zero."""
    if satisfies_sign_condition(spec):
        return Nonsingular()
    prof = SolitonProfile(spec, precision_bits)
    rates = np.array([complex(r) for r in prof.family.rates])
    coefs = np.array([complex(c) for c in prof.d_coefs])
    if step is None:
        spread = max((abs(a - b) for a, b in itertools.combinations(rates, 2)), default=0.0)
        step = min(0.05, 0.5 / spread) if spread else 0.05
    lo, hi = interval
    xs = np.linspace(lo, hi, int(math.ceil((hi - lo) / step)) + 1)
    z = np.outer(xs, rates)
    z -= z.real.max(axis=1, keepdims=True)
    terms = np.exp(z) * coefs
    vals = terms.sum(axis=1)
    mags = np.abs(terms).sum(axis=1)
    norm = vals / mags
    ref = norm[np.argmax(np.abs(norm))]
    phase = ref / abs(ref) if ref else 1.0
    f = (norm / phase).real

    ctx = prof.ctx
    mphase = ctx.mpc(phase)

    def fmp(x):
        w, _shift = prof.family.weights(x)
        v = prof.family.moments(prof.d_coefs, w, 0)[0]
        return ctx.re(v / mphase) / prof.family.magnitude(prof.d_coefs, w), abs(v) / prof.family.magnitude(prof.d_coefs, w)

    for i in range(len(xs) - 1):
        if f[i] == 0 or f[i] * f[i + 1] < 0:
            a, b = ctx.mpf(xs[i]), ctx.mpf(xs[i + 1])
            fa = fmp(a)[0]
            for _ in range(200):
                if b - a < 1e-13:
                    break
                mid = (a + b) / 2
                fm = fmp(mid)[0]
                if fm == 0:
                    a = b = mid
                    break
                if (fm > 0) == (fa > 0):
                    a, fa = mid, fm
                else:
                    b = mid
            root = (a + b) / 2
            if fmp(root)[1] < 1e-8:
                return SingularAt(float(root), (float(a), float(b)))
    k = int(np.argmin(np.abs(norm)))
    if abs(norm[k]) < 1e-12:
        return SingularAt(float(xs[k]), (float(xs[max(k - 1, 0)]), float(xs[min(k + 1, len(xs) - 1)])))
    return Unknown(f"no real zero of D found on [{lo}, {hi}]")


# -- canonical tau-function form --------------------------------------------

@dataclass(frozen=True)
class CanonicalForm:
    zeta: tuple
    A: tuple
    alphas: tuple

    def profile(self, x, precision_bits: int | None = None):
        """2 (D1'/D1)' evaluated directly from the canonical parameters."""
        ctx = make_context(precision_bits)
        n = len(self.alphas)
        rates, coefs = [], []
        for mu in itertools.product((0, 1), repeat=n):
            rates.append(ctx.fsum(2 * m * a for m, a in zip(mu, self.alphas)))
            expo = ctx.fsum(2 * m * a * z for m, a, z in zip(mu, self.alphas, self.zeta))
            expo += ctx.fsum(mu[i] * mu[j] * self.A[i][j] for i, j in itertools.combinations(range(n), 2))
            coefs.append(ctx.exp(expo))
        fam = ExpFamily(rates, ctx)
        m, _w = fam.checked_moments(coefs, x, 2)
        return ctx.re(profile_derivatives(m, 0)[0])


def _vandermonde(vals):
    out = 1
    for i, j in itertools.combinations(range(len(vals)), 2):
        out *= vals[j] - vals[i]
    return out


def canonical_form(spec: SolitonSpec, check: bool = True) -> CanonicalForm:
    """Phase shifts zeta_i and interaction matrix A_ij of a sign-condition spec."""
    if spec.times:
        spec = SolitonSpec(spec.alphas, time_shift(spec, spec.times).amps)
    if not satisfies_sign_condition(spec):
        raise PreconditionViolated("canonical form needs real alphas and (-1)^(j-1) a_j > 0")
    alphas = [float(a) for a in spec.alphas]
    amps = [float(complex(a).real) for a in spec.amps]
    n = len(alphas)
    v = _vandermonde(alphas)
    zeta = []
    for i in range(n):
        flipped = alphas[:i] + [-alphas[i]] + alphas[i + 1:]
        zeta.append(math.log(abs(_vandermonde(flipped) / (amps[i] * v))) / (2 * alphas[i]))
    A = tuple(tuple(0.0 if i == j else 2 * math.log(abs((alphas[j] - alphas[i]) / (alphas[j] + alphas[i])))
                    for j in range(n)) for i in range(n))
    form = CanonicalForm(tuple(zeta), A, tuple(alphas))
    if check:
        prof = SolitonProfile(spec)
        rng = random.Random(1)
        for _ in range(5):
            x = rng.uniform(-5, 5)
            a, b = float(prof(x)), float(form.profile(x))
            if abs(a - b) > 1e-10 * max(1.0, abs(a)):
                raise ConsistencyError(f"canonical form does not reproduce the profile at x={x}")
    return form


# -- decay ------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    left_slope: float
    right_slope: float
    left_window: tuple
    right_window: tuple
    monotone: bool


def _window_start(rates, coefs, sign: int, ratio: float) -> float:
    """Smallest |x| beyond which every subdominant term is below ratio times the dominant one."""
    re = [sign * complex(r).real for r in rates]
    top = max(range(len(rates)), key=lambda t: re[t])
    start = 0.0
    for t in range(len(rates)):
        if t == top or coefs[t] == 0:
            continue
        gap = re[top] - re[t]
        need = math.log(abs(complex(coefs[t])) / (ratio * abs(complex(coefs[top])))) / gap
        start = max(start, need)
    return start


def decay_fit(spec: SolitonSpec, ratio: float = 1e-4, span: float = 15.0, points: int = 41,
              precision_bits: int | None = None) -> DecayFit:
    """Fitted slopes of log|u| on both tails (expected about -+2 min Re alpha)."""
    if spec.n == 0 or min(complex(a).real for a in spec.alphas) <= 0:
        raise PreconditionViolated("decay needs every alpha with positive real part")
    prof = SolitonProfile(spec, precision_bits)
    rates, coefs = prof.family.rates, prof.d_coefs
    width = span / (2 * min(complex(a).real for a in spec.alphas))
    slopes, windows, monotone = [], [], True
    for sign in (-1, 1):
        x0 = sign * _window_start(rates, coefs, sign, ratio)
        xs = np.linspace(x0, x0 + sign * width, points)
        logs = np.array([float(prof.ctx.log(abs(prof.derivs(x, 0, complex_values=True)[0]))) for x in xs])
        slope = float(np.polyfit(xs, logs, 1)[0])
        # xs runs outward, so log|u| must fall at every step
        monotone = monotone and bool(np.all(np.diff(logs) < 0))
        slopes.append(slope)
        windows.append((float(min(xs)), float(max(xs))))
    return DecayFit(slopes[0], slopes[1], windows[0], windows[1], monotone)
