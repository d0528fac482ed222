"""Finite sums of c*exp(rate*x) with high-precision complex data.

Evaluation factors out exp(max Re(rate*x)) so that sums whose raw size is
astronomically large or small still give well-scaled ratios.  The profile
machinery below works on ratios D^(k)/D only, which makes that factor
cancel exactly.
"""

from __future__ import annotations

from math import comb
from typing import Iterable, Sequence

from .config import make_context
from .errors import PoleAt

#: |D| below this fraction of sum |terms| counts as a pole
POLE_GUARD = 1e-30


class ExpSum:
    __slots__ = ("ctx", "_terms")

    def __init__(self, terms: Iterable[tuple] = (), ctx=None):
        self.ctx = ctx or make_context()
        merged: dict = {}
        for c, r in terms:
            c, r = self.ctx.mpc(c), self.ctx.mpc(r)
            merged[r] = merged.get(r, 0) + c
        self._terms = tuple((c, r) for r, c in merged.items() if c != 0)

    @property
    def terms(self) -> tuple:
        return self._terms

    @property
    def rates(self) -> list:
        return [r for _c, r in self._terms]

    def __len__(self):
        return len(self._terms)

    def __add__(self, other: ExpSum) -> ExpSum:
        return ExpSum(self._terms + other._terms, self.ctx)

    def __neg__(self) -> ExpSum:
        return ExpSum(((-c, r) for c, r in self._terms), self.ctx)

    def __sub__(self, other: ExpSum) -> ExpSum:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ExpSum):
            return ExpSum(((c1 * c2, r1 + r2) for c1, r1 in self._terms for c2, r2 in other._terms),
                          self.ctx)
        return self.scale(other)

    def scale(self, k) -> ExpSum:
        return ExpSum(((c * k, r) for c, r in self._terms), self.ctx)

    def derive(self, n: int = 1) -> ExpSum:
        return ExpSum(((c * r ** n, r) for c, r in self._terms), self.ctx)

    def eval_scaled(self, x):
        """(value * exp(-shift), shift, sum of |scaled terms|)."""
        ctx = self.ctx
        if not self._terms:
            return ctx.mpc(0), ctx.mpf(0), ctx.mpf(0)
        x = ctx.mpf(x) if not isinstance(x, complex) else ctx.mpc(x)
        exps = [r * x for _c, r in self._terms]
        shift = max(ctx.re(z) for z in exps)
        vals = [c * ctx.exp(z - shift) for (c, _r), z in zip(self._terms, exps)]
        return ctx.fsum(vals), shift, ctx.fsum(abs(v) for v in vals)

    def __call__(self, x):
        value, shift, _mag = self.eval_scaled(x)
        return value * self.ctx.exp(shift)

    def __repr__(self):
        inner = ", ".join(f"({c}, {r})" for c, r in self._terms)
        return f"ExpSum([{inner}])"


class ExpFamily:
    """Several ExpSums over one shared list of rates, evaluated together."""

    def __init__(self, rates: Sequence, ctx):
        self.ctx = ctx
        self.rates = [ctx.mpc(r) for r in rates]
        self._powers = [[ctx.mpc(1)] for _ in self.rates]

    def _power(self, t: int, k: int):
        pw = self._powers[t]
        while len(pw) <= k:
            pw.append(pw[-1] * self.rates[t])
        return pw[k]

    def weights(self, x):
        ctx = self.ctx
        x = ctx.mpf(x)
        exps = [r * x for r in self.rates]
        shift = max(ctx.re(z) for z in exps)
        return [ctx.exp(z - shift) for z in exps], shift

    def moments(self, coefs: Sequence, w: Sequence, kmax: int) -> list:
        """Scaled values of the sum and its first kmax derivatives."""
        ctx = self.ctx
        base = [c * wt for c, wt in zip(coefs, w)]
        return [ctx.fsum(b * self._power(t, k) for t, b in enumerate(base))
                for k in range(kmax + 1)]

    def magnitude(self, coefs: Sequence, w: Sequence):
        return self.ctx.fsum(abs(c * wt) for c, wt in zip(coefs, w))

    def checked_moments(self, coefs, x, kmax: int):
        """Moments of the sum at x, raising PoleAt when the sum itself vanishes."""
        w, _shift = self.weights(x)
        m = self.moments(coefs, w, kmax)
        mag = self.magnitude(coefs, w)
        if mag == 0 or abs(m[0]) < POLE_GUARD * mag:
            raise PoleAt(x)
        return m, w


def log_derivatives(m: Sequence, order: int) -> list:
    """g, g', ..., g^(order) for g = D'/D, from the moments D^(k) (any common scale)."""
    r = [mk / m[0] for mk in m]
    g: list = []
    for k in range(order + 1):
        acc = r[k + 1]
        for j in range(k):
            acc -= comb(k, j) * g[j] * r[k - j]
        g.append(acc)
    return g


def profile_derivatives(m: Sequence, order: int) -> list:
    """u, u', ..., u^(order) for u = 2 (D'/D)'; needs moments up to order + 2."""
    g = log_derivatives(m, order + 1)
    return [2 * gk for gk in g[1:]]
