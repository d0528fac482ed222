"""Exact differential polynomials in u, u', u'', ... with rational coefficients.

A :class:`DiffPoly` maps monomials to :class:`fractions.Fraction` coefficients.
A monomial is an exponent vector ``(e0, e1, ..., eD)`` meaning
``u**e0 * u1**e1 * ... * uD**eD`` with trailing zeros stripped, so the empty
tuple is the constant monomial.  Values are immutable and hashable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from numbers import Rational
from typing import Iterable, Mapping, Sequence

from ._textparse import Parser
from .errors import MissingDerivative, NotExactDerivative

Monomial = tuple[int, ...]


def _trim(mono: Sequence[int]) -> Monomial:
    mono = list(mono)
    while mono and mono[-1] == 0:
        mono.pop()
    return tuple(mono)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, e in enumerate(b):
        out[i] += e
    return tuple(out)


def _mono_key(mono: Monomial):
    orders = [k for k, e in enumerate(mono) for _ in range(e)]
    return (len(orders), tuple(sorted(orders, reverse=True)))


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)
    raise TypeError(f"DiffPoly coefficients must be rational, got {type(c).__name__}")


class DiffPoly:
    """Element of the differential ring Q[u, u', u'', ...]."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Sequence[int], object] | None = None):
        canon: dict[Monomial, Fraction] = {}
        for mono, c in (terms or {}).items():
            c = _as_fraction(c)
            if c == 0:
                continue
            key = _trim(mono)
            total = canon.get(key, Fraction(0)) + c
            if total == 0:
                canon.pop(key, None)
            else:
                canon[key] = total
        self._terms = dict(sorted(canon.items(), key=lambda kv: _mono_key(kv[0])))
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, c) -> DiffPoly:
        return cls({(): c})

    @classmethod
    def u(cls, k: int = 0) -> DiffPoly:
        """The k-th derivative u^(k) as a polynomial."""
        mono = [0] * (k + 1)
        mono[k] = 1
        return cls({tuple(mono): 1})

    @classmethod
    def parse(cls, text: str) -> DiffPoly:
        return Parser(text, cls.constant, cls.u, lambda p: p.constant_value()).parse()

    # -- structure ----------------------------------------------------------
    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def order(self) -> int:
        """Highest derivative order present; -1 for constants."""
        return max((len(m) - 1 for m in self._terms), default=-1)

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self._terms), default=0)

    @property
    def constant_term(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def constant_value(self) -> Fraction | None:
        """The value if this polynomial is a constant, else None."""
        if not self._terms:
            return Fraction(0)
        if list(self._terms) == [()]:
            return self._terms[()]
        return None

    # -- ring operations ----------------------------------------------------
    def _coerce(self, other) -> DiffPoly:
        if isinstance(other, DiffPoly):
            return other
        if isinstance(other, (int, Fraction, Rational)):
            return DiffPoly.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        merged = dict(self._terms)
        for m, c in other._terms.items():
            merged[m] = merged.get(m, Fraction(0)) + c
        return DiffPoly(merged)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Monomial, Fraction] = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = _mono_mul(ma, mb)
                out[m] = out.get(m, Fraction(0)) + ca * cb
        return DiffPoly(out)

    __rmul__ = __mul__

    def scale(self, c) -> DiffPoly:
        c = _as_fraction(c)
        return DiffPoly({m: c * v for m, v in self._terms.items()})

    def __pow__(self, n: int) -> DiffPoly:
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = DiffPoly.constant(1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.constant(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- calculus -----------------------------------------------------------
    def derive(self) -> DiffPoly:
        return _derive(self)

    def nth_derivative(self, n: int) -> DiffPoly:
        return _nth_derivative(self, n)

    def integrate_exact(self) -> DiffPoly:
        return dp_integrate_exact(self)

    # -- evaluation ---------------------------------------------------------
    def eval(self, sample: ProfileSample):
        return dp_eval(self, sample)

    def eval_terms(self, sample: ProfileSample) -> list:
        return _eval_terms(self, sample.derivs)

    # -- rendering ----------------------------------------------------------
    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for mono, c in self._terms.items():
            mono_txt = _mono_text(mono, _uk_factor, "*")
            pieces.append(_signed_term(c, mono_txt, "*"))
        return _join_signed(pieces)

    def __repr__(self) -> str:
        return f"DiffPoly('{self}')"

    def to_prime(self) -> str:
        """Factored prime-notation rendering, e.g. ``(1/16)(u''+3u^2)``."""
        if not self._terms:
            return "0"
        const = self.constant_value()
        if const is not None:
            return str(const)
        content = _content(self._terms.values())
        inner = [(m, c / content) for m, c in self._terms.items()]
        pieces = [_signed_term(c, _mono_text(m, _prime_factor, ""), "") for m, c in inner]
        body = _join_signed(pieces, sep="")
        if content == 1:
            return body
        prefix = f"({content})" if content.denominator != 1 or content < 0 else f"{content}"
        if len(inner) == 1:
            return prefix + body
        return f"{prefix}({body})"


def _uk_factor(k: int) -> str:
    return "u" if k == 0 else f"u{k}"


def _prime_factor(k: int) -> str:
    return "u" + "'" * k


def _mono_text(mono: Monomial, factor, joiner: str) -> str:
    parts = []
    for k, e in enumerate(mono):
        if e == 0:
            continue
        parts.append(factor(k) + (f"^{e}" if e > 1 else ""))
    return joiner.join(parts)


def _signed_term(c: Fraction, mono_txt: str, joiner: str) -> tuple[bool, str]:
    neg = c < 0
    a = -c if neg else c
    if not mono_txt:
        return neg, str(a)
    if a == 1:
        return neg, mono_txt
    coef = str(a) if a.denominator == 1 else f"({a})"
    return neg, f"{coef}{joiner}{mono_txt}"


def _join_signed(pieces: list[tuple[bool, str]], sep: str = " ") -> str:
    out = []
    for i, (neg, txt) in enumerate(pieces):
        if i == 0:
            out.append(("-" if neg else "") + txt)
        else:
            out.append(f"{sep}{'-' if neg else '+'}{sep}{txt}")
    return "".join(out)


def _content(coeffs: Iterable[Fraction]) -> Fraction:
    coeffs = list(coeffs)
    num = reduce(math.gcd, (abs(c.numerator) for c in coeffs))
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for c in coeffs))
    content = Fraction(num, den)
    return -content if coeffs[0] < 0 else content


@lru_cache(maxsize=None)
def _derive(p: DiffPoly) -> DiffPoly:
    out: dict[Monomial, Fraction] = {}
    for mono, c in p.items():
        for k, e in enumerate(mono):
            if e == 0:
                continue
            new = list(mono) + [0]
            new[k] -= 1
            new[k + 1] += 1
            key = _trim(new)
            out[key] = out.get(key, Fraction(0)) + c * e
    return DiffPoly(out)


@lru_cache(maxsize=None)
def _nth_derivative(p: DiffPoly, n: int) -> DiffPoly:
    if n == 0:
        return p
    return _derive(_nth_derivative(p, n - 1))


@dataclass(frozen=True)
class ProfileSample:
    """Values of u, u', ..., u^(d) at one abscissa."""

    x: object
    derivs: tuple

    def __post_init__(self):
        object.__setattr__(self, "derivs", tuple(self.derivs))

    @property
    def max_order(self) -> int:
        return len(self.derivs) - 1


def dp_add(a: DiffPoly, b: DiffPoly) -> DiffPoly:
    return a + b


def dp_mul(a: DiffPoly, b: DiffPoly) -> DiffPoly:
    return a * b


def dp_derive(a: DiffPoly) -> DiffPoly:
    return _derive(a)


def dp_integrate_exact(a: DiffPoly) -> DiffPoly:
    """Antiderivative with zero constant term, or NotExactDerivative.

    Strips the top derivative u^(n): an exact derivative is linear in u^(n)
    with coefficient A, and A integrated in u^(n-1) is the top part of the
    antiderivative.  Repeat on the lower-order remainder.
    """
    remainder = a
    result = DiffPoly()
    while remainder:
        n = remainder.order
        if n <= 0:
            raise NotExactDerivative(f"{a} is not the derivative of a differential polynomial")
        candidate: dict[Monomial, Fraction] = {}
        for mono, c in remainder.items():
            e_top = mono[n] if len(mono) > n else 0
            if e_top > 1:
                raise NotExactDerivative(f"{a} is nonlinear in u^({n})")
            if e_top == 0:
                continue
            m = list(mono[:n])
            e_prev = m[n - 1]
            m[n - 1] = e_prev + 1
            candidate[tuple(m)] = c / (e_prev + 1)
        piece = DiffPoly(candidate)
        result = result + piece
        remainder = remainder - _derive(piece)
        if remainder and remainder.order >= n:
            raise NotExactDerivative(f"{a} is not the derivative of a differential polynomial")
    return result


def _coef_times(c: Fraction, value):
    if c.denominator == 1:
        return value * c.numerator
    return value * c.numerator / c.denominator


def _eval_terms(p: DiffPoly, derivs: Sequence) -> list:
    if p.order >= len(derivs):
        raise MissingDerivative(
            f"need u up to order {p.order}, sample provides {len(derivs) - 1}")
    exact = all(isinstance(v, (int, Fraction)) for v in derivs)
    out = []
    for mono, c in p.items():
        value = Fraction(1) if exact else 1
        for k, e in enumerate(mono):
            if e:
                value = value * derivs[k] ** e
        if not mono and not exact:
            # constants inherit the number type of the sample
            value = derivs[0] * 0 + 1 if derivs else 1
        out.append(c * value if exact else _coef_times(c, value))
    return out


def dp_eval(a: DiffPoly, s: ProfileSample):
    """Substitute sampled values for u, u', ...; exact when the sample is rational."""
    terms = _eval_terms(a, s.derivs)
    if not terms:
        return Fraction(0) if all(isinstance(v, (int, Fraction)) for v in s.derivs) else (
            s.derivs[0] * 0 if s.derivs else 0)
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total


U = DiffPoly.u(0)
