"""Truncated pseudo-differential operators with DiffPoly coefficients.

An operator ``X = sum_i a_i d^i`` is stored as a dict ``{i: a_i}`` plus a
``floor``: every coefficient of order >= floor is exact, nothing below it is
stored.  ``floor=None`` marks an operator known exactly (finitely many terms,
e.g. ``d``, ``L = d^2 + u`` or a differential part).  Every product computes
the floor it can certify from its operands, so truncation error never leaks
into a coefficient that is reported.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .diffalg import DiffPoly
from .errors import InsufficientTruncation, NotMonic, OrderNotDivisible

#: orders retained below the leading order when an exact product is infinite
DEFAULT_DEPTH = 12

_ZERO = DiffPoly()
_ONE = DiffPoly.constant(1)


@lru_cache(maxsize=None)
def gbinom(k: int, i: int) -> Fraction:
    """Generalized binomial k(k-1)...(k-i+1)/i!, valid for negative k."""
    out = Fraction(1)
    for r in range(i):
        out = out * (k - r) / (r + 1)
    return out


class PsdOp:
    __slots__ = ("_coeffs", "floor", "_hash")

    def __init__(self, coeffs: dict[int, DiffPoly] | None = None, floor: int | None = None):
        clean = {}
        for i, a in (coeffs or {}).items():
            if not isinstance(a, DiffPoly):
                a = DiffPoly.constant(a)
            if a and (floor is None or i >= floor):
                clean[int(i)] = a
        self._coeffs = dict(sorted(clean.items(), reverse=True))
        self.floor = floor
        self._hash = None
        if floor is not None and self._coeffs and floor > max(self._coeffs):
            raise ValueError("trunc floor above the leading order")

    # -- constructors -------------------------------------------------------
    @classmethod
    def d(cls, k: int = 1) -> PsdOp:
        return cls({k: _ONE})

    @classmethod
    def from_poly(cls, a: DiffPoly) -> PsdOp:
        return cls({0: a})

    @classmethod
    def identity(cls) -> PsdOp:
        return cls({0: _ONE})

    @classmethod
    def lax(cls) -> PsdOp:
        """L = d^2 + u."""
        return cls({2: _ONE, 0: DiffPoly.u()})

    # -- structure ----------------------------------------------------------
    @property
    def coeffs(self) -> dict[int, DiffPoly]:
        return dict(self._coeffs)

    @property
    def exact(self) -> bool:
        return self.floor is None

    @property
    def order(self) -> int | None:
        """Leading order, or None for the zero operator."""
        return next(iter(self._coeffs), None)

    @property
    def _top(self) -> int | None:
        # order bound used for truncation bookkeeping; None only for exact zero
        if self._coeffs:
            return self.order
        return None if self.floor is None else self.floor - 1

    def coeff(self, i: int) -> DiffPoly:
        if self.floor is not None and i < self.floor:
            raise InsufficientTruncation(
                f"coefficient of d^{i} requested but only orders >= {self.floor} are certified")
        return self._coeffs.get(i, _ZERO)

    def leading(self) -> DiffPoly:
        if not self._coeffs:
            raise ValueError("zero operator has no leading coefficient")
        return self._coeffs[self.order]

    def is_zero(self) -> bool:
        return not self._coeffs

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: PsdOp) -> PsdOp:
        floor = _max_floor(self.floor, other.floor)
        out = dict(self._coeffs)
        for i, a in other._coeffs.items():
            out[i] = out.get(i, _ZERO) + a
        return PsdOp(out, floor)

    def __neg__(self) -> PsdOp:
        return PsdOp({i: -a for i, a in self._coeffs.items()}, self.floor)

    def __sub__(self, other: PsdOp) -> PsdOp:
        return self + (-other)

    def __mul__(self, other: PsdOp) -> PsdOp:
        return op_mul(self, other)

    def lmul(self, a: DiffPoly) -> PsdOp:
        """Left multiplication by a coefficient: a * X."""
        return PsdOp({i: a * c for i, c in self._coeffs.items()}, self.floor)

    def __eq__(self, other):
        if not isinstance(other, PsdOp):
            return NotImplemented
        return self.floor == other.floor and self._coeffs == other._coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self._coeffs.items()), self.floor))
        return self._hash

    def agrees_with(self, other: PsdOp) -> bool:
        """Equality on the order range both operands certify."""
        floor = _max_floor(self.floor, other.floor)
        orders = {i for i in (*self._coeffs, *other._coeffs) if floor is None or i >= floor}
        return all(self._coeffs.get(i, _ZERO) == other._coeffs.get(i, _ZERO) for i in orders)

    # -- text ---------------------------------------------------------------
    def __str__(self) -> str:
        parts = [f"({a})*d^{i}" for i, a in self._coeffs.items()]
        if self.floor is not None:
            parts.append(f"O(d^{self.floor - 1})")
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"PsdOp('{self}')"

    @classmethod
    def parse(cls, text: str) -> PsdOp:
        coeffs: dict[int, DiffPoly] = {}
        floor = None
        pos, n = 0, len(text)
        while pos < n:
            ch = text[pos]
            if ch in " +":
                pos += 1
            elif text.startswith("O(d^", pos):
                end = text.index(")", pos)
                floor = int(text[pos + 4:end]) + 1
                pos = end + 1
            elif ch == "(":
                depth, end = 0, pos
                while True:
                    depth += {"(": 1, ")": -1}.get(text[end], 0)
                    if depth == 0:
                        break
                    end += 1
                poly = DiffPoly.parse(text[pos + 1:end])
                rest = text[end + 1:].lstrip()
                if not rest.startswith("*d^"):
                    raise ValueError(f"expected '*d^' after coefficient in {text!r}")
                start = n - len(rest) + 3
                stop = start
                while stop < n and (text[stop].isdigit() or (stop == start and text[stop] == "-")):
                    stop += 1
                i = int(text[start:stop])
                coeffs[i] = coeffs.get(i, _ZERO) + poly
                pos = stop
            elif text.startswith("0", pos) and text.strip() == "0":
                pos = n
            else:
                raise ValueError(f"cannot parse operator text {text!r}")
        return cls(coeffs, floor)


def _max_floor(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _product_terms(xc: dict[int, DiffPoly], yc: dict[int, DiffPoly], lo: int):
    """Composition rule restricted to orders >= lo; returns (coeffs, dropped_nonzero)."""
    out: dict[int, DiffPoly] = {}
    dropped = False
    for i, a in xc.items():
        for j, b in yc.items():
            l = 0
            while True:
                binom = gbinom(i, l)
                if binom == 0:
                    break
                db = b.nth_derivative(l)
                if not db:
                    break
                order = i + j - l
                if order < lo:
                    dropped = True
                    break
                out[order] = out.get(order, _ZERO) + (a * db).scale(binom)
                l += 1
    return out, dropped


def _product_coeff(xc: dict[int, DiffPoly], yc: dict[int, DiffPoly], order: int) -> DiffPoly:
    total = _ZERO
    for i, a in xc.items():
        for j, b in yc.items():
            l = i + j - order
            if l < 0:
                continue
            binom = gbinom(i, l)
            if binom:
                total = total + (a * b.nth_derivative(l)).scale(binom)
    return total


def op_mul(x: PsdOp, y: PsdOp, depth: int = DEFAULT_DEPTH) -> PsdOp:
    """Product via the generalized Leibniz rule with certified truncation floor."""
    tx, ty = x._top, y._top
    if tx is None or ty is None:
        return PsdOp()
    lo = tx + ty - depth
    if x.floor is not None:
        lo = max(lo, x.floor + ty)
    if y.floor is not None:
        lo = max(lo, tx + y.floor)
    out, dropped = _product_terms(x._coeffs, y._coeffs, lo)
    exact = x.floor is None and y.floor is None and not dropped
    return PsdOp(out, None if exact else lo)


def op_commutator(x: PsdOp, y: PsdOp, depth: int = DEFAULT_DEPTH) -> PsdOp:
    return op_mul(x, y, depth) - op_mul(y, x, depth)


def _require_monic(x: PsdOp):
    if x.is_zero() or x.leading() != _ONE:
        raise NotMonic(f"leading coefficient of {x} is not the constant 1")


def op_inverse(x: PsdOp, depth: int = DEFAULT_DEPTH) -> PsdOp:
    """Inverse of a monic operator, solved coefficient by coefficient from X X^-1 = 1."""
    _require_monic(x)
    M = x.order
    floor = -M - depth
    if x.floor is not None:
        floor = max(floor, x.floor - 2 * M)
    b: dict[int, DiffPoly] = {-M: _ONE}
    for k in range(1, -M - floor + 1):
        b[-M - k] = -_product_coeff(x._coeffs, b, -k)
    return PsdOp(b, floor)


def op_root(x: PsdOp, m: int, depth: int = DEFAULT_DEPTH) -> PsdOp:
    """The m-th root with leading coefficient 1."""
    return _root_cached(x, m, depth)


@lru_cache(maxsize=64)
def _root_cached(x: PsdOp, m: int, depth: int) -> PsdOp:
    if m < 1:
        raise ValueError("root index must be positive")
    _require_monic(x)
    M = x.order
    if M % m:
        raise OrderNotDivisible(f"order {M} is not divisible by {m}")
    q = M // m
    floor = q - depth
    if x.floor is not None:
        floor = max(floor, q - (M - x.floor))
    c: dict[int, DiffPoly] = {q: _ONE}
    for k in range(1, q - floor + 1):
        # coefficient of Y^m at order M-k equals m*c_{q-k} + terms from known c's
        partial = c
        for _ in range(m - 2):
            partial, _dropped = _product_terms(partial, c, (m - 1) * q - k)
        known = _product_coeff(partial, c, M - k) if m > 1 else _ZERO
        target = x._coeffs.get(M - k, _ZERO)
        c[q - k] = (target - known).scale(Fraction(1, m))
    return PsdOp(c, floor)


def op_pow(x: PsdOp, n: int, depth: int = DEFAULT_DEPTH) -> PsdOp:
    if n < 0:
        return op_pow(op_inverse(x, depth), -n, depth)
    result = PsdOp.identity()
    for _ in range(n):
        result = op_mul(result, x, depth)
    return result


def op_pow_frac(x: PsdOp, k: int, m: int, depth: int = DEFAULT_DEPTH) -> PsdOp:
    """X^{k/m} as the k-th power of X^{1/m}."""
    return op_pow(op_root(x, m, depth), k, depth)


def op_diff_part(x: PsdOp) -> PsdOp:
    if x.floor is not None and x.floor > 0:
        raise InsufficientTruncation(f"differential part needs floor <= 0, have {x.floor}")
    return PsdOp({i: a for i, a in x.coeffs.items() if i >= 0})


def op_minus_part(x: PsdOp) -> PsdOp:
    if x.floor is not None and x.floor > 0:
        raise InsufficientTruncation(f"X_- needs floor <= 0, have {x.floor}")
    return PsdOp({i: a for i, a in x.coeffs.items() if i < 0}, x.floor)


def op_residue(x: PsdOp) -> DiffPoly:
    return x.coeff(-1)


def op_sigma2(x: PsdOp) -> PsdOp:
    return PsdOp({-1: x.coeff(-1), -2: x.coeff(-2)})
