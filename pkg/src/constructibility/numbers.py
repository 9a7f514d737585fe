"""Exact constructible reals.

A value is either a rational leaf or ``a + b*sqrt(r)`` where ``r`` is the
radicand of a tower level and ``a``, ``b`` only involve lower levels.  The
tower is session-wide and append-only.  Levels are keyed by the textual form
of their radicand and ordered by ``(height, text)``, so the representation of
a computed value does not depend on the order in which levels were created.
That makes serialized output reproducible from one process to the next.

Equality is decided by the sign of the difference; nothing here relies on a
canonical normal form.
"""

from __future__ import annotations

import ast
import math
import os
import threading
from contextlib import contextmanager
from fractions import Fraction
from typing import NamedTuple, Union

__all__ = [
    "ConstructibleReal",
    "Interval",
    "BudgetExceeded",
    "DivisionByZero",
    "NegativeRadicand",
    "real",
    "sqrt",
    "sign",
    "approx",
    "floor",
    "parse_real",
    "node_budget",
    "tower_size",
    "ZERO",
    "ONE",
]


class BudgetExceeded(RuntimeError):
    """An expression or search grew past its configured limit."""


class DivisionByZero(ZeroDivisionError):
    pass


class NegativeRadicand(ValueError):
    pass


_FILTER_BITS = 64
_SMALL_PRIMES = [p for p in range(2, 1000) if all(p % d for d in range(2, int(p ** 0.5) + 1))]

_budget = threading.local()
_DEFAULT_NODE_LIMIT = int(os.environ.get("CONSTRUCTIBILITY_MAX_NODES", "250000"))


def _node_limit():
    return getattr(_budget, "limit", _DEFAULT_NODE_LIMIT)


@contextmanager
def node_budget(limit):
    """Temporarily cap the node count of any single value built in this thread."""
    old = _node_limit()
    _budget.limit = limit
    try:
        yield
    finally:
        _budget.limit = old


class Level:
    __slots__ = ("radicand", "height", "key", "text", "_iv")

    def __init__(self, radicand, text):
        self.radicand = radicand
        self.text = text
        self.height = 1 + _height(radicand)
        self.key = (self.height, text)
        self._iv = {}

    def __repr__(self):
        return f"Level(sqrt({self.text}))"


def _height(x):
    return 0 if x.level is None else x.level.height


class Tower:
    """Session-global registry of quadratic extension levels.

    Lookups and appends are serialized by a lock (single writer)."""

    def __init__(self):
        self._levels = {}
        self._lock = threading.Lock()

    def level_for(self, radicand):
        text = radicand.to_str()
        with self._lock:
            lev = self._levels.get(text)
            if lev is None:
                lev = Level(radicand, text)
                self._levels[text] = lev
            return lev

    def __len__(self):
        return len(self._levels)


TOWER = Tower()


def tower_size():
    return len(TOWER)


def _above(l1, l2):
    """True if level l1 sits strictly above l2 (None is the rational base)."""
    if l1 is l2:
        return False
    if l2 is None:
        return True
    if l1 is None:
        return False
    return l1.key > l2.key


Number = Union["ConstructibleReal", int, Fraction]


class ConstructibleReal:
    """Immutable exact real in the quadratic tower."""

    __slots__ = ("q", "a", "b", "level", "size", "_sign", "_iv", "_str")

    def __init__(self, q=None, a=None, b=None, level=None):
        self.q = q
        self.a = a
        self.b = b
        self.level = level
        self._sign = None
        self._iv = None
        self._str = None
        if level is None:
            self.size = 1
        else:
            self.size = a.size + b.size + 1
            if self.size > _node_limit():
                raise BudgetExceeded(f"expression size {self.size} exceeds node budget {_node_limit()}")

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def rational(q):
        return ConstructibleReal(q=Fraction(q))

    def is_rational(self):
        return self.level is None

    def as_fraction(self):
        if self.level is not None:
            raise ValueError(f"{self} is not a rational leaf")
        return self.q

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _add(self, _neg(other))

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _add(other, _neg(self))

    def __neg__(self):
        return _neg(self)

    def __pos__(self):
        return self

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _mul(self, _inv(other))

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _mul(other, _inv(self))

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- comparisons ------------------------------------------------------------

    def sign(self):
        if self._sign is None:
            self._sign = _sign(self)
        return self._sign

    def __eq__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).sign() == 0

    def __ne__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).sign() != 0

    def __lt__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).sign() < 0

    def __le__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).sign() <= 0

    def __gt__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).sign() > 0

    def __ge__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).sign() >= 0

    # equal values can have different representations
    __hash__ = None

    def __bool__(self):
        return self.sign() != 0

    def __float__(self):
        return float(approx(self, 53).mid)

    # -- text -------------------------------------------------------------------

    def to_str(self):
        if self._str is None:
            if self.level is None:
                self._str = str(self.q)
            else:
                self._str = f"({self.a.to_str()} + ({self.b.to_str()} * sqrt({self.level.text})))"
        return self._str

    __str__ = to_str

    def __repr__(self):
        return f"ConstructibleReal({self.to_str()!r})"

    def describe(self, bits=40):
        """Serialization followed by a decimal approximation comment."""
        if self.level is None:
            return self.to_str()
        return f"{self.to_str()}  # ~{float(approx(self, bits).mid):.12g}"


ZERO = ConstructibleReal(q=Fraction(0))
ONE = ConstructibleReal(q=Fraction(1))


def _coerce(x):
    if isinstance(x, ConstructibleReal):
        return x
    if isinstance(x, (int, Fraction)):
        return ConstructibleReal(q=Fraction(x))
    return None


def real(x) -> ConstructibleReal:
    """Coerce an int, Fraction, serialized string, or ConstructibleReal."""
    if isinstance(x, str):
        return parse_real(x)
    out = _coerce(x)
    if out is None:
        raise TypeError(f"cannot convert {type(x).__name__} to ConstructibleReal")
    return out


def _make(a, b, level):
    if b.level is None and b.q == 0:
        return a
    if b.sign() == 0:
        return a
    return ConstructibleReal(a=a, b=b, level=level)


def _add(x, y):
    if x.level is None and y.level is None:
        return ConstructibleReal(q=x.q + y.q)
    if x.level is y.level:
        return _make(_add(x.a, y.a), _add(x.b, y.b), x.level)
    if _above(x.level, y.level):
        return ConstructibleReal(a=_add(x.a, y), b=x.b, level=x.level)
    return ConstructibleReal(a=_add(x, y.a), b=y.b, level=y.level)


def _neg(x):
    if x.level is None:
        return ConstructibleReal(q=-x.q)
    return ConstructibleReal(a=_neg(x.a), b=_neg(x.b), level=x.level)


def _mul(x, y):
    if x.level is None and y.level is None:
        return ConstructibleReal(q=x.q * y.q)
    if y.level is None and y.q == 0 or x.level is None and x.q == 0:
        return ZERO
    if x.level is y.level:
        r = x.level.radicand
        a = _add(_mul(x.a, y.a), _mul(_mul(x.b, y.b), r))
        b = _add(_mul(x.a, y.b), _mul(x.b, y.a))
        return _make(a, b, x.level)
    if _above(y.level, x.level):
        x, y = y, x
    # y lives strictly below x's level and is nonzero, so b*y stays nonzero
    return ConstructibleReal(a=_mul(x.a, y), b=_mul(x.b, y), level=x.level)


def _inv(x):
    if x.level is None:
        if x.q == 0:
            raise DivisionByZero("division by zero")
        return ConstructibleReal(q=1 / x.q)
    if x.sign() == 0:
        raise DivisionByZero("division by zero")
    a, b, r = x.a, x.b, x.level.radicand
    norm = _add(_mul(a, a), _neg(_mul(_mul(b, b), r)))
    if norm.sign() == 0:
        # redundant level: sqrt(r) = |a/b| in the lower field, so x = 2a
        return _inv(_add(a, a))
    inv_norm = _inv(norm)
    return ConstructibleReal(a=_mul(a, inv_norm), b=_neg(_mul(b, inv_norm)), level=x.level)


def _sign(x):
    if x.level is None:
        return (x.q > 0) - (x.q < 0)
    lo, hi = _interval(x, _FILTER_BITS)
    if lo > 0:
        return 1
    if hi < 0:
        return -1
    sa = x.a.sign()
    sb = x.b.sign()
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb if sa == 0 else sa
    r = x.level.radicand
    d = _add(_mul(x.a, x.a), _neg(_mul(_mul(x.b, x.b), r)))
    return sa * d.sign()


def sign(x) -> int:
    return real(x).sign()


# -- interval evaluation ---------------------------------------------------------


class Interval(NamedTuple):
    """Closed dyadic interval ``[lo, hi]`` with Fraction endpoints."""

    lo: Fraction
    hi: Fraction

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    def contains(self, v):
        return self.lo <= v <= self.hi

    def excludes_zero(self):
        return self.lo > 0 or self.hi < 0


def _interval(x, w):
    """Integers (lo, hi) with lo*2^-w <= x <= hi*2^-w."""
    if x._iv is not None:
        cached = x._iv.get(w)
        if cached is not None:
            return cached
    else:
        x._iv = {}
    if x.level is None:
        n, d = x.q.numerator, x.q.denominator
        lo = (n << w) // d
        hi = -((-n << w) // d)
    else:
        alo, ahi = _interval(x.a, w)
        blo, bhi = _interval(x.b, w)
        rlo, rhi = _sqrt_interval(x.level, w)
        prods = (blo * rlo, blo * rhi, bhi * rlo, bhi * rhi)
        lo = alo + (min(prods) >> w)
        hi = ahi - ((-max(prods)) >> w)
    x._iv[w] = (lo, hi)
    return lo, hi


def _sqrt_interval(level, w):
    cached = level._iv.get(w)
    if cached is not None:
        return cached
    lo, hi = _interval(level.radicand, w)
    lo = math.isqrt(max(lo, 0) << w)
    hi = math.isqrt(max(hi, 0) << w) + 1
    level._iv[w] = (lo, hi)
    return lo, hi


def approx(x, precision_bits: int) -> Interval:
    """Interval of width <= 2^-precision_bits containing x.

    Working precision doubles until the width target is met."""
    if precision_bits < 1:
        raise ValueError("precision_bits must be >= 1")
    x = real(x)
    w = precision_bits + 16
    while True:
        lo, hi = _interval(x, w)
        if (hi - lo) << precision_bits <= (1 << w):
            return Interval(Fraction(lo, 1 << w), Fraction(hi, 1 << w))
        w *= 2


def floor(x) -> int:
    x = real(x)
    if x.level is None:
        return math.floor(x.q)
    iv = approx(x, 8)
    c = math.floor(iv.hi)
    return c if (x - c).sign() >= 0 else c - 1


# -- square roots ----------------------------------------------------------------


def _rational_sqrt(q):
    """(k, f) with sqrt(q) = k*sqrt(f), f a positive integer with no small square factors."""
    n, d = q.numerator, q.denominator
    m = n * d
    k = Fraction(1, d)
    s = math.isqrt(m)
    if s * s == m:
        return k * s, 1
    for p in _SMALL_PRIMES:
        pp = p * p
        if pp > m:
            break
        while m % pp == 0:
            m //= pp
            k *= p
    s = math.isqrt(m)
    if s * s == m:
        return k * s, 1
    return k, m


def _try_sqrt(x):
    """Square root of x inside the current fields, or None. Never adds levels."""
    if x.level is None:
        k, f = _rational_sqrt(x.q)
        return ConstructibleReal(q=k) if f == 1 else None
    a, b, r = x.a, x.b, x.level.radicand
    n = _add(_mul(a, a), _neg(_mul(_mul(b, b), r)))
    if n.sign() < 0:
        return None
    s = _try_sqrt(n)
    if s is None:
        return None
    half = ConstructibleReal(q=Fraction(1, 2))
    for cand in (_mul(_add(a, s), half), _mul(_add(a, _neg(s)), half)):
        if cand.sign() <= 0:
            continue
        p = _try_sqrt(cand)
        if p is None:
            continue
        qq = _mul(b, _inv(_add(p, p)))
        root = ConstructibleReal(a=p, b=qq, level=x.level) if qq.sign() else p
        if _add(_mul(root, root), _neg(x)).sign() == 0:
            return abs(root)
    return None


def sqrt(x) -> ConstructibleReal:
    """Exact nonnegative square root; appends a tower level only when needed."""
    x = real(x)
    s = x.sign()
    if s < 0:
        raise NegativeRadicand(f"sqrt of negative value {x.describe()}")
    if s == 0:
        return ZERO
    if x.level is None:
        k, f = _rational_sqrt(x.q)
        if f == 1:
            return ConstructibleReal(q=k)
        lev = TOWER.level_for(ConstructibleReal(q=Fraction(f)))
        return ConstructibleReal(a=ZERO, b=ConstructibleReal(q=k), level=lev)
    root = _try_sqrt(x)
    if root is not None:
        return root
    lev = TOWER.level_for(x)
    return ConstructibleReal(a=ZERO, b=ONE, level=lev)


# -- parsing ---------------------------------------------------------------------


def parse_real(text: str) -> ConstructibleReal:
    """Parse the serialization produced by ``to_str`` (``#`` starts a comment)."""
    body = text.split("#", 1)[0].strip()
    if not body:
        raise ValueError("empty number")
    try:
        tree = ast.parse(body, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"malformed number {body!r}") from exc
    return _eval(tree.body, body)


def _eval(node, src):
    if isinstance(node, ast.Constant) and type(node.value) is int:
        return ConstructibleReal(q=Fraction(node.value))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand, src)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        lhs = _eval(node.left, src)
        rhs = _eval(node.right, src)
        if isinstance(node.op, ast.Add):
            return lhs + rhs
        if isinstance(node.op, ast.Sub):
            return lhs - rhs
        if isinstance(node.op, ast.Mult):
            return lhs * rhs
        if isinstance(node.op, ast.Div):
            return lhs / rhs
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id == "sqrt"
        and len(node.args) == 1
        and not node.keywords
    ):
        return sqrt(_eval(node.args[0], src))
    raise ValueError(f"unsupported syntax in number {src!r}")
