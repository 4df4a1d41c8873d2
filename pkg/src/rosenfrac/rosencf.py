"""One-dimensional alpha-Rosen machinery: digits, T_alpha, expansions, convergents, Theta."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath

from .numfield import FieldElem, FieldError, field_setup, ivprec

__all__ = [
    "Digit", "Convergent", "Expansion", "PeriodicWord", "DomainError", "PrecisionError",
    "as_alpha", "digit", "step", "expand", "convergents", "theta_direct", "theta_from_tv",
    "theta_next", "b_seq", "realize", "format_word", "parse_word", "interval_ends",
    "is_ball", "sgn", "floor_of", "const_like", "delta_d",
]


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class PrecisionError(ArithmeticError):
    """A ball could not be resolved at the current precision."""

    def __init__(self, msg, index=None):
        super().__init__(msg if index is None else f"{msg} (index {index})")
        self.index = index


@dataclass(frozen=True, order=True)
class Digit:
    eps: int
    d: int

    def __post_init__(self):
        if self.eps not in (-1, 1):
            raise ValueError("eps must be +1 or -1")
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError("d must be a positive integer")

    def __str__(self):
        return f"({'+' if self.eps > 0 else '-'}1:{self.d})"


@dataclass(frozen=True)
class PeriodicWord:
    pre: tuple
    per: tuple

    def __post_init__(self):
        if not self.per:
            raise ValueError("empty period")

    def digits(self, n):
        out = list(self.pre[:n])
        while len(out) < n:
            out.extend(self.per)
        return out[:n]


@dataclass(frozen=True)
class Convergent:
    p: object
    q_den: object
    n: int

    @property
    def value(self):
        return self.p / self.q_den


@dataclass
class Expansion:
    digits: list
    truncated: bool = False
    orbit: list = field(default_factory=list)

    def __iter__(self) -> Iterator[Digit]:
        return iter(self.digits)

    def __len__(self):
        return len(self.digits)

    def __getitem__(self, i):
        return self.digits[i]


# ---------------------------------------------------------------- kernel helpers

def is_ball(x):
    return isinstance(x, mpmath.ctx_iv.ivmpf)


def sgn(x):
    """Certified sign of an exact element, ball or float."""
    if isinstance(x, FieldElem):
        return x.sign()
    if is_ball(x):
        if x.a > 0:
            return 1
        if x.b < 0:
            return -1
        if x.a == 0 and x.b == 0:
            return 0
        raise PrecisionError("ball straddles zero")
    if isinstance(x, (int, Fraction)):
        return (x > 0) - (x < 0)
    x = float(x)
    return (x > 0) - (x < 0)


def floor_of(x):
    if isinstance(x, FieldElem):
        return x.floor()
    if is_ball(x):
        lo, hi = int(mpmath.floor(x.a)), int(mpmath.floor(x.b))
        if lo != hi:
            raise PrecisionError("ball straddles an integer")
        return lo
    if isinstance(x, Fraction):
        return x.numerator // x.denominator
    import math
    return math.floor(x)


def const_like(c, x):
    """Represent the exact constant c in the numeric kernel of x."""
    if is_ball(x):
        return c.to_ball(mpmath.iv.prec) if isinstance(c, FieldElem) else mpmath.iv.mpf(c)
    if isinstance(x, float):
        return float(c)
    return c


def as_alpha(alpha, F):
    if isinstance(alpha, FieldElem):
        return alpha if alpha.ctx.extends(F.ctx) else F.ctx.lift(alpha)
    if isinstance(alpha, float):
        raise FieldError("alpha must be exact; pass a Fraction, string or FieldElem")
    return F.ctx(Fraction(alpha))


def interval_ends(alpha, F):
    a = as_alpha(alpha, F)
    return (a - 1) * F.lam, a * F.lam


def delta_d(d, alpha, F):
    """delta_d = 1/((alpha + d) lambda)."""
    return 1 / ((as_alpha(alpha, F) + d) * F.lam)


# ---------------------------------------------------------------- the map

def digit(x, alpha, F, check=True):
    """(sgn x, floor(|1/(lambda x)| + 1 - alpha)) for x in [(alpha-1)lambda, alpha lambda)."""
    a = as_alpha(alpha, F)
    s = sgn(x)
    if s == 0:
        raise DomainError("digit of 0 is undefined")
    lam = const_like(F.lam, x)
    if check and isinstance(x, FieldElem):
        lo, hi = interval_ends(a, F)
        if x < lo or x >= hi:
            raise DomainError("x outside [(alpha-1)lambda, alpha lambda)")
    ax = x if s > 0 else -x
    y = 1 / (lam * ax) + 1 - const_like(a, x)
    return Digit(s, floor_of(y))


def step(x, alpha, F, check=True):
    """T_alpha(x) = eps/x - d lambda, with T_alpha(0) = 0."""
    if isinstance(x, FieldElem) and x.is_zero():
        return x
    dg = digit(x, alpha, F, check)
    return dg.eps / x - dg.d * const_like(F.lam, x)


def expand(x, alpha, F, n, keep_orbit=False):
    """First n digits of x; truncated=True when the orbit reaches 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(x, (int, Fraction)):
        x = F.ctx(x)
    out, orbit = [], [x]
    for i in range(n):
        if isinstance(x, FieldElem) and x.is_zero():
            return Expansion(out, True, orbit if keep_orbit else [])
        try:
            dg = digit(x, alpha, F, check=(i == 0))
        except PrecisionError as exc:
            raise PrecisionError("precision exhausted", index=i) from exc
        out.append(dg)
        x = dg.eps / x - dg.d * const_like(F.lam, x)
        if keep_orbit:
            orbit.append(x)
    truncated = isinstance(x, FieldElem) and x.is_zero()
    return Expansion(out, truncated, orbit if keep_orbit else [])


# ---------------------------------------------------------------- convergents

def _digit_matrix(dg, lam):
    return (0, dg.eps, 1, dg.d * lam)


def convergents(digits: Sequence[Digit], F):
    """p_n/q_n via products of [[0, eps],[1, d lambda]]; q_n normalised positive."""
    if not digits:
        raise ValueError("empty digit list")
    lam = F.lam
    p_prev, p = F.ctx.one, F.ctx.zero
    q_prev, q = F.ctx.zero, F.ctx.one
    out = []
    for i, dg in enumerate(digits, 1):
        dl = dg.d * lam
        p_prev, p = p, dl * p + dg.eps * p_prev
        q_prev, q = q, dl * q + dg.eps * q_prev
        if q.sign() > 0:
            out.append(Convergent(p, q, i))
        else:
            out.append(Convergent(-p, -q, i))
    return out


def convergent_matrix(digits, F):
    """Accumulated matrix A_1 ... A_n as a 4-tuple (a, b, c, d)."""
    m = (F.ctx.one, F.ctx.zero, F.ctx.zero, F.ctx.one)
    for dg in digits:
        a, b, c, d = m
        _, e, _, dl = _digit_matrix(dg, F.lam)
        m = (b, a * e + b * dl, d, c * e + d * dl)
    return m


def theta_direct(x, conv: Convergent):
    """Theta_n = q_n^2 |x - p_n/q_n|."""
    p, q = conv.p, conv.q_den
    if is_ball(x) or isinstance(x, mpmath.mpf):
        p = const_like(p, x)
        q = const_like(q, x)
    r = q * (q * x - p)
    if is_ball(r):
        return r if r.a >= 0 else (-r if r.b <= 0 else mpmath.iv.mpf([0, max(-r.a, r.b)]))
    return abs(r)


def theta_from_tv(t, v, eps_next):
    """(Theta_{n-1}, Theta_n) from the natural extension coordinates."""
    den = 1 + t * v
    if sgn(den) <= 0:
        raise DomainError("1 + t v must be positive")
    return v / den, eps_next * t / den


def theta_next(t, v, d, eps1, eps2, lam):
    """Theta_{n+1} expressed through (t_n, v_n) and the next digits."""
    den = 1 + t * v
    if sgn(den) <= 0:
        raise DomainError("1 + t v must be positive")
    lam = const_like(lam, t)
    return eps2 * (1 - eps1 * d * lam * t) * (lam * d + eps1 * v) / den


def b_seq(n, F):
    """B_0 = 0, B_1 = 1, B_n = lambda B_{n-1} - B_{n-2}."""
    if n < 0:
        raise ValueError("n must be >= 0")
    a, b = F.ctx.zero, F.ctx.one
    for _ in range(n):
        a, b = b, F.lam * b - a
    return a


# ---------------------------------------------------------------- realize

def _apply(m, y):
    a, b, c, d = m
    return (a * y + b) / (c * y + d)


def realize(word, F, tail=None, bits=None):
    """Value of a finite word (optionally with a tail t_n) or of a PeriodicWord.

    Finite words evaluate exactly.  Periodic words return the attracting fixed
    point of the period map, exactly when its discriminant is a square in the
    field or can be adjoined, otherwise as a ball of the requested precision.
    """
    if isinstance(word, PeriodicWord):
        return _realize_periodic(word, F, bits)
    if isinstance(word, str):
        word = parse_word(word)
        if isinstance(word, PeriodicWord):
            return _realize_periodic(word, F, bits)
    if not word:
        raise ValueError("empty word")
    y = F.ctx.zero if tail is None else tail
    lam = const_like(F.lam, y)
    for dg in reversed(word):
        y = dg.eps / (dg.d * lam + y)
    return y


def _realize_periodic(word, F, bits=None):
    a, b, c, d = convergent_matrix(word.per, F)
    # fixed points of y -> (a y + b)/(c y + d): c y^2 + (d - a) y - b = 0
    disc = (d - a) ** 2 + 4 * b * c
    if c.is_zero():
        raise DomainError("parabolic or degenerate period matrix")
    if disc.sign() < 0:
        raise DomainError("elliptic period matrix: no real fixed point")
    root = disc.ctx.sqrt_exact(disc)
    if root is None:
        try:
            ctx2, root = disc.ctx.adjoin(disc)
            a, b, c, d = (ctx2.lift(z) for z in (a, b, c, d))
        except FieldError:
            root = None
    if root is None:
        bits = bits or 256
        with ivprec(bits):
            db = disc.to_ball(bits)
            rb = mpmath.iv.sqrt(db)
            ab, bb_, cb, dd = (z.to_ball(bits) for z in (a, b, c, d))
            cands = [(ab - dd + rb) / (2 * cb), (ab - dd - rb) / (2 * cb)]
            y = max(cands, key=lambda z: abs(float(cb.mid * z.mid + dd.mid)))
            pre = convergent_matrix(word.pre, F) if word.pre else None
            if pre is None:
                return y
            pa, pb, pc, pd = (z.to_ball(bits) for z in pre)
            return (pa * y + pb) / (pc * y + pd)
    cands = [(a - d + root) / (2 * c), (a - d - root) / (2 * c)]
    # attracting fixed point: |c y + d| > 1
    y = max(cands, key=lambda z: abs(c * z + d))
    if word.pre:
        return _apply(convergent_matrix(word.pre, F), y)
    return y


# ---------------------------------------------------------------- text format

_TOKEN = re.compile(r"\(([+-])1:(\d+)\)(?:\^(\d+))?")


def _fmt_run(digits):
    out, i = [], 0
    while i < len(digits):
        j = i
        while j < len(digits) and digits[j] == digits[i]:
            j += 1
        k = j - i
        out.append(str(digits[i]) + (f"^{k}" if k > 1 else ""))
        i = j
    return "".join(out)


def format_word(word):
    """Canonical text: '(-1:2)(+1:1)^3' or '[pre|per]' for periodic words."""
    if isinstance(word, PeriodicWord):
        return f"[{_fmt_run(list(word.pre))}|{_fmt_run(list(word.per))}]"
    return _fmt_run(list(word))


def _parse_run(s):
    out, pos = [], 0
    s = s.strip()
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m:
            raise ValueError(f"bad digit word near {s[pos:pos + 12]!r}")
        dg = Digit(1 if m.group(1) == "+" else -1, int(m.group(2)))
        k = int(m.group(3)) if m.group(3) else 1
        if k < 1:
            raise ValueError("repetition count must be >= 1")
        out.extend([dg] * k)
        pos = m.end()
    return out


def parse_word(s):
    s = s.strip()
    if s.startswith("["):
        if not s.endswith("]") or "|" not in s:
            raise ValueError("periodic word must look like [pre|per]")
        pre, per = s[1:-1].split("|", 1)
        return PeriodicWord(tuple(_parse_run(pre)), tuple(_parse_run(per)))
    return _parse_run(s)
