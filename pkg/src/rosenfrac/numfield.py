"""Exact arithmetic in Q(lambda_q) and multi-quadratic extensions of it.

Elements are stored as integer coordinate vectors over a common positive
denominator.  The basis is lambda^i * sqrt(D_S) where S runs over subsets
of the adjoined radicands D_1..D_k (each an integral polynomial in lambda).
Sign decisions are certified with pure-integer interval arithmetic, so no
global floating state is touched.
"""
from __future__ import annotations

import math
import threading
from fractions import Fraction
from functools import reduce

import mpmath

__all__ = [
    "FieldError", "UndecidedError", "FieldContext", "FieldElem",
    "field_setup", "minpoly_lambda", "ivprec", "DEFAULT_PRECISION", "PRECISION_CAP",
]

DEFAULT_PRECISION = 256
PRECISION_CAP = 1 << 16


class FieldError(ValueError):
    """Parameter or domain error in field arithmetic."""


class UndecidedError(ArithmeticError):
    """Sign could not be certified below the precision cap."""


# ---------------------------------------------------------------- polynomials

def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _pdivexact(a, b):
    a = list(a)
    out = [0] * (len(a) - len(b) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = a[i + len(b) - 1] // b[-1]
        out[i] = c
        for j, y in enumerate(b):
            a[i + j] -= c * y
    if any(a):
        raise FieldError("inexact polynomial division")
    return out


def _cyclotomic(n):
    # Phi_n = (x^n - 1) / prod_{d | n, d < n} Phi_d
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num = _pdivexact(num, _cyclotomic(d))
    return num


def minpoly_lambda(q):
    """Minimal polynomial of 2cos(pi/q), low-to-high integer coefficients."""
    if q < 3:
        raise FieldError("q must be >= 3")
    phi = _cyclotomic(2 * q)
    m = (len(phi) - 1) // 2
    # phi(x) / x^m = a_0 + sum_j a_j (x^j + x^-j) with x^j + x^-j = C_j(x + 1/x)
    cheb = [[2], [0, 1]]
    for _ in range(2, m + 1):
        nxt = [0] + cheb[-1]
        for i, c in enumerate(cheb[-2]):
            nxt[i] -= c
        cheb.append(nxt)
    poly = [0] * (m + 1)
    poly[0] = phi[m]
    for j in range(1, m + 1):
        for i, c in enumerate(cheb[j]):
            poly[i] += phi[m + j] * c
    return tuple(poly)


def _conjugates(q):
    return [2 * mpmath.cos(k * mpmath.pi / q) for k in range(1, q, 2) if math.gcd(k, q) == 1]


# ---------------------------------------------------------------- intervals

_iv_lock = threading.RLock()


class ivprec:
    """Set mpmath's interval precision for a block (the interval context is global)."""

    def __init__(self, bits):
        self.bits = bits

    def __enter__(self):
        _iv_lock.acquire()
        self.saved = mpmath.iv.prec
        mpmath.iv.prec = self.bits
        return self

    def __exit__(self, *exc):
        mpmath.iv.prec = self.saved
        _iv_lock.release()
        return False


def _ceil_div(a, b):
    return -((-a) // b)


class _Enclosure:
    """Integer enclosures of lambda^i and sqrt(D_S), scaled by 2^prec."""

    def __init__(self, ctx, prec):
        self.prec = prec
        one = 1 << prec
        n = ctx.degree
        lo, hi = ctx._isolate_lambda(prec)
        pw = [(one, one)]
        for _ in range(1, max(n, 2 * n - 1)):
            a, b = pw[-1]
            pw.append(((a * lo) >> prec, _ceil_div(b * hi, one)))
        self.pows = pw[:n]
        self.surd = [(one, one)]
        for mask in range(1, 1 << len(ctx.surds)):
            rad = ctx._radicand(mask)
            a, b = _poly_interval(rad, self.pows, 1)
            if a < 0:
                raise FieldError("radicand not positive at enclosure")
            # a, b are scaled by 2^prec; sqrt scaled by 2^prec is isqrt(a * 2^prec)
            slo = math.isqrt(a << prec)
            shi = math.isqrt(b << prec)
            if shi * shi < (b << prec):
                shi += 1
            self.surd.append((slo, shi))


def _poly_interval(coeffs, pows, den):
    lo = hi = 0
    for c, (a, b) in zip(coeffs, pows):
        if c > 0:
            lo += c * a
            hi += c * b
        elif c < 0:
            lo += c * b
            hi += c * a
    return lo, hi


# ---------------------------------------------------------------- context

class FieldContext:
    """Q(lambda_q)(sqrt D_1, ..., sqrt D_k); obtain through field_setup / adjoin."""

    _registry: dict = {}
    _registry_lock = threading.Lock()

    def __init__(self, q, surds):
        self.q = q
        self.minpoly = minpoly_lambda(q)
        self.degree = len(self.minpoly) - 1
        self.surds = tuple(tuple(s) for s in surds)
        self.nmask = 1 << len(self.surds)
        self.size = self.degree * self.nmask
        n = self.degree
        # x^k for k < 2n-1 reduced mod minpoly
        red = []
        for k in range(2 * n - 1):
            if k < n:
                v = [0] * n
                v[k] = 1
            else:
                prev = red[-1]
                top = prev[-1]
                v = [0] + prev[:-1]
                for i in range(n):
                    v[i] -= top * self.minpoly[i]
            red.append(v)
        self._red = red
        self._rad_cache = {0: (1,) + (0,) * (n - 1)}
        self._enc = {}
        self._enc_lock = threading.Lock()
        self._lam_float = float(2 * mpmath.cos(mpmath.pi / q))
        self._float_basis = None
        self.zero = FieldElem(self, (0,) * self.size, 1)
        self.one = self._const(1)
        v = [0] * self.size
        if n > 1:
            v[1] = 1
            self.lam = FieldElem(self, tuple(v), 1)
        else:
            self.lam = self._const(int(round(self._lam_float)))
        self.base = self if not self.surds else FieldContext.get(q, ())

    # construction -----------------------------------------------------------
    @classmethod
    def get(cls, q, surds=()):
        key = (q, tuple(tuple(s) for s in surds))
        with cls._registry_lock:
            ctx = cls._registry.get(key)
        if ctx is None:
            ctx = cls(q, key[1])
            with cls._registry_lock:
                ctx = cls._registry.setdefault(key, ctx)
        return ctx

    def __repr__(self):
        return f"FieldContext(q={self.q}, surds={len(self.surds)})"

    def __reduce__(self):
        return (FieldContext.get, (self.q, self.surds))

    def _const(self, c):
        c = Fraction(c)
        v = [0] * self.size
        v[0] = c.numerator
        return FieldElem(self, tuple(v), c.denominator)

    def __call__(self, x):
        """Coerce int, Fraction, decimal string or FieldElem into this field."""
        if isinstance(x, FieldElem):
            return self.lift(x)
        if isinstance(x, float):
            raise FieldError("floats are not exact; pass a Fraction or string")
        return self._const(Fraction(x))

    def from_poly(self, coeffs, mask=0, den=1):
        coeffs = [Fraction(c) for c in coeffs]
        coeffs += [Fraction(0)] * (self.degree - len(coeffs))
        d = reduce(lambda a, b: a * b.denominator // math.gcd(a, b.denominator), coeffs, 1)
        vec = self._reduce_poly([int(c * d) for c in coeffs])
        out = [0] * self.size
        out[mask * self.degree:(mask + 1) * self.degree] = vec
        return FieldElem(self, tuple(out), d * den)

    def surd(self, i):
        """sqrt(D_i) as an element."""
        v = [0] * self.size
        v[(1 << i) * self.degree] = 1
        return FieldElem(self, tuple(v), 1)

    def extends(self, other):
        return self.q == other.q and self.surds[:len(other.surds)] == other.surds

    def lift(self, x):
        if x.ctx is self:
            return x
        if not self.extends(x.ctx):
            raise FieldError("context mismatch")
        return FieldElem(self, x.c + (0,) * (self.size - len(x.c)), x.den)

    @staticmethod
    def common(a, b):
        if a is b:
            return a
        if a.extends(b):
            return a
        if b.extends(a):
            return b
        raise FieldError("context mismatch")

    # internals ---------------------------------------------------------------
    def _reduce_poly(self, p):
        n = self.degree
        out = [0] * n
        for k, c in enumerate(p):
            if c:
                if k < n:
                    out[k] += c
                else:
                    for i, r in enumerate(self._red[k]):
                        out[i] += c * r
        return out

    def _mulpoly(self, a, b):
        return self._reduce_poly(_pmul(a, b))

    def _radicand(self, mask):
        r = self._rad_cache.get(mask)
        if r is None:
            r = (1,) + (0,) * (self.degree - 1)
            for i, s in enumerate(self.surds):
                if mask >> i & 1:
                    r = tuple(self._mulpoly(r, s))
            self._rad_cache[mask] = r
        return r

    def _isolate_lambda(self, prec):
        one = 1 << prec
        with mpmath.workprec(prec + 64):
            est = 2 * mpmath.cos(mpmath.pi / self.q)
            mid = int(mpmath.floor(est * one))
        n = self.degree

        def val(num):  # sign of minpoly(num / 2^prec) scaled by 2^(prec n)
            return sum(c * num ** i * one ** (n - i) for i, c in enumerate(self.minpoly))

        lo, hi = mid - 2, mid + 2
        if val(lo) == 0:
            return lo, lo
        if val(hi) == 0:
            return hi, hi
        if (val(lo) > 0) == (val(hi) > 0):
            raise FieldError("failed to isolate lambda")
        return lo, hi

    def enclosure(self, prec):
        e = self._enc.get(prec)
        if e is None:
            e = _Enclosure(self, prec)
            with self._enc_lock:
                self._enc.setdefault(prec, e)
        return e

    def float_basis(self):
        if self._float_basis is None:
            with mpmath.workprec(160):
                lam = 2 * mpmath.cos(mpmath.pi / self.q)
                pw = [lam ** i for i in range(self.degree)]
                sq = [mpmath.mpf(1)]
                for mask in range(1, self.nmask):
                    r = self._radicand(mask)
                    sq.append(mpmath.sqrt(sum(c * p for c, p in zip(r, pw))))
                self._float_basis = ([float(x) for x in pw], [float(x) for x in sq])
        return self._float_basis

    # exact square roots ------------------------------------------------------
    def _sqrt_base(self, x):
        """Square root of x in Q(lambda), or None."""
        assert not self.surds
        if x.is_zero():
            return x
        n = self.degree
        den = x.den
        num = list(x.c)
        # (den*y)^2 = den*num, an algebraic integer, so den*y has integer coordinates
        target = [den * c for c in num]
        bits = max(64, 4 * max(abs(c).bit_length() for c in target if c) + 64)
        with mpmath.workprec(bits):
            conj = _conjugates(self.q)
            vals = [sum(mpmath.mpf(c) * r ** i for i, c in enumerate(target)) for r in conj]
            if any(v < 0 for v in vals):
                return None
            roots = [mpmath.sqrt(v) for v in vals]
            vand = mpmath.matrix([[r ** i for i in range(n)] for r in conj])
            for signs in range(1 << max(n - 1, 0)):
                rhs = mpmath.matrix([roots[j] * (-1 if (j and signs >> (j - 1) & 1) else 1)
                                     for j in range(n)])
                sol = mpmath.lu_solve(vand, rhs)
                cand = [int(mpmath.nint(sol[i])) for i in range(n)]
                y = FieldElem(self, tuple(cand), den)
                if y * y == x:
                    return y if y.sign() >= 0 else -y
        return None

    def sqrt_exact(self, x):
        """Exact square root inside this field, or None."""
        x = self.lift(x)
        if x.sign() < 0:
            return None
        if not self.surds:
            return self._sqrt_base(x)
        sub = FieldContext.get(self.q, self.surds[:-1])
        half = self.nmask // 2 * self.degree
        P = FieldElem(sub, x.c[:half], x.den)
        Q = FieldElem(sub, x.c[half:], x.den)
        D = sub.from_poly(self.surds[-1])
        root_d = self.surd(len(self.surds) - 1)
        if Q.is_zero():
            y = sub.sqrt_exact(P)
            if y is not None:
                return self.lift(y)
            y = sub.sqrt_exact(P / D)
            if y is not None:
                return self.lift(y) * root_d
            return None
        s = sub.sqrt_exact(P * P - Q * Q * D)
        if s is None:
            return None
        for cand in ((P + s) / 2, (P - s) / 2):
            a = sub.sqrt_exact(cand)
            if a is not None and not a.is_zero():
                b = Q / (2 * a)
                y = self.lift(a) + self.lift(b) * root_d
                if y * y == x:
                    return y if y.sign() >= 0 else -y
        return None

    def adjoin(self, radicand):
        """Return (ctx', sqrt(radicand)) with ctx' the smallest needed extension.

        The radicand must lie in Q(lambda) and be positive.  Dependence on
        already adjoined surds is detected exactly (sqrt(D * D_S) in Q(lambda)).
        """
        radicand = self.lift(radicand) if radicand.ctx is not self else radicand
        if radicand.surd_part_nonzero():
            raise FieldError("radicand must lie in Q(lambda)")
        if radicand.sign() <= 0:
            raise FieldError("radicand must be positive")
        base = self.base
        r0 = base.lift_down(radicand)
        for mask in range(self.nmask):
            dm = base.from_poly(self._radicand(mask))
            y = base.sqrt_exact(r0 * dm)
            if y is not None:
                # sqrt(r) = y / sqrt(D_S) = y * sqrt(D_S) / D_S
                v = [0] * self.size
                v[mask * self.degree] = 1
                return self, self.lift(y) * FieldElem(self, tuple(v), 1) / self.lift(dm)
        den = r0.den
        integral = tuple(c * den for c in r0.c)  # r0 * den^2
        g = reduce(math.gcd, integral)
        # strip square factors of the content to keep radicands small
        sq = 1
        for p in range(2, 1000):
            while g % (p * p) == 0:
                g //= p * p
                sq *= p
        integral = tuple(c // (sq * sq) for c in integral)
        new = FieldContext.get(self.q, self.surds + (integral,))
        root = new.surd(len(self.surds)) * sq / den
        return new, root

    def lift_down(self, x):
        """Project an element with zero surd part onto Q(lambda)."""
        if x.surd_part_nonzero():
            raise FieldError("element has a surd component")
        return FieldElem(self.base, x.c[:self.degree], x.den)


# ---------------------------------------------------------------- elements

class FieldElem:
    __slots__ = ("ctx", "c", "den", "_hash")

    def __init__(self, ctx, coords, den=1):
        if den <= 0:
            if den == 0:
                raise ZeroDivisionError("zero denominator")
            coords = tuple(-x for x in coords)
            den = -den
        g = den
        for x in coords:
            if g == 1:
                break
            g = math.gcd(g, x)
        if g > 1:
            coords = tuple(x // g for x in coords)
            den //= g
        self.ctx = ctx
        self.c = tuple(coords)
        self.den = den
        self._hash = None

    # views -------------------------------------------------------------------
    def _block(self, mask):
        n = self.ctx.degree
        return [Fraction(x, self.den) for x in self.c[mask * n:(mask + 1) * n]]

    @property
    def rational_part(self):
        return tuple(self._block(0))

    @property
    def surd_part(self):
        """Coefficient vector of the first adjoined surd (sqrt(Delta) for odd q)."""
        if self.ctx.nmask == 1:
            return tuple(Fraction(0) for _ in range(self.ctx.degree))
        return tuple(self._block(1))

    def blocks(self):
        return [tuple(self._block(m)) for m in range(self.ctx.nmask)]

    def surd_part_nonzero(self):
        return any(self.c[self.ctx.degree:])

    def is_zero(self):
        return not any(self.c)

    def is_rational(self):
        return not any(self.c[1:])

    def to_fraction(self):
        if not self.is_rational():
            raise FieldError("not rational")
        return Fraction(self.c[0], self.den)

    # arithmetic ------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, FieldElem):
            if other.ctx is self.ctx:
                return self, other
            ctx = FieldContext.common(self.ctx, other.ctx)
            return ctx.lift(self), ctx.lift(other)
        if isinstance(other, (int, Fraction)):
            return self, self.ctx._const(other)
        return NotImplemented

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is NotImplemented:
            return NotImplemented
        a, b = pair
        d = a.den * b.den // math.gcd(a.den, b.den)
        fa, fb = d // a.den, d // b.den
        return FieldElem(a.ctx, tuple(x * fa + y * fb for x, y in zip(a.c, b.c)), d)

    __radd__ = __add__

    def __neg__(self):
        return FieldElem(self.ctx, tuple(-x for x in self.c), self.den)

    def __pos__(self):
        return self

    def __sub__(self, other):
        pair = self._coerce(other)
        if pair is NotImplemented:
            return NotImplemented
        a, b = pair
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            return FieldElem(self.ctx, tuple(x * f.numerator for x in self.c), self.den * f.denominator)
        pair = self._coerce(other)
        if pair is NotImplemented:
            return NotImplemented
        a, b = pair
        ctx = a.ctx
        n = ctx.degree
        if ctx.nmask == 1:
            return FieldElem(ctx, tuple(ctx._mulpoly(a.c, b.c)), a.den * b.den)
        acc = [0] * ctx.size
        blocks_a = [(m, a.c[m * n:(m + 1) * n]) for m in range(ctx.nmask) if any(a.c[m * n:(m + 1) * n])]
        blocks_b = [(m, b.c[m * n:(m + 1) * n]) for m in range(ctx.nmask) if any(b.c[m * n:(m + 1) * n])]
        for ma, pa in blocks_a:
            for mb, pb in blocks_b:
                prod = ctx._mulpoly(pa, pb)
                common = ma & mb
                if common:
                    prod = ctx._mulpoly(prod, ctx._radicand(common))
                off = (ma ^ mb) * n
                for i, x in enumerate(prod):
                    acc[off + i] += x
        return FieldElem(ctx, tuple(acc), a.den * b.den)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("division by zero in field")
        ctx = self.ctx
        if ctx.nmask == 1:
            return _inverse_base(self)
        sub = FieldContext.get(ctx.q, ctx.surds[:-1])
        half = ctx.size // 2
        a = FieldElem(sub, self.c[:half], self.den)
        b = FieldElem(sub, self.c[half:], self.den)
        D = sub.from_poly(ctx.surds[-1])
        norm = a * a - b * b * D
        inv = norm.inverse()
        conj = ctx.lift(a) - ctx.lift(b) * ctx.surd(len(ctx.surds) - 1)
        return conj * ctx.lift(inv)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero in field")
            f = Fraction(other)
            return FieldElem(self.ctx, tuple(x * f.denominator for x in self.c), self.den * f.numerator)
        pair = self._coerce(other)
        if pair is NotImplemented:
            return NotImplemented
        a, b = pair
        return a * b.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out, base = self.ctx.one, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # comparison --------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction, FieldElem)):
            pair = self._coerce(other)
            a, b = pair
            return a.den == b.den and a.c == b.c
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            c = self.c
            while len(c) > 1 and not c[-1]:
                c = c[:-1]
            self._hash = hash((self.ctx.q, c, self.den)) if len(c) > 1 else hash(Fraction(c[0], self.den))
        return self._hash

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __bool__(self):
        return not self.is_zero()

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # sign and friends ----------------------------------------------------------
    def _float_terms(self):
        pw, sq = self.ctx.float_basis()
        n = self.ctx.degree
        total, mag = 0.0, 0.0
        for m in range(self.ctx.nmask):
            blk = self.c[m * n:(m + 1) * n]
            for i, x in enumerate(blk):
                if x:
                    t = (x / self.den) * pw[i] * sq[m]
                    total += t
                    mag += abs(t)
        return total, mag

    def sign(self):
        if self.is_zero():
            return 0
        try:
            total, mag = self._float_terms()
            if abs(total) > 1e-12 * mag + 1e-300 and math.isfinite(total):
                return 1 if total > 0 else -1
        except OverflowError:
            pass
        prec = 64
        while prec <= PRECISION_CAP:
            lo, hi = self._interval(prec)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            prec *= 2
        raise UndecidedError(f"sign undecided at {PRECISION_CAP} bits")

    def _interval(self, prec):
        """Integer bounds (lo, hi) of den * value * 2^(2 prec)."""
        enc = self.ctx.enclosure(prec)
        n = self.ctx.degree
        lo = hi = 0
        for m in range(self.ctx.nmask):
            blk = self.c[m * n:(m + 1) * n]
            if not any(blk):
                continue
            a, b = _poly_interval(blk, enc.pows, 1)
            s, t = enc.surd[m]
            prods = (a * s, a * t, b * s, b * t)
            lo += min(prods)
            hi += max(prods)
        return lo, hi

    def floor(self):
        try:
            g = math.floor(float(self))
        except (OverflowError, ValueError):
            g = None
        if g is None:
            lo, hi = self.to_fraction_bounds(64 + self.size_bits())
            g = math.floor(lo)
        while self < g:
            g -= 1
        while self >= g + 1:
            g += 1
        return g

    def size_bits(self):
        return max((abs(x).bit_length() for x in self.c), default=0) + self.den.bit_length()

    def to_fraction_bounds(self, prec):
        lo, hi = self._interval(prec)
        scale = self.den << (2 * prec)
        return Fraction(lo, scale), Fraction(hi, scale)

    def __float__(self):
        try:
            total, mag = self._float_terms()
            # without cancellation the float sum is good to a few ulps
            if math.isfinite(total) and (abs(total) > 0.25 * mag or mag == 0):
                return total
        except OverflowError:
            pass
        if self.is_zero():
            return 0.0
        lo, hi = self.to_fraction_bounds(64)
        if lo * hi <= 0 or (hi - lo) * (1 << 60) > abs(lo):
            b = self.to_ball(64)
            return float(mpmath.mpf(b.mid))
        return float((lo + hi) / 2)

    def to_ball(self, bits=DEFAULT_PRECISION):
        """mpmath interval enclosing the value with relative radius <= 2^-bits."""
        if bits < 32:
            raise FieldError("bits must be >= 32")
        prec = bits + 16
        while True:
            lo, hi = self.to_fraction_bounds(prec)
            if lo == hi or (lo * hi > 0 and hi - lo <= abs(lo) / (1 << bits)):
                break
            prec *= 2
            if prec > 8 * PRECISION_CAP:
                raise UndecidedError("to_ball did not converge")
        with ivprec(max(bits + 32, mpmath.iv.prec)):
            a = mpmath.iv.mpf(lo.numerator) / lo.denominator
            b = mpmath.iv.mpf(hi.numerator) / hi.denominator
            return mpmath.iv.mpf([a.a, b.b])

    def to_mpf(self, bits=DEFAULT_PRECISION):
        lo, hi = self.to_fraction_bounds(bits + 16)
        mid = (lo + hi) / 2
        with mpmath.workprec(bits):
            return mpmath.mpf(mid.numerator) / mid.denominator

    def sqrt(self):
        y = self.ctx.sqrt_exact(self)
        if y is None:
            raise FieldError("not a square in this field")
        return y

    # text ----------------------------------------------------------------------
    def coords_str(self):
        parts = []
        for blk in self.blocks():
            parts.append(",".join(str(x) for x in blk))
        return "[" + " | ".join(parts) + "]"

    def __repr__(self):
        return f"FieldElem({self.coords_str()} ~ {float(self):.12g})"

    def __str__(self):
        return self.coords_str()


def _inverse_base(x):
    """Inverse in Q(lambda) by solving the multiplication matrix system."""
    ctx = x.ctx
    n = ctx.degree
    cols = []
    for j in range(n):
        e = [0] * n
        e[j] = 1
        cols.append(ctx._mulpoly(list(x.c), e))
    # solve M y = e_0 with M[i][j] = cols[j][i] (integers), fraction-free
    m = [[Fraction(cols[j][i]) for j in range(n)] + [Fraction(1 if i == 0 else 0)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [v / pv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    sol = [m[i][n] for i in range(n)]
    d = reduce(lambda a, b: a * b // math.gcd(a, b), (s.denominator for s in sol), 1)
    return FieldElem(ctx, tuple(int(s * d * x.den) for s in sol), d)


# ---------------------------------------------------------------- setup

class QField:
    """Bundle of the standard constants of K_q."""

    def __init__(self, q):
        if not isinstance(q, int) or q < 3:
            raise FieldError("q must be an integer >= 3")
        self.q = q
        base = FieldContext.get(q)
        lam = base.lam
        self.base = base
        self.minpoly = base.minpoly
        self.lam = lam
        if q % 2:
            delta = lam * lam - 4 * lam + 8
            ctx, sd = base.adjoin(delta)
            self.delta = ctx.lift(delta)
            self.sqrt_delta = sd
            self.ctx = ctx
            self.rho = (ctx.lift(lam) - 2 + sd) / 2
            self.h = (q - 3) // 2
        else:
            self.ctx = base
            self.delta = None
            self.sqrt_delta = None
            self.rho = None
            self.h = None
        self.lam = self.ctx.lift(lam)

    @property
    def even(self):
        return self.q % 2 == 0

    @property
    def p(self):
        return self.q // 2 if self.even else None

    def __call__(self, x):
        return self.ctx(x)

    @property
    def lambda_interval(self):
        return self.lam.to_ball(DEFAULT_PRECISION)

    @property
    def sqrt_delta_interval(self):
        return None if self.sqrt_delta is None else self.sqrt_delta.to_ball(DEFAULT_PRECISION)

    def __repr__(self):
        return f"QField(q={self.q})"

    def __reduce__(self):
        return (field_setup, (self.q,))


_fields: dict = {}
_fields_lock = threading.Lock()


def field_setup(q):
    """Context bundle for K_q: lambda, and for odd q also Delta, sqrt(Delta), rho."""
    if not isinstance(q, int) or q < 3:
        raise FieldError("q must be an integer >= 3")
    f = _fields.get(q)
    if f is None:
        f = QField(q)
        with _fields_lock:
            f = _fields.setdefault(q, f)
    return f
