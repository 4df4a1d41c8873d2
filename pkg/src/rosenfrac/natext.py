"""Natural extension of T_alpha: the planar map, its domain, boundary orbits and the mirror map."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .numfield import FieldElem, FieldError
from .rosencf import (
    Digit, DomainError, PrecisionError, as_alpha, const_like, delta_d, digit, interval_ends,
    is_ball, sgn,
)

__all__ = [
    "CASES", "PlanePoint", "Strip", "DomainSpec", "Relation", "BoundaryOrbits",
    "OrderingError", "classify_alpha", "build_domain", "next_point", "prev_point",
    "boundary_orbits", "ordering_relations", "mirror", "mirror_inv", "contains",
    "raw_step",
]

CASES = ("even_half", "even_interior", "even_inv_lambda",
         "odd_half", "odd_left", "odd_rho", "odd_right")


class OrderingError(AssertionError):
    """A boundary-orbit relation failed: internal consistency is broken."""


@dataclass(frozen=True)
class PlanePoint:
    t: object
    v: object

    def __iter__(self):
        yield self.t
        yield self.v

    def __repr__(self):
        return f"PlanePoint({float(self.t):.12g}, {float(self.v):.12g})"


@dataclass(frozen=True)
class Strip:
    index: int
    lo: FieldElem
    hi: FieldElem
    height: FieldElem

    @property
    def empty(self):
        return not (self.lo < self.hi)


@dataclass
class DomainSpec:
    q: int
    alpha: FieldElem
    case: str
    strips: list
    l: list
    r: list
    phi: list
    F: object = field(repr=False, default=None)

    @property
    def lo(self):
        return interval_ends(self.alpha, self.F)[0]

    @property
    def hi(self):
        return interval_ends(self.alpha, self.F)[1]

    @property
    def hmax(self):
        return max((s.height for s in self.strips if not s.empty), key=float)

    def nonempty(self):
        return [s for s in self.strips if not s.empty]

    def strip_of(self, t):
        for s in self.strips:
            if s.empty:
                continue
            if _cmp(t, s.lo) >= 0 and _cmp(t, s.hi) < 0:
                return s
        return None

    def height_at(self, t):
        s = self.strip_of(t)
        return None if s is None else s.height

    def H(self, n):
        for s in self.strips:
            if s.index == n:
                return s.height
        raise KeyError(n)

    def contains(self, p):
        return contains(self, p)


def _cmp(a, b):
    """Certified sign of a - b across kernels."""
    if isinstance(a, FieldElem) and isinstance(b, FieldElem):
        return (a - b).sign()
    if is_ball(a) or is_ball(b):
        return sgn(a - const_like(b, a) if is_ball(a) else const_like(a, b) - b)
    return sgn(float(a) - float(b))


def contains(dom, p):
    t, v = p
    s = dom.strip_of(t)
    if s is None:
        return False
    return _cmp(v, 0) >= 0 and _cmp(v, s.height) <= 0


# ---------------------------------------------------------------- classification

def classify_alpha(F, alpha):
    if F.q == 3:
        raise FieldError("the natural-extension cases need q >= 4 (h >= 1 for odd q)")
    a = as_alpha(alpha, F)
    half = F.ctx(Fraction(1, 2))
    inv = 1 / F.lam
    if a < half or a > inv:
        raise FieldError("alpha must lie in [1/2, 1/lambda]")
    if F.even:
        if a == half:
            return "even_half"
        if a == inv:
            return "even_inv_lambda"
        return "even_interior"
    rl = F.rho / F.lam
    if a == half:
        return "odd_half"
    if a < rl:
        return "odd_left"
    if a == rl:
        return "odd_rho"
    return "odd_right"


# ---------------------------------------------------------------- orbits

def raw_step(x, alpha, F):
    """T_alpha without the domain check (used for orbits of the end points)."""
    if isinstance(x, FieldElem) and x.is_zero():
        return x
    dg = digit(x, alpha, F, check=False)
    return dg.eps / x - dg.d * F.lam


def _orbit(x0, alpha, F, n):
    out = [x0]
    for _ in range(n):
        out.append(raw_step(out[-1], alpha, F))
    return out


@dataclass(frozen=True)
class Relation:
    lhs: str
    op: str
    rhs: str
    holds: bool

    def __str__(self):
        return f"{self.lhs} {self.op} {self.rhs}: {'ok' if self.holds else 'VIOLATED'}"


@dataclass
class BoundaryOrbits:
    l: list
    r: list
    phi: list
    relations: list


def _phi_orbit(F):
    half = F.ctx(Fraction(1, 2))
    out = [-F.lam / 2]
    for _ in range(4 * F.q):
        if out[-1].is_zero():
            break
        out.append(raw_step(out[-1], half, F))
    return out


def _chain(vals, names, ops):
    rels = []
    for i, op in enumerate(ops):
        a, b = vals[names[i]], vals[names[i + 1]]
        s = (a - b).sign()
        ok = {"<": s < 0, "=": s == 0, "<=": s <= 0}[op]
        rels.append(Relation(names[i], op, names[i + 1], ok))
    return rels


def _rel(vals, a, op, b):
    s = (vals[a] - vals[b]).sign()
    ok = {"<": s < 0, "=": s == 0, ">": s > 0, "<=": s <= 0, ">=": s >= 0}[op]
    return Relation(a, op, b, ok)


def ordering_relations(F, alpha, l, r):
    """Every relation of the ordering relations for the case of alpha."""
    a = as_alpha(alpha, F)
    case = classify_alpha(F, a)
    vals = {f"l_{i}": x for i, x in enumerate(l)}
    vals.update({f"r_{i}": x for i, x in enumerate(r)})
    vals["-delta_1"] = -delta_d(1, a, F)
    vals["-delta_2"] = -delta_d(2, a, F)
    vals["0"] = F.ctx.zero
    lam = F.lam
    rels = []
    seq, ops = [], []

    def push(name, op=None):
        if op is not None:
            ops.append(op)
        seq.append(name)

    if F.even:
        p = F.p
        vals["-1"] = -F.ctx.one
        vals["1"] = F.ctx.one
        push("-1")
        push("l_0", "<")
        if case == "even_interior":
            for n in range(1, p - 1):
                push(f"r_{n}", "<")
                push(f"l_{n}", "<")
            push("-delta_1", "<")
            push(f"r_{p - 1}", "<")
            push("0", "<")
            push(f"l_{p - 1}", "<")
            push("r_0", "<")
            push("1", "<")
            rels += _chain(vals, seq, ops)
            rels.append(_rel(vals, f"l_{p}", "=", f"r_{p}"))
            d_r = digit(r[p - 1], a, F, check=False).d
            d_l = digit(l[p - 1], a, F, check=False).d
            rels.append(Relation(f"d_{p}(r_0)", "=", f"d_{p}(l_0)+1", d_r == d_l + 1))
            vals["lp1_formula"] = (2 * a - 1) * lam / (2 - a * lam * lam)
            rels.append(_rel(vals, f"l_{p - 1}", "=", "lp1_formula"))
        elif case == "even_half":
            for n in range(1, p - 1):
                push(f"r_{n}", "<")
                push(f"l_{n}", "=")
            push("-delta_1", "<")
            push(f"r_{p - 1}", "<")
            push("0", "=")
            push(f"l_{p - 1}", "=")
            push("r_0", "<")
            push("1", "<")
            rels += _chain(vals, seq, ops)
        else:  # even_inv_lambda
            for n in range(1, p - 1):
                push(f"r_{n}", "=")
                push(f"l_{n}", "<")
            push("-delta_1", "=")
            push(f"r_{p - 1}", "=")
            push("0", "<")
            push("r_0", "<")
            push("1", "=")
            rels += _chain(vals, seq, ops)
        return rels

    h = F.h
    if case == "odd_half":
        push("l_0")
        for n in range(1, h):
            push(f"r_{h + n}", "<")
            push(f"r_{n}", "<")
        push(f"r_{2 * h}", "<")
        push("-delta_1", "<")
        push(f"r_{h}", "<")
        push("-delta_2", "<")
        push(f"r_{2 * h + 1}", "<")
        push("r_0", "<")
        rels += _chain(vals, seq, ops)
        for n in range(1, 2 * h + 2):
            rels.append(_rel(vals, f"l_{n}", "=", f"r_{n}"))
        rels.append(_rel(vals, f"r_{2 * h + 1}", "=", "0"))
    elif case == "odd_left":
        push("l_0")
        for n in range(1, h):
            push(f"r_{h + n}", "<")
            push(f"l_{h + n}", "<")
            push(f"r_{n}", "<")
            push(f"l_{n}", "<")
        push(f"r_{2 * h}", "<")
        push(f"l_{2 * h}", "<")
        push("-delta_1", "<")
        push(f"r_{h}", "<")
        push(f"l_{h}", "<")
        push(f"r_{2 * h + 1}", "<")
        push("0", "<")
        push(f"l_{2 * h + 1}", "<")
        push("r_0", "<")
        rels += _chain(vals, seq, ops)
        rels.append(_rel(vals, f"l_{h}", "<", "-delta_2"))
        rels.append(_rel(vals, f"l_{2 * h + 2}", "=", f"r_{2 * h + 2}"))
        d_r = digit(r[2 * h + 1], a, F, check=False).d
        d_l = digit(l[2 * h + 1], a, F, check=False).d
        rels.append(Relation(f"d_{2 * h + 2}(r_0)", "=", f"d_{2 * h + 2}(l_0)+1", d_r == d_l + 1))
        vals["l_h_formula"] = (1 - a * lam) / ((lam - 1) * a * lam - 1)
        vals["r_h_formula"] = -(1 - (1 - a) * lam) / (1 - (1 - a) * lam * (lam - 1))
        vals["r_2h+1_formula"] = -(2 * a - 1) * lam / (a * lam * lam - 2 * lam + 2)
        rels.append(_rel(vals, f"l_{h}", "=", "l_h_formula"))
        rels.append(_rel(vals, f"r_{h}", "=", "r_h_formula"))
        rels.append(_rel(vals, f"r_{2 * h + 1}", "=", "r_2h+1_formula"))
        # corrected remark: r_{2h+1} against -delta_2 switches at alpha_2
        from .spectrum import thresholds
        a2 = thresholds(F)["alpha2"]
        s = (a - a2).sign()
        op = ">" if s < 0 else ("=" if s == 0 else "<")
        rels.append(_rel(vals, f"r_{2 * h + 1}", op, "-delta_2"))
    elif case == "odd_rho":
        push("l_0")
        for n in range(1, h):
            push(f"l_{h + n}", "<")
            push(f"l_{n}", "<")
        push(f"l_{2 * h}", "<")
        push(f"l_{h}", "<")
        push("-delta_2", "<")
        push("0", "<")
        push("r_0", "<")
        rels += _chain(vals, seq, ops)
        for n in range(1, h + 1):
            rels.append(_rel(vals, f"l_{n - 1}", "=", f"r_{h + n}"))
            rels.append(_rel(vals, f"l_{h + n}", "=", f"r_{n}"))
        rels.append(_rel(vals, f"l_{2 * h}", "=", "-delta_1"))
        rels.append(_rel(vals, f"l_{h}", "=", f"r_{2 * h + 1}"))
    else:  # odd_right, including alpha = 1/lambda
        inv = a == 1 / lam
        push("l_0")
        for n in range(1, h):
            push(f"r_{n}", "=" if inv else "<")
            push(f"l_{n}", "<")
        push(f"r_{h}", "=" if inv else "<")
        push("-delta_1", "<")
        push(f"l_{h}", "<")
        push("0", "=" if inv else "<")
        push(f"r_{h + 1}", "=" if inv else "<")
        push("r_0", "<")
        rels += _chain(vals, seq, ops)
        if not inv:
            rels.append(_rel(vals, f"l_{h + 1}", "=", f"r_{h + 2}"))
            d_l = digit(l[h], a, F, check=False).d
            d_r = digit(r[h + 1], a, F, check=False).d
            rels.append(Relation(f"d_{h + 1}(l_0)", "=", f"d_{h + 2}(r_0)+1", d_l == d_r + 1))
        vals["l_h_formula"] = (a * lam - 1) / (1 - a * lam * (lam - 1))
        rels.append(_rel(vals, f"l_{h}", "=", "l_h_formula"))
    return rels


def boundary_orbits(F, alpha, N=None, validate=True):
    """Exact l_n, r_n (n <= N) and phi_j; optionally validates the ordering relations."""
    a = as_alpha(alpha, F)
    need = (F.p + 1) if F.even else (2 * F.h + 3)
    N = max(N or 0, need)
    lo, hi = interval_ends(a, F)
    l = _orbit(lo, a, F, N)
    r = _orbit(hi, a, F, N)
    phi = _phi_orbit(F)
    rels = ordering_relations(F, a, l, r) if validate else []
    bad = [x for x in rels if not x.holds]
    if bad:
        raise OrderingError("; ".join(str(x) for x in bad))
    return BoundaryOrbits(l, r, phi, rels)


# ---------------------------------------------------------------- domains

def _heights_rec(first, total, lag, lam):
    hs = list(first)
    while len(hs) < total:
        hs.append(1 / (lam - hs[-lag]))
    return hs


def build_domain(F, alpha, validate=True):
    """Omega_alpha as a list of strips J_n x [0, H_n], exact, each strip keeping its J_n label."""
    a = as_alpha(alpha, F)
    case = classify_alpha(F, a)
    orb = boundary_orbits(F, a, validate=validate)
    l, r, phi = orb.l, orb.r, orb.phi
    lam = F.lam
    one = F.ctx.one
    strips = []
    markers = []
    if case == "even_interior":
        p = F.p
        H = [None] + _heights_rec([1 / (lam + 1), 1 / lam], 2 * p - 1, 2, lam)
        for n in range(1, p):
            strips.append(Strip(2 * n - 1, l[n - 1], r[n], H[2 * n - 1]))
            strips.append(Strip(2 * n, r[n], l[n], H[2 * n]))
        strips.append(Strip(2 * p - 1, l[p - 1], r[0], H[2 * p - 1]))
        markers = [(H[2 * p - 2], lam / 2), (H[2 * p - 1], one)]
        if p >= 2:
            markers.append((H[2 * p - 3], lam - 1))
    elif case == "even_half":
        p = F.p
        L = [None] + _heights_rec([1 / (lam + 1)], p - 1, 1, lam)
        for n in range(1, p):
            strips.append(Strip(n, phi[n - 1], phi[n], L[n]))
        strips.append(Strip(p, F.ctx.zero, -phi[0], one))
        markers = [(phi[p - 1], F.ctx.zero)]
    elif case == "even_inv_lambda":
        p = F.p
        L = [F.ctx.zero] + _heights_rec([1 / (lam + 1)], p - 1, 1, lam)
        for n in range(1, p - 1):
            strips.append(Strip(n, -L[p - n], -L[p - n - 1], -phi[p - n - 1]))
        strips.append(Strip(p - 1, -L[1], one, -phi[0]))
        markers = [(-L[p - 1], l[0]), (one, r[0])]
    elif case in ("odd_left", "odd_half", "odd_rho"):
        h = F.h
        rho = F.rho
        H = [None] + _heights_rec([1 / (lam + 1 / rho), 1 / (lam + 1), 1 / (lam + rho), 1 / lam],
                                  4 * h + 3, 4, lam)
        ll = list(l)
        if case == "odd_rho":
            # T_alpha sends the (2h)-th iterate onto l_0 rather than the excluded end r_0;
            # the strips use the limit value r_0
            ll[2 * h + 1] = r[0]
        for n in range(1, h + 2):
            strips.append(Strip(4 * n - 3, ll[n - 1], r[h + n], H[4 * n - 3]))
            strips.append(Strip(4 * n - 2, r[h + n], ll[h + n], H[4 * n - 2]))
            if n <= h:
                strips.append(Strip(4 * n - 1, ll[h + n], r[n], H[4 * n - 1]))
                strips.append(Strip(4 * n, r[n], ll[n], H[4 * n]))
        top = ll[2 * h + 1]
        strips.append(Strip(4 * h + 3, top, r[0], H[4 * h + 3]))
        strips.sort(key=lambda s: s.index)
        markers = [(H[4 * h], lam - 1), (H[4 * h + 1], lam - rho), (H[4 * h + 2], lam / 2),
                   (H[4 * h + 3], rho)]
        if h >= 1:
            markers.append((H[4 * h - 1], lam - 1 / rho))
    else:  # odd_right
        h = F.h
        H = [None] + _heights_rec([1 / (lam + 1), 1 / lam], 2 * h + 2, 2, lam)
        for n in range(1, h + 2):
            strips.append(Strip(2 * n - 1, l[n - 1], r[n], H[2 * n - 1]))
            if n <= h:
                strips.append(Strip(2 * n, r[n], l[n], H[2 * n]))
        strips.append(Strip(2 * h + 2, r[h + 1], r[0], H[2 * h + 2]))
        strips.sort(key=lambda s: s.index)
        markers = [(H[2 * h], lam - 1), (H[2 * h + 1], lam / 2), (H[2 * h + 2], one)]
    for x, y in markers:
        if x != y:
            raise OrderingError(f"height marker failed in case {case}")
    dom = DomainSpec(F.q, a, case, strips, l, r, phi, F)
    if validate:
        _check_tiling(dom)
    return dom


def _check_tiling(dom):
    cur = dom.lo
    for s in sorted(dom.nonempty(), key=lambda s: float(s.lo)):
        if s.lo != cur:
            raise OrderingError(f"strips do not tile at J_{s.index}")
        cur = s.hi
    if cur != dom.hi:
        raise OrderingError("strips do not reach the right end point")


# ---------------------------------------------------------------- maps

def next_point(p, alpha, F):
    """T(t, v) = (T_alpha(t), 1/(d(t) lambda + eps(t) v))."""
    t, v = p
    if sgn(t) == 0:
        raise DomainError("t = 0: G_q-rational skeleton")
    dg = digit(t, alpha, F, check=False)
    lam = const_like(F.lam, t)
    return PlanePoint(dg.eps / t - dg.d * lam, 1 / (dg.d * lam + dg.eps * v))


def prev_point(p, alpha, F, dom=None):
    """Unique preimage of p in Omega_alpha; the branch digit is decoded from v."""
    t, v = p
    if sgn(v) == 0:
        raise DomainError("v = 0: the past is empty")
    a = as_alpha(alpha, F)
    dom = dom or build_domain(F, a, validate=False)
    lam = const_like(F.lam, t)
    hmax = const_like(dom.hmax, t)
    w = 1 / v
    from .rosencf import floor_of
    d_lo = max(1, floor_of((w - hmax) / lam))
    d_hi = floor_of((w + hmax) / lam) + 1
    found = []
    for d in range(d_lo, d_hi + 1):
        rem = w - d * lam
        try:
            s = sgn(rem)
        except PrecisionError:
            s = None
        eps_opts = (1, -1) if s in (0, None) else (s,)
        for eps in eps_opts:
            vp = eps * rem
            if sgn(vp) < 0:
                continue
            den = t + d * lam
            if sgn(den) == 0:
                continue
            tp = eps / den
            try:
                if digit(tp, a, F, check=False) != Digit(eps, d):
                    continue
                if not contains(dom, (tp, vp)):
                    continue
            except (PrecisionError, DomainError):
                continue
            found.append(PlanePoint(tp, vp))
    if not found:
        raise DomainError("no preimage in Omega_alpha")
    # several candidates only occur on the measure-zero boundary v' in {0, H}
    return found[0]


def mirror(p):
    """M(t, v) = (-v, -t) for t < 0 and (v, t) for t >= 0."""
    t, v = p
    if sgn(t) < 0:
        return PlanePoint(-v, -t)
    return PlanePoint(v, t)


def mirror_inv(p):
    t, v = p
    if sgn(t) < 0:
        return PlanePoint(-v, -t)
    return PlanePoint(v, t)
