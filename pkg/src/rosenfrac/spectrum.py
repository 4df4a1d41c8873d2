"""Borel, Tong, Hurwitz and Lenstra constants; the region D and its dynamics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .natext import (
    PlanePoint, build_domain, classify_alpha, contains, mirror, next_point, prev_point,
)
from .numfield import FieldElem, FieldError
from .rosencf import (
    Digit, DomainError, as_alpha, b_seq, delta_d, digit, is_ball, realize, sgn, theta_from_tv,
)

__all__ = [
    "Mat2", "S", "T", "hurwitz_const", "thresholds", "fg", "in_D", "Vertex", "Piece",
    "Component", "RegionDecomposition", "region_decomposition", "Classification", "classify",
    "round_matrix", "round_length", "FixedPoint", "fixed_points", "mobius_fixed_points",
    "tau_nu", "SpectrumRow", "SpectrumTable", "tong_constants", "tong_finite",
    "BoundExceeded", "flush_count", "KBound", "K_bound", "ThetaOrder", "theta_order",
    "reconstruct_tv", "dual_sequence", "DualBlock", "Lenstra", "lenstra_const",
    "BorelCertificate", "borel_certificate", "window_length", "CaseError",
    "dual_block", "explicit_even_M", "st_power_form", "digit_matrix", "theta_pair",
    "round_length", "RegionA",
]


class CaseError(ValueError):
    """Operation not defined for this (q, alpha) case."""


class BoundExceeded(RuntimeError):
    def __init__(self, rounds):
        super().__init__(f"orbit still inside after {rounds} rounds")
        self.rounds = rounds


# ---------------------------------------------------------------- matrices

@dataclass(frozen=True)
class Mat2:
    a: object
    b: object
    c: object
    d: object

    def __matmul__(self, o):
        return Mat2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                    self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def __pow__(self, k):
        out = Mat2(1, 0, 0, 1)
        for _ in range(k):
            out = out @ self
        return out

    def scale(self, s):
        return Mat2(self.a * s, self.b * s, self.c * s, self.d * s)

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def inverse(self):
        det = self.det
        return Mat2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def apply(self, x):
        return (self.a * x + self.b) / (self.c * x + self.d)

    def proj_equal(self, o):
        """Equal as Mobius maps, i.e. proportional entrywise."""
        u = (self.a, self.b, self.c, self.d)
        w = (o.a, o.b, o.c, o.d)
        for i in range(4):
            for j in range(i + 1, 4):
                if u[i] * w[j] - u[j] * w[i] != 0:
                    return False
        return any(x != 0 for x in u) and any(x != 0 for x in w)

    def entries(self):
        return (self.a, self.b, self.c, self.d)


def S(F):
    return Mat2(F.ctx.one, F.lam, F.ctx.zero, F.ctx.one)


def T(F):
    return Mat2(F.ctx.zero, -F.ctx.one, F.ctx.one, F.ctx.zero)


def digit_matrix(dg, F):
    """Matrix of t -> eps/t - d lambda."""
    return Mat2(-dg.d * F.lam, F.ctx(dg.eps), F.ctx.one, F.ctx.zero)


# ---------------------------------------------------------------- constants

def hurwitz_const(F):
    """1/2 for even q, 1/sqrt(lambda^2 - 4 lambda + 8) = rho/(rho^2 + 1) for odd q."""
    if F.even:
        return F.ctx(Fraction(1, 2))
    rho = F.rho
    return rho / (rho * rho + 1)


def thresholds(F):
    """Named exact alpha thresholds; ordering chains are verified before returning."""
    lam = F.lam
    out = {"1/2": F.ctx(Fraction(1, 2)), "1/lambda": 1 / lam}
    if F.even:
        if F.q == 4:
            s2 = lam
            out["alpha0"] = (4 + s2) / 8
            out["alpha1"] = (24 + s2) / 36
            out["alpha2"] = (140 + s2) / 200
            chain = ["1/2", "alpha0", "alpha1", "alpha2", "1/lambda"]
        else:
            out["alpha_D4"] = (lam * lam + 4 * lam - 4) / (2 * lam ** 3)
            out["alpha_D3"] = (-lam * lam + 4 * lam + 4) / (8 * lam)
            ctx2, root = F.ctx.adjoin(-3 * lam * lam + 4 * lam + 20)
            out["alpha_theta"] = (ctx2.lift(lam) - 2 + root) / (4 * ctx2.lift(lam))
            chain = ["1/2", "alpha_D4", "alpha_D3", "1/lambda"]
    else:
        H = hurwitz_const(F)
        out["rho/lambda"] = F.rho / lam
        out["alpha_L"] = H / (lam * (1 - H))
        chain = ["1/2", "rho/lambda", "1/lambda"]
        if F.h >= 1:
            out["alpha1"] = ((lam - 2) * H + 1) / lam
            ctx2, root = F.ctx.adjoin(5 * lam * lam - 4 * lam + 4)
            lam2 = ctx2.lift(lam)
            out["alpha2"] = (-lam2 + root) / (2 * lam2)
            out["alpha3"] = ((2 - lam) ** 2 * H + 2 * lam) / (4 * lam)
            out["alpha4"] = ((2 - lam) * H - 2) / ((lam * H - 2 * H - 2) * lam)
            chain = ["1/2", "alpha1", "alpha2", "alpha3", "rho/lambda", "alpha4", "1/lambda"]
    for a, b in zip(chain, chain[1:]):
        if not out[a] < out[b]:
            raise AssertionError(f"threshold order {a} < {b} fails for q={F.q}")
    return out


def fg(F, t):
    """(f(t), g(t)) with f = H/(1 - H t) and g = (|t| - H)/(H t)."""
    H = hurwitz_const(F)
    den = 1 - H * t
    if sgn(den) == 0:
        raise DomainError("pole of f")
    if sgn(t) == 0:
        raise DomainError("g is undefined at 0")
    return H / den, (abs(t) - H) / (H * t)


def theta_pair(p):
    t, v = p
    return theta_from_tv(t, v, 1 if sgn(t) >= 0 else -1)


def in_D(F, dom, p, closed=False):
    """min(Theta_{n-1}, Theta_n) > H (>= H when closed) and p in Omega."""
    if not contains(dom, p):
        return False
    H = hurwitz_const(F)
    a, b = theta_pair(p)
    if closed:
        return a >= H and b >= H
    return a > H and b > H


# ---------------------------------------------------------------- regions

@dataclass(frozen=True)
class Vertex:
    t: FieldElem
    v: FieldElem
    on: tuple  # the two boundary curves meeting here, e.g. ("t=lo", "v=g(t)")


@dataclass
class Piece:
    strip: int
    lo: FieldElem
    hi: FieldElem
    top: FieldElem
    lower: str  # "f", "g" or "max(f,g)" on t<0; "f..g" on t>0
    side: str  # "neg" or "pos"


@dataclass
class Component:
    name: str
    pieces: list
    vertices: list
    closed_left: bool = True

    @property
    def lo(self):
        return min((p.lo for p in self.pieces), key=float)

    @property
    def hi(self):
        return max((p.hi for p in self.pieces), key=float)

    def contains(self, F, dom, p):
        t, v = p
        for pc in self.pieces:
            if pc.lo <= t < pc.hi:
                return in_D(F, dom, p)
        return False


@dataclass
class RegionDecomposition:
    q: int
    alpha: FieldElem
    case: str
    components: list
    A: object = None  # the subregion A (even interior): t-range and top
    domain: object = field(default=None, repr=False)

    def names(self):
        return [c.name for c in self.components]

    def get(self, name):
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)


def _neg_pieces(F, dom, H):
    lam = F.lam
    zero = F.ctx.zero
    out = []
    for s in sorted(dom.nonempty(), key=lambda s: float(s.lo)):
        if not s.lo < 0:
            continue
        hi = s.hi if s.hi <= 0 else zero
        Hn = s.height
        t_f = 1 / H - 1 / Hn          # f(t) = Hn
        t_g = -1 / (Hn + 1 / H)        # g(t) = Hn on t < 0
        top = min([hi, t_f, t_g], key=lambda x: x)
        if not top > s.lo:
            continue
        lower = "max(f,g)"
        out.append(Piece(s.index, s.lo, top, Hn, lower, "neg"))
    return out


def _pos_pieces(F, dom, H):
    out = []
    zero = F.ctx.zero
    for s in dom.nonempty():
        if not s.hi > 0:
            continue
        lo = s.lo if s.lo > 0 else zero
        # f < g requires t beyond the crossing rho (odd) resp. 1 (even)
        cross = F.rho if not F.even else F.ctx.one
        lo2 = lo if lo > cross else cross
        if not s.hi > lo2:
            continue
        # also need f(t) < Hn: t < 1/H - 1/Hn
        t_f = 1 / H - 1 / s.height
        hi2 = s.hi if s.hi < t_f else t_f
        if hi2 > lo2:
            out.append(Piece(s.index, lo2, hi2, s.height, "f..g", "pos"))
    return out


def _connected(F, a, b, H):
    """Do adjacent t<0 pieces share an open boundary segment?"""
    if a.hi != b.lo:
        return False
    f, g = fg(F, a.hi)
    m = f if f > g else g
    top = a.top if a.top < b.top else b.top
    return m < top


def region_decomposition(F, alpha):
    """Components of D, named after their position (see module docs)."""
    a = as_alpha(alpha, F)
    dom = build_domain(F, a, validate=False)
    H = hurwitz_const(F)
    neg = _neg_pieces(F, dom, H)
    groups = []
    for pc in neg:
        if groups and _connected(F, groups[-1][-1], pc, H):
            groups[-1].append(pc)
        else:
            groups.append([pc])
    comps = []
    case = dom.case
    if F.even:
        p = F.p
        names = _name_even(F, groups, p)
        for g, nm in zip(groups, names):
            comps.append(Component(nm, g, _vertices(F, g, H)))
    else:
        h = F.h
        if case == "odd_right":
            labels = {2 * h: "D1", 2 * h + 1: "D2"}
        else:
            labels = {4 * h - 1: "D1", 4 * h: "D2", 4 * h + 1: "D2", 4 * h + 2: "D3"}
        named, k = [], 0
        for g in groups:
            nm = labels.get(g[-1].strip)
            if nm is None:
                k += 1
                nm = f"Dleft{k}"
            named.append([nm, g])
        counts = {}
        for nm, _ in named:
            counts[nm] = counts.get(nm, 0) + 1
        seen = {}
        for nm, g in named:
            if counts[nm] > 1:
                seen[nm] = seen.get(nm, 0) + 1
                nm = nm + "ab"[min(seen[nm], 2) - 1]
            comps.append(Component(nm, g, _vertices(F, g, H)))
    for pc in _pos_pieces(F, dom, H):
        comps.append(Component("Dplus", [pc], _vertices(F, [pc], H)))
    rd = RegionDecomposition(F.q, a, case, comps, domain=dom)
    if case == "even_interior":
        rd.A = _region_A(F, a, dom, H)
    return rd


def _name_even(F, groups, p):
    names = []
    if p == 2:
        for g in groups:
            names.append("D1" if g[0].strip == 1 else "D2")
        return names
    mids = [g for g in groups if g[0].strip not in (1, 2 * p - 2)]
    k = 0
    for g in groups:
        s = g[0].strip
        if s == 1:
            names.append("D1")
        elif s == 2 * p - 2:
            names.append("D3")
        elif len(mids) == 1:
            names.append("D2")
        else:
            names.append("D2" + "ab"[min(k, 1)])
            k += 1
    return names


def _vertices(F, pieces, H):
    out = []
    first, last = pieces[0], pieces[-1]
    f0, g0 = fg(F, first.lo)
    if first.side == "neg":
        low, name = (f0, "f") if f0 > g0 else (g0, "g")
        out.append(Vertex(first.lo, low, ("t=lo", f"v={name}(t)")))
        out.append(Vertex(first.lo, first.top, ("t=lo", "v=H")))
        fe, ge = fg(F, last.hi)
        m, name = (fe, "f") if fe > ge else (ge, "g")
        if m == last.top:
            out.append(Vertex(last.hi, last.top, ("v=H", f"v={name}(t)")))
        else:
            out.append(Vertex(last.hi, last.top, ("t=hi", "v=H")))
    else:
        out.append(Vertex(first.lo, f0, ("v=f(t)", "v=g(t)" if f0 == g0 else "t=lo")))
    return out


@dataclass
class RegionA:
    t_lo: FieldElem
    t_hi: FieldElem
    top: FieldElem
    vertices: tuple


def _region_A(F, a, dom, H):
    lam = F.lam
    d1 = delta_d(1, a, F)
    g_d1 = fg(F, -d1)[1]
    return RegionA(-d1, -1 / (lam + 1), lam - 1,
                   ((-d1, g_d1), (-1 / (lam + 1), lam - 1), (-d1, lam - 1)))


@dataclass
class Classification:
    label: str
    in_A: bool = False
    region: str | None = None
    digits: tuple | None = None  # (d_{n+1}, eps_{n+1}, eps_{n+2})


def classify(F, alpha, p, rd=None):
    a = as_alpha(alpha, F)
    rd = rd or region_decomposition(F, a)
    dom = rd.domain
    if not in_D(F, dom, p):
        on_fixed = False
        if F.even and rd.A is not None:
            on_fixed = p.t == rd.A.t_hi and p.v == rd.A.top
        return Classification("A" if on_fixed else "not-in-D", in_A=on_fixed)
    label = "D?"
    for c in rd.components:
        if c.contains(F, dom, p):
            label = c.name
            break
    out = Classification(label)
    if F.even:
        lam = F.lam
        d1 = delta_d(1, a, F)
        t = p.t
        if t < -1 / lam:
            out.region, out.digits = "I", (1, -1, -1)
        elif t < -d1:
            out.region, out.digits = "II", (1, -1, 1)
        elif t < -1 / (2 * lam):
            out.region, out.digits = "III", (2, -1, -1)
        if rd.A is not None and out.region == "III" and t < rd.A.t_hi + 0 and label.startswith("D2"):
            out.in_A = True
        if F.p == 2 and out.region == "III" and label == "D1":
            out.in_A = True
    return out


# ---------------------------------------------------------------- rounds

def round_length(F, alpha):
    case = classify_alpha(F, as_alpha(alpha, F))
    if F.even:
        return F.p - 1
    if case == "odd_right":
        return F.h + 1
    return 2 * F.h + 1


def round_matrix(F, alpha=None, branch=None):
    """Round matrix of the given branch, as a product of generator matrices."""
    lam = F.lam
    SiT = Mat2(-lam, -F.ctx.one, F.ctx.one, F.ctx.zero)        # S^-1 T, digit (-1:1)
    Si2T = Mat2(-2 * lam, -F.ctx.one, F.ctx.one, F.ctx.zero)   # S^-2 T, digit (-1:2)
    if branch is None:
        case = classify_alpha(F, alpha)
        branch = "A" if F.even else ("odd_plus" if case == "odd_right" else "odd_left")
    if branch in ("A", "D3"):
        if not F.even:
            raise CaseError("branch needs even q")
        return SiT ** (F.p - 2) @ Si2T
    if F.even:
        raise CaseError("branch needs odd q")
    h = F.h
    if branch == "odd_left":
        return SiT ** h @ Si2T @ SiT ** (h - 1) @ Si2T
    if branch == "odd_plus":
        plus = digit_matrix(Digit(1, 1), F)
        return SiT ** h @ plus
    if branch == "odd_plus_st":
        St = S(F) @ T(F)
        return SiT ** h @ St
    raise CaseError(f"unknown branch {branch}")


def explicit_even_M(F):
    """(B_p/2) [[-lambda^2-2, -lambda], [lambda^3-lambda, lambda^2-2]]."""
    lam = F.lam
    bp = b_seq(F.p, F) / 2
    return Mat2(-lam * lam - 2, -lam, lam ** 3 - lam, lam * lam - 2).scale(bp)


def st_power_form(F, n):
    """[[-B_{n+1}, -B_n], [B_n, B_{n-1}]]."""
    return Mat2(-b_seq(n + 1, F), -b_seq(n, F), b_seq(n, F), b_seq(n - 1, F))


def mobius_fixed_points(M):
    """Real fixed points of a Mobius matrix, exact when the discriminant permits."""
    a, b, c, d = M.entries()
    disc = (d - a) ** 2 + 4 * b * c
    root = disc.ctx.sqrt_exact(disc)
    if root is None:
        ctx2, root = disc.ctx.adjoin(disc)
    if c == 0:
        return [b / (d - a)]
    return [(a - d + root) / (2 * c), (a - d - root) / (2 * c)]


@dataclass
class FixedPoint:
    point: PlanePoint
    period: int
    branch: str
    orbit: list


def _iterate(p, a, F, n):
    out = [p]
    for _ in range(n):
        out.append(next_point(out[-1], a, F))
    return out


def fixed_points(F, alpha):
    a = as_alpha(alpha, F)
    case = classify_alpha(F, a)
    lam = F.lam
    if F.even:
        pt = PlanePoint(-1 / (lam + 1), lam - 1)
        r, br = F.p - 1, "A"
    elif case == "odd_right":
        pt = PlanePoint(F.rho, F.rho)
        r, br = F.h + 1, "odd_plus"
    else:
        rho = F.rho
        pt = PlanePoint(-rho / (1 + lam * rho), lam - rho)
        r, br = 2 * F.h + 1, "odd_left"
    orb = _iterate(pt, a, F, r)
    if orb[-1] != pt:
        raise AssertionError("fixed point check failed")
    return [FixedPoint(pt, r, br, orb[:-1])]


# ---------------------------------------------------------------- tau, nu, c_k

def _seed(F, a, case):
    lam = F.lam
    half = F.ctx(Fraction(1, 2))
    if F.even:
        if case == "even_inv_lambda":
            return -delta_d(1, half, F), lam - 1
        return -delta_d(1, a, F), lam - 1
    h = F.h
    aa = half if case in ("odd_half", "odd_rho") else a
    l_h = (1 - aa * lam) / ((lam - 1) * aa * lam - 1)
    return l_h, lam - F.rho


def tau_nu(F, alpha, k_max):
    """[(tau_k, nu_k) for k = 0..k_max] by the inverse round map."""
    a = as_alpha(alpha, F)
    case = classify_alpha(F, a)
    if case == "odd_right":
        raise CaseError("odd_right has a finite spectrum")
    M = round_matrix(F, a)
    Minv = M.inverse()
    TMT = T(F) @ M @ T(F)
    Ninv = TMT.inverse()
    tau, nu = _seed(F, a, case)
    out = [(tau, nu)]
    for _ in range(k_max):
        tau, nu = Minv.apply(tau), Ninv.apply(nu)
        if not tau > out[-1][0]:
            raise AssertionError("tau_k not increasing")
        out.append((tau, nu))
    return out


@dataclass
class SpectrumRow:
    k: int
    tau: FieldElem
    nu: FieldElem
    c: FieldElem
    c_alt: FieldElem | None = None


@dataclass
class SpectrumTable:
    q: int
    alpha: FieldElem
    case: str
    limit: FieldElem
    rows: list
    K: int
    round_length: int

    def c(self, k):
        return self.rows[k - 1].c

    def window(self, k):
        return window_length(self.round_length, k)


def window_length(r, k):
    """Number of consecutive Thetas in the k-th Tong window."""
    return k * r + 2


def tong_constants(F, alpha, k_max, with_K=True):
    """c_k for k = 1..k_max; for q = 4 the Theta_{n-1}-corner form is reported as c_alt."""
    a = as_alpha(alpha, F)
    case = classify_alpha(F, a)
    tn = tau_nu(F, a, k_max)
    rows = []
    limit = hurwitz_const(F)
    for k in range(1, k_max + 1):
        tau, nu = tn[k - 1]
        c = -tau / (1 + tau * nu)
        alt = (F.lam - 1) / (1 + tau * (F.lam - 1)) if F.q == 4 else None
        rows.append(SpectrumRow(k, tau, nu, c, alt))
    for i, row in enumerate(rows):
        if not row.c > limit:
            raise AssertionError(f"c_{row.k} not above the limit")
        if i and not row.c < rows[i - 1].c:
            raise AssertionError(f"c_{row.k} not decreasing")
    K = K_bound(F, a).K if with_K else 0
    return SpectrumTable(F.q, a, case, limit, rows, K, round_length(F, a))


def tong_finite(F, alpha):
    a = as_alpha(alpha, F)
    if F.even or F.h < 1:
        raise CaseError("finite spectrum needs odd q >= 5")
    if classify_alpha(F, a) != "odd_right":
        raise CaseError("finite spectrum needs rho/lambda < alpha <= 1/lambda")
    return 3 * F.h + 2


# ---------------------------------------------------------------- flushing

def flush_count(F, alpha, p, max_rounds=1000, component=None, rd=None, closed=False):
    """Rounds until the orbit of p is flushed.

    Without a component: with s the first step j >= 1 at which T^j(p) leaves D,
    the count is ceil((s - 1)/r).  With a component name: the least k >= 1 with
    T^(k r)(p) outside that component.
    """
    a = as_alpha(alpha, F)
    rd = rd or region_decomposition(F, a)
    dom = rd.domain
    r = round_length(F, a)
    if component is None:
        if not in_D(F, dom, p, closed):
            return None
        x = p
        for j in range(1, max_rounds * r + 2):
            x = next_point(x, a, F)
            if not in_D(F, dom, x, closed):
                return -(-(j - 1) // r)
        raise BoundExceeded(max_rounds)
    comp = rd.get(component)
    if not comp.contains(F, dom, p):
        return None
    x = p
    for k in range(1, max_rounds + 1):
        for _ in range(r):
            x = next_point(x, a, F)
        if not comp.contains(F, dom, x):
            return k
    raise BoundExceeded(max_rounds)


@dataclass
class KBound:
    K: int
    component: str | None
    vertex: PlanePoint | None
    contraction: float | None = None
    contraction_rounds: int | None = None


def _transient(F, a, rd):
    case = rd.case
    lam = F.lam
    names = rd.names()
    dom = rd.domain
    if case in ("even_half", "even_inv_lambda"):
        return None, None
    if F.even:
        if F.p == 2:
            if "D2" in names:
                s = dom.H(2)
                return "D2", PlanePoint(dom.r[1], s)
            return None, None
        if "D3" in names:
            return "D3", PlanePoint(dom.r[F.p - 1], lam / 2)
        return None, None
    h = F.h
    if case == "odd_right":
        if "D2" in names:
            return "D2", PlanePoint(dom.l[h], lam / 2)
        return None, None
    if "D3" in names:
        return "D3", PlanePoint(dom.r[2 * h + 1], lam / 2)
    return None, None


def K_bound(F, alpha, max_rounds=500):
    """Rounds needed to empty the transient component, from its extreme vertex.

    With s the first step at which the vertex orbit leaves D, K = ceil(s/r).  For
    even q the per-round contraction of the v-gap is reported as well.
    """
    a = as_alpha(alpha, F)
    rd = region_decomposition(F, a)
    name, vert = _transient(F, a, rd)
    if name is None:
        return KBound(0, None, None)
    r = round_length(F, a)
    x = vert
    s = None
    for j in range(1, max_rounds * r + 1):
        x = next_point(x, a, F)
        if not in_D(F, rd.domain, x):
            s = j
            break
    if s is None:
        raise BoundExceeded(max_rounds)
    K = -(-s // r)
    kb = KBound(K, name, vert)
    if F.even and F.p > 2:
        lam = float(F.lam)
        fac = 1 - lam / 2
        gap0 = float(lam / 2 - (lam - 1))
        kb.contraction = fac
        # rounds until the gap drops below the smallest gap still inside D3
        g_lo = float(fg(F, dom_r := rd.domain.r[F.p - 1])[1]) - (lam - 1)
        if g_lo > 0:
            kb.contraction_rounds = max(1, math.ceil(math.log(g_lo / gap0) / math.log(fac)))
    return kb


# ---------------------------------------------------------------- Theta order

@dataclass
class ThetaOrder:
    thetas: tuple  # (Theta_{n-1}, Theta_n, Theta_{n+1})
    argmin: int    # -1, 0 or +1 relative to n
    max_bound: FieldElem | None
    max_bound_at: tuple | None


def theta_order(F, alpha, p, region):
    """Which of Theta_{n-1}, Theta_n, Theta_{n+1} is smallest, plus the regional max bound."""
    a = as_alpha(alpha, F)
    lab = classify(F, a, p)
    if region == "III":
        if lab.region != "III":
            raise ValueError("point not in Region III")
    elif region == "D1k":
        if F.q != 4 or lab.label != "D1":
            raise ValueError("point not in a q=4 D_1 cell")
    elif region in ("A", "D3"):
        if region == "A" and not lab.in_A or region == "D3" and lab.label != "D3":
            raise ValueError(f"point not in {region}")
    else:
        raise ValueError(f"unknown region {region}")
    a0, a1 = theta_pair(p)
    nxt = next_point(p, a, F)
    a2 = theta_pair(nxt)[1]
    ths = (a0, a1, a2)
    m = min(range(3), key=lambda i: ths[i])
    lam = F.lam
    bound, at = None, None
    if F.even and F.p > 2:
        thr = thresholds(F)["alpha_theta"]
        d1 = delta_d(1, a, F)
        if a <= thr:
            bound, at = 1 / (a * lam + 1), (-d1, lam - 1)
        else:
            bound, at = 2 * lam * (2 * a - 1) / (4 - lam * lam), (None, lam / 2)
    return ThetaOrder(ths, m - 1, bound, at)


# ---------------------------------------------------------------- reconstruct, duality

def reconstruct_tv(theta_prev, theta_cur, eps):
    """(t, v) from two consecutive Thetas and the sign eps_{n+1}.

    t solves Theta_{n-1} t^2 - t + eps Theta_n = 0; the discriminant is
    ((1 - t v)/(1 + t v))^2, so the root with t v < 1 is taken.
    """
    if sgn(theta_prev) == 0:
        return eps * theta_cur, theta_prev
    disc = 1 - 4 * eps * theta_prev * theta_cur
    if sgn(disc) < 0:
        raise DomainError("negative discriminant: impossible Theta pair")
    if isinstance(disc, FieldElem):
        root = disc.ctx.sqrt_exact(disc)
        if root is None:
            raise FieldError("discriminant is not a square in the field")
    else:
        import mpmath
        root = mpmath.iv.sqrt(disc) if is_ball(disc) else mpmath.sqrt(disc)
    t = (1 - root) / (2 * theta_prev)
    v = eps * theta_prev * t / theta_cur
    return t, v


@dataclass
class DualBlock:
    thetas: list
    dual: list
    point: PlanePoint
    mirrored: PlanePoint
    equal: bool


def dual_sequence(thetas, q=None):
    """Index-reversed block: Theta_{n+i} = dual_{m-i-1}."""
    return list(reversed(thetas))


def dual_block(F, alpha, p, length, alpha_half=None, dom_half=None):
    """Theta_{n-1..n+length-2} forward under alpha and the reversed block of M(p) under 1/2."""
    a = as_alpha(alpha, F)
    half = alpha_half if alpha_half is not None else F.ctx(Fraction(1, 2))
    th = []
    x = p
    th.append(theta_pair(x)[0])
    while len(th) < length:
        th.append(theta_pair(x)[1])
        if len(th) < length:
            x = next_point(x, a, F)
    y = mirror(p)
    dom_half = dom_half or build_domain(F, half, validate=False)
    tl = [theta_pair(y)[1], theta_pair(y)[0]]
    while len(tl) < length:
        y = prev_point(y, half, F, dom_half)
        tl.append(theta_pair(y)[0])
    return DualBlock(th, tl, p, mirror(p), th == tl)


# ---------------------------------------------------------------- Lenstra

@dataclass
class Lenstra:
    value: FieldElem
    witness: PlanePoint
    strip: int
    contacts: list = field(default_factory=list)  # every strip corner where the bound is attained
    right_end_bound: FieldElem | None = None  # constraint from the strip ending at r_0 alone
    dks_formula: FieldElem | None = None


def lenstra_const(F, alpha):
    """max{c : (t, c/(1 - c t)) in Omega for t in [l_0, r_0]}: min over strips of H/(1 + H hi)."""
    a = as_alpha(alpha, F)
    dom = build_domain(F, a, validate=False)
    best, last = None, None
    for s in dom.nonempty():
        c = s.height / (1 + s.height * s.hi)
        if best is None or c < best[0]:
            best = (c, s)
        if s.hi == dom.hi:
            last = c
    c, s = best
    lam = F.lam
    dks = None
    if F.even:
        x1 = lam / (lam + 2)
        x2 = lam * (2 - a * lam * lam) / (4 - lam * lam)
        dks = x1 if x1 < x2 else x2
    contacts = [PlanePoint(x.hi, x.height) for x in dom.nonempty()
                if x.height / (1 + x.height * x.hi) == c]
    return Lenstra(c, PlanePoint(s.hi, s.height), s.index, contacts, last, dks)


# ---------------------------------------------------------------- Borel

@dataclass
class BorelCertificate:
    q: int
    alpha: FieldElem
    rho: FieldElem
    round_length: int
    fixed: FixedPoint
    witness_prefix: list
    witness_x: FieldElem
    theta_limit: FieldElem
    on_f_graph: bool | None = None


def borel_certificate(F, alpha):
    a = as_alpha(alpha, F)
    fp = fixed_points(F, a)[0]
    rho = F.ctx.one if F.even else F.rho
    t1 = fp.point.t
    # steer: a one-digit prefix whose image is t1
    prefix, x = [], t1
    lam = F.lam
    for d in range(1, 6):
        for eps in (1, -1):
            cand = eps / (d * lam + t1)
            try:
                if digit(cand, a, F) == Digit(eps, d):
                    prefix, x = [Digit(eps, d)], cand
                    break
            except DomainError:
                continue
        if prefix:
            break
    eps_next = 1 if sgn(t1) > 0 else -1
    th = theta_from_tv(fp.point.t, fp.point.v, eps_next)[1]
    cert = BorelCertificate(F.q, a, rho, fp.period, fp, prefix, x, th)
    if fp.branch == "odd_plus":
        img = next_point(fp.point, a, F)
        cert.on_f_graph = img.v == fg(F, img.t)[0]
    return cert
