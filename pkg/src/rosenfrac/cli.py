"""Command line front end.

Exit codes: 0 ok, 2 bad parameters, 3 precision exhausted, 4 verification failed.

CSV outputs always start with a header row.  Columns:
  expand      n, digit, p_n, q_n, theta_n
  theta       n, theta_prev, theta, eps_next
  domain      strip, t_lo, t_hi, height
  regions     component, strip, t_lo, t_hi, top
  tong        k, tau, nu, c_k, c_alt
  thresholds  name, value
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from fractions import Fraction

import mpmath

from . import __version__
from .harness import (
    ExperimentConfig, load_config, parse_alpha, run_suite, sharpness_probe,
)
from .natext import PlanePoint, build_domain, classify_alpha
from .numfield import FieldElem, FieldError, UndecidedError, field_setup, ivprec
from .rosencf import (
    DomainError, PrecisionError, as_alpha, convergents, expand, format_word, parse_word,
    realize, theta_direct, theta_from_tv,
)
from .spectrum import (
    CaseError, K_bound, borel_certificate, dual_block, fg, flush_count, hurwitz_const,
    lenstra_const, region_decomposition, thresholds, tong_constants, tong_finite,
)

EXIT_OK, EXIT_USAGE, EXIT_PRECISION, EXIT_VERIFY = 0, 2, 3, 4


def _bits_default():
    try:
        return int(os.environ.get("ROSENFRAC_BITS", "256"))
    except ValueError:
        return 256


def _num(x, digits):
    if isinstance(x, FieldElem):
        if digits <= 15:
            return f"{float(x):.{digits}f}"
        return mpmath.nstr(x.to_mpf(int(digits * 3.33) + 16), digits + 1, strip_zeros=False)
    if isinstance(x, mpmath.ctx_iv.ivmpf):
        return mpmath.nstr(x.mid, digits)
    return f"{float(x):.{digits}f}"


def _parse_x(text, F, bits):
    s = text.strip()
    if s.startswith("[") or s.startswith("("):
        w = parse_word(s)
        return realize(w, F, bits=bits)
    return F.ctx(Fraction(s))


def _emit(rows, header, fmt, out):
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    else:
        widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(h)
                  for i, h in enumerate(header)]
        lines = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths))]
        lines += ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)) for r in rows]
        text = "\n".join(lines) + "\n"
    _write(text, out)


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- svg

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
           "#17becf", "#bcbd22", "#7f7f7f"]


class _Canvas:
    """t rightward, v upward."""

    def __init__(self, tmin, tmax, vmin, vmax, scale=400, pad=40):
        self.tmin, self.tmax, self.vmin, self.vmax = tmin, tmax, vmin, vmax
        self.s = scale / max(tmax - tmin, vmax - vmin)
        self.pad = pad
        self.w = int((tmax - tmin) * self.s + 2 * pad)
        self.h = int((vmax - vmin) * self.s + 2 * pad)
        self.items = []

    def xy(self, t, v):
        return (self.pad + (t - self.tmin) * self.s, self.h - self.pad - (v - self.vmin) * self.s)

    def poly(self, pts, fill, opacity=0.35, stroke="#000"):
        path = " ".join(f"{x:.3f},{y:.3f}" for x, y in (self.xy(t, v) for t, v in pts))
        self.items.append(f'<polygon points="{path}" fill="{fill}" fill-opacity="{opacity}" '
                          f'stroke="{stroke}" stroke-width="0.6"/>')

    def line(self, pts, stroke, dash=None):
        path = " ".join(f"{x:.3f},{y:.3f}" for x, y in (self.xy(t, v) for t, v in pts))
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<polyline points="{path}" fill="none" stroke="{stroke}" '
                          f'stroke-width="1.2"{d}/>')

    def text(self, t, v, s, size=11):
        x, y = self.xy(t, v)
        self.items.append(f'<text x="{x:.3f}" y="{y:.3f}" font-size="{size}" '
                          f'font-family="sans-serif">{s}</text>')

    def legend(self, entries):
        for i, (name, col) in enumerate(entries):
            y = 14 + 14 * i
            self.items.append(f'<rect x="{self.w - 110}" y="{y - 9}" width="10" height="10" '
                              f'fill="{col}" fill-opacity="0.5"/>')
            self.items.append(f'<text x="{self.w - 95}" y="{y}" font-size="11" '
                              f'font-family="sans-serif">{name}</text>')

    def render(self, title):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">\n<title>{title}</title>\n'
                f'<rect width="100%" height="100%" fill="white"/>\n')
        x0, y0 = self.xy(self.tmin, 0)
        x1, _ = self.xy(self.tmax, 0)
        axes = (f'<line x1="{x0:.3f}" y1="{y0:.3f}" x2="{x1:.3f}" y2="{y0:.3f}" stroke="#444"/>\n')
        if self.tmin < 0 < self.tmax:
            xa, ya = self.xy(0, self.vmin)
            _, yb = self.xy(0, self.vmax)
            axes += f'<line x1="{xa:.3f}" y1="{ya:.3f}" x2="{xa:.3f}" y2="{yb:.3f}" stroke="#444"/>\n'
        return head + axes + "\n".join(self.items) + "\n</svg>\n"


def domain_svg(F, a, dom, rd=None, scale=400):
    tmin, tmax = float(dom.lo), float(dom.hi)
    vmax = float(dom.hmax)
    cv = _Canvas(tmin, tmax, 0.0, vmax, scale)
    for s in sorted(dom.nonempty(), key=lambda s: s.index):
        lo, hi, h = float(s.lo), float(s.hi), float(s.height)
        cv.poly([(lo, 0), (hi, 0), (hi, h), (lo, h)], "#dddddd", 1.0)
        cv.text(lo + 0.3 * (hi - lo), 0.5 * h, f"J{s.index}", 9)
    legend = []
    Hf = float(hurwitz_const(F))
    if rd is not None:
        for i, comp in enumerate(rd.components):
            col = _COLORS[i % len(_COLORS)]
            legend.append((comp.name, col))
            for pc in comp.pieces:
                cv.poly(_piece_outline(F, pc), col)
        for name, k, col in (("f", 0, "#000000"), ("g", 1, "#555555")):
            pts = []
            for i in range(401):
                t = tmin + (tmax - tmin) * i / 400
                if abs(t) < 1e-9:
                    continue
                val = _fg_float(Hf, t)[k]
                if 0 <= val <= vmax:
                    pts.append((t, val))
                elif pts:
                    cv.line(pts, col, "4,3" if k else None)
                    pts = []
            if pts:
                cv.line(pts, col, "4,3" if k else None)
    if legend:
        cv.legend(legend)
    title = f"q={F.q} alpha={float(a):.6f} {dom.case}"
    return cv.render(title)


def _fg_float(H, t):
    return H / (1 - H * t), (abs(t) - H) / (H * t)


def _piece_outline(F, pc, n=40):
    H = float(hurwitz_const(F))
    lo, hi = float(pc.lo), float(pc.hi)
    top = float(pc.top)
    lower, upper = [], []
    for i in range(n + 1):
        t = lo + (hi - lo) * i / n
        if t == 0:
            continue
        f, g = _fg_float(H, t)
        lower.append((t, min(max(f, g) if pc.side == "neg" else f, top)))
        upper.append((t, top if pc.side == "neg" else min(top, g)))
    return lower + upper[::-1]


# ---------------------------------------------------------------- commands

def cmd_expand(args, F, a):
    x = _parse_x(args.x, F, args.bits)
    with ivprec(args.bits):
        ex = expand(x, a, F, args.n)
        conv = convergents(ex.digits, F) if ex.digits else []
        rows = [[0, "", 0, 1, _num(abs(x), args.digits)]]
        for c, dg in zip(conv, ex.digits):
            rows.append([c.n, str(dg), _num(c.p, args.digits), _num(c.q_den, args.digits),
                         _num(theta_direct(x, c), args.digits)])
    if args.format != "csv":
        _write(f"word {format_word(ex.digits)}{' ...' if ex.truncated else ''}\n", args.out)
    _emit(rows, ["n", "digit", "p_n", "q_n", "theta_n"], args.format, args.out if args.format == "csv" else None)
    return EXIT_OK


def cmd_theta(args, F, a):
    x = _parse_x(args.x, F, args.bits)
    from .natext import next_point
    rows = []
    with ivprec(args.bits):
        p = PlanePoint(x, F.ctx.zero if isinstance(x, FieldElem) else mpmath.iv.mpf(0))
        for n in range(args.n):
            if isinstance(p.t, FieldElem) and p.t.is_zero():
                break
            e = 1 if float(p.t) >= 0 else -1
            a0, a1 = theta_from_tv(p.t, p.v, e)
            rows.append([n, _num(a0, args.digits), _num(a1, args.digits), e])
            p = next_point(p, a, F)
    _emit(rows, ["n", "theta_prev", "theta", "eps_next"], args.format, args.out)
    return EXIT_OK


def cmd_domain(args, F, a):
    dom = build_domain(F, a)
    if args.format == "svg":
        _write(domain_svg(F, a, dom, scale=args.scale), args.out)
        return EXIT_OK
    rows = [[s.index, _num(s.lo, args.digits), _num(s.hi, args.digits), _num(s.height, args.digits)]
            for s in sorted(dom.nonempty(), key=lambda s: s.index)]
    if args.format == "txt":
        sys.stdout.write(f"case {dom.case}\n")
    _emit(rows, ["strip", "t_lo", "t_hi", "height"], args.format, args.out)
    return EXIT_OK


def cmd_regions(args, F, a):
    rd = region_decomposition(F, a)
    if args.format == "svg":
        _write(domain_svg(F, a, rd.domain, rd, scale=args.scale), args.out)
        return EXIT_OK
    rows = []
    for c in rd.components:
        for pc in c.pieces:
            rows.append([c.name, pc.strip, _num(pc.lo, args.digits), _num(pc.hi, args.digits),
                         _num(pc.top, args.digits)])
    _emit(rows, ["component", "strip", "t_lo", "t_hi", "top"], args.format, args.out)
    if args.format == "txt":
        for c in rd.components:
            vs = "; ".join(f"({_num(v.t, args.digits)}, {_num(v.v, args.digits)})" for v in c.vertices)
            sys.stdout.write(f"{c.name} vertices {vs}\n")
    return EXIT_OK


def cmd_tong(args, F, a):
    case = classify_alpha(F, a)
    if case == "odd_right":
        w = tong_finite(F, a)
        _write(f"finite spectrum: min of Theta_(n-1..n+{w}) < H_q = "
               f"{_num(hurwitz_const(F), args.digits)}\n", args.out)
        return EXIT_OK
    tab = tong_constants(F, a, args.k)
    rows = [[r.k, _num(r.tau, args.digits), _num(r.nu, args.digits), _num(r.c, args.digits),
             "" if r.c_alt is None else _num(r.c_alt, args.digits)] for r in tab.rows]
    _emit(rows, ["k", "tau", "nu", "c_k", "c_alt"], args.format, args.out)
    if args.format == "txt":
        sys.stdout.write(f"limit {_num(tab.limit, args.digits)}  K {tab.K}  round {tab.round_length}\n")
    return EXIT_OK


def cmd_flush(args, F, a):
    kb = K_bound(F, a)
    sys.stdout.write(f"K_bound {kb.K} transient {kb.component}\n")
    if args.t is not None:
        p = PlanePoint(F.ctx(Fraction(args.t)), F.ctx(Fraction(args.v)))
        fc = flush_count(F, a, p, max_rounds=args.max_rounds, component=args.component)
        sys.stdout.write(f"flush_count {'not-in-D' if fc is None else fc}\n")
    return EXIT_OK


def cmd_borel(args, F, a):
    cert = borel_certificate(F, a)
    pr = sharpness_probe(F, a, args.rounds)
    d = args.digits
    lines = [f"H_q {_num(hurwitz_const(F), d)}",
             f"fixed point ({_num(cert.fixed.point.t, d)}, {_num(cert.fixed.point.v, d)}) "
             f"period {cert.fixed.period} branch {cert.fixed.branch}",
             f"witness prefix {format_word(cert.witness_prefix) or '-'} x {_num(cert.witness_x, d)}",
             "round  window_min  H-min"]
    for i, (m, g) in enumerate(zip(pr.window_min, pr.margins), 1):
        lines.append(f"{i:5d}  {_num(m, d)}  {g:.3e}")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_lenstra(args, F, a):
    L = lenstra_const(F, a)
    d = args.digits
    H = hurwitz_const(F)
    rel = "<" if L.value < H else ("=" if L.value == H else ">")
    lines = [f"L_alpha {_num(L.value, d)} ({rel} H_q = {_num(H, d)})",
             f"contact ({_num(L.witness.t, d)}, {_num(L.witness.v, d)}) strip J{L.strip}"]
    if L.dks_formula is not None:
        lines.append(f"closed form min(lambda/(lambda+2), lambda(2-alpha lambda^2)/(4-lambda^2)) "
                     f"{_num(L.dks_formula, d)}")
    if L.right_end_bound is not None:
        lines.append(f"bound from the strip ending at r_0 {_num(L.right_end_bound, d)}")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_thresholds(args, F, a):
    th = thresholds(F)
    rows = [[k, _num(v, args.digits)] for k, v in sorted(th.items(), key=lambda kv: float(kv[1]))]
    _emit(rows, ["name", "value"], args.format, args.out)
    return EXIT_OK


def cmd_verify(args, F, a):
    cfg = load_config(args.config)
    rep = run_suite(cfg)
    _write(rep.to_text(), args.out)
    if args.csv:
        rep.to_csv(args.csv)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_dual(args, F, a):
    p = PlanePoint(F.ctx(Fraction(args.t)), F.ctx(Fraction(args.v)))
    blk = dual_block(F, a, p, args.length)
    rows = [[i, _num(x, args.digits), _num(y, args.digits)] for i, (x, y) in
            enumerate(zip(blk.thetas, blk.dual))]
    _emit(rows, ["i", "theta", "dual"], args.format, args.out)
    sys.stdout.write(f"equal {blk.equal}\n")
    return EXIT_OK if blk.equal else EXIT_VERIFY


COMMANDS = {
    "expand": cmd_expand, "theta": cmd_theta, "domain": cmd_domain, "regions": cmd_regions,
    "tong": cmd_tong, "flush": cmd_flush, "borel": cmd_borel, "lenstra": cmd_lenstra,
    "thresholds": cmd_thresholds, "verify": cmd_verify, "dual": cmd_dual,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="rosenfrac", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, alpha=True):
        p.add_argument("--q", type=int, required=True)
        if alpha:
            p.add_argument("--alpha", default="1/2",
                           help="exact: 3/5, 0.52, 1/lambda, rho/lambda, alpha1, 1/lambda-1/1000")
        p.add_argument("--digits", type=int, default=10)
        p.add_argument("--format", choices=("txt", "csv", "svg"), default="txt")
        p.add_argument("--out")
        p.add_argument("--bits", type=int, default=_bits_default())

    for name in ("expand", "theta"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--x", required=True, help="rational/decimal or a digit word like [|(-1:2)]")
        p.add_argument("--n", type=int, default=10)
    for name in ("domain", "regions"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--scale", type=int, default=400)
    p = sub.add_parser("tong")
    common(p)
    p.add_argument("--k", type=int, default=10)
    p = sub.add_parser("flush")
    common(p)
    p.add_argument("--t")
    p.add_argument("--v")
    p.add_argument("--component")
    p.add_argument("--max-rounds", type=int, default=1000)
    p = sub.add_parser("borel")
    common(p)
    p.add_argument("--rounds", type=int, default=20)
    p = sub.add_parser("lenstra")
    common(p)
    p = sub.add_parser("thresholds")
    common(p, alpha=False)
    p = sub.add_parser("verify")
    p.add_argument("--config", required=True)
    p.add_argument("--csv")
    p.add_argument("--out")
    p = sub.add_parser("dual")
    common(p)
    p.add_argument("--t", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--length", type=int, default=12)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.cmd == "verify":
            return COMMANDS["verify"](args, None, None)
        if args.q < 3:
            raise ValueError("q must be >= 3")
        if getattr(args, "digits", 10) < 1 or getattr(args, "n", 1) < 0:
            raise ValueError("digits must be >= 1 and n >= 0")
        if args.format == "svg" and args.cmd not in ("domain", "regions"):
            raise ValueError("svg output is available for domain and regions")
        F = field_setup(args.q)
        a = parse_alpha(args.alpha, F) if hasattr(args, "alpha") else None
        if args.cmd == "flush" and (args.t is None) != (args.v is None):
            raise ValueError("--t and --v go together")
        return COMMANDS[args.cmd](args, F, a)
    except (PrecisionError, UndecidedError) as exc:
        sys.stderr.write(f"precision exhausted: {exc}\n")
        return EXIT_PRECISION
    except (ValueError, FieldError, DomainError, CaseError, ZeroDivisionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
