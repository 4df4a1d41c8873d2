"""Independent reference values for the test-suite, computed without the package.

Everything here uses mpmath (or plain floats) directly from the definitions, so the
frozen numbers in tests/ do not depend on the exact kernel they check.

    python scripts/derive_oracles.py
"""
import math

import mpmath as mp

mp.mp.dps = 400  # the backward past-coordinate map is unstable; keep margin


def lam(q):
    return 2 * mp.cos(mp.pi / q)


def rho(q):
    L = lam(q)
    return (L - 2 + mp.sqrt(L * L - 4 * L + 8)) / 2


def hurwitz(q):
    if q % 2 == 0:
        return mp.mpf(1) / 2
    r = rho(q)
    return r / (r * r + 1)


def prepend(word, x, L):
    """[word, x]: the value whose first digits are `word` and whose tail is x."""
    for eps, d in reversed(word):
        x = eps / (d * L + x)
    return x


def v_back(word, v, L):
    """Undo the past-coordinate update v -> 1/(d lambda + eps v) along a round."""
    for eps, d in reversed(word):
        v = (1 / v - d * L) * eps
    return v


def round_word(q):
    if q % 2 == 0:
        return [(-1, 2)] + [(-1, 1)] * (q // 2 - 2)
    h = (q - 3) // 2
    return [(-1, 2)] + [(-1, 1)] * (h - 1) + [(-1, 2)] + [(-1, 1)] * h


def tong_c(q, alpha, kmax):
    L = lam(q)
    a = mp.mpf(alpha)
    if q % 2 == 0:
        tau, nu = -1 / (L * (a + 1)), L - 1
    else:
        tau = (1 - a * L) / ((L - 1) * a * L - 1)
        nu = L - rho(q)
    w = round_word(q)
    out = []
    for _ in range(kmax):
        out.append(-tau / (1 + tau * nu))
        tau, nu = prepend(w, tau, L), v_back(w, nu, L)
    return out


def float_digits(x, q, alpha, n):
    L = 2 * math.cos(math.pi / q)
    out = []
    for _ in range(n):
        if x == 0:
            break
        e = 1 if x > 0 else -1
        d = math.floor(1 / (L * abs(x)) + 1 - alpha)
        out.append((e, d))
        x = e / x - d * L
    return out


def main():
    print("H_5 =", mp.nstr(hurwitz(5), 20))
    print("H_3 =", mp.nstr(hurwitz(3), 20), " 1/sqrt5 =", mp.nstr(1 / mp.sqrt(5), 20))
    print("q=7 rho/lambda - 1/2 =", mp.nstr(rho(7) / lam(7) - mp.mpf(1) / 2, 20))
    print("q=5 rho/lambda =", mp.nstr(rho(5) / lam(5), 20))
    for q in (5, 7, 9):
        print(f"q={q} rho =", mp.nstr(rho(q), 20), " f(rho) =",
              mp.nstr(hurwitz(q) / (1 - hurwitz(q) * rho(q)), 20))
    for q, a in ((4, "0.6"), (4, "0.69"), (6, "0.52"), (8, "0.53"), (5, "0.51"), (7, "0.501")):
        c = tong_c(q, a, 50)
        print(f"c_k q={q} alpha={a}: c1={mp.nstr(c[0], 15)} c2={mp.nstr(c[1], 15)} "
              f"c5={mp.nstr(c[4], 15)} c50-limit={mp.nstr(c[49] - hurwitz(q), 5)}")
    print("q=4 alpha=1/2 x=0.3 float digits:", float_digits(0.3, 4, 0.5, 12))
    L4 = math.sqrt(2)
    x = -0.4 * L4
    print("q=4 alpha=0.6 T(l0) =", -1 / x - L4, " digit d =", math.floor(1 / (L4 * abs(x)) + 0.4))
    print("q=4 alpha=1/2 x=0.3 digit d =", math.floor(1 / (L4 * 0.3) + 0.5))
    L5 = lam(5)
    print("1/sqrt(l^2-4l+8) q=5 =", mp.nstr(1 / mp.sqrt(L5 ** 2 - 4 * L5 + 8), 20))
    # Lenstra at alpha = rho/lambda, q=5, by float simulation of the planar map: in each
    # t-bucket the largest v/(1 + v t) seen is a lower estimate of the column maximum,
    # so the minimum over buckets approaches the constant from below
    import random
    Lf = float(lam(5))
    a = float(rho(5) / lam(5))
    random.seed(2)
    best = {}
    for _ in range(400):
        t, v = random.uniform((a - 1) * Lf, a * Lf), 0.0
        for _ in range(5000):
            if t == 0:
                break
            e = 1 if t > 0 else -1
            d = math.floor(1 / (Lf * abs(t)) + 1 - a)
            t, v = e / t - d * Lf, 1 / (d * Lf + e * v)
            b = math.floor(t * 500)
            best[b] = max(best.get(b, 0.0), v / (1 + v * t))
    arg = min(best, key=best.get)
    print("q=5 rho/lambda Lenstra estimate:", best[arg], "near t =", arg / 500)
    print("1/(lambda+1) q=5 =", mp.nstr(1 / (L5 + 1), 15))
    print("lambda/(lambda rho + 2) q=5 =", mp.nstr(L5 / (L5 * rho(5) + 2), 15))


if __name__ == "__main__":
    main()
