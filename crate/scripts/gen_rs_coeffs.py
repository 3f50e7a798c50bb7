"""Generate power-series coefficients (in x = p - 1/2) of the Riemann-Siegel
correction functions C0..C4 and print them as Rust constant arrays."""
import mpmath as mp

mp.mp.dps = 120
DEG = 90  # Taylor degree for Psi before differentiation


def series_cos(a, b, deg):
    # cos(a + b*x^2) as a series in x
    out = [mp.mpf(0)] * (deg + 1)
    # cos(a)cos(bx^2) - sin(a) sin(bx^2)
    j = 0
    while 2 * j <= deg:
        c = (-1) ** (j // 2) * b ** j / mp.factorial(j)
        if j % 2 == 0:
            out[2 * j] += mp.cos(a) * c
        else:
            out[2 * j] += -mp.sin(a) * c
        j += 1
    return out


def series_div(num, den, deg):
    q = [mp.mpf(0)] * (deg + 1)
    for n in range(deg + 1):
        s = num[n]
        for j in range(1, n + 1):
            s -= den[j] * q[n - j]
        q[n] = s / den[0]
    return q


# Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p), with p = 1/2 + x:
# numerator = cos(2 pi x^2 - 5 pi / 8), denominator = -cos(2 pi x)
num = series_cos(-5 * mp.pi / 8, 2 * mp.pi, DEG)
den = [mp.mpf(0)] * (DEG + 1)
for j in range(0, DEG // 2 + 1):
    den[2 * j] = -((-1) ** j) * (2 * mp.pi) ** (2 * j) / mp.factorial(2 * j)
psi = series_div(num, den, DEG)

# check against direct evaluation
for x in [mp.mpf('0.3'), mp.mpf('-0.45'), mp.mpf('0.499')]:
    p = x + mp.mpf(1) / 2
    direct = mp.cos(2 * mp.pi * (p * p - p - mp.mpf(1) / 16)) / mp.cos(2 * mp.pi * p)
    ser = sum(c * x ** i for i, c in enumerate(psi))
    assert abs(direct - ser) < mp.mpf('1e-40'), (x, direct - ser)


def deriv(s, m):
    out = []
    for i in range(m, len(s)):
        out.append(s[i] * mp.factorial(i) / mp.factorial(i - m))
    return out


def comb(terms):
    n = min(len(s) for _, s in terms)
    return [sum(c * s[i] for c, s in terms) for i in range(n)]


pi = mp.pi
d = {m: deriv(psi, m) for m in range(13)}
C = [
    d[0],
    comb([(-1 / (96 * pi ** 2), d[3])]),
    comb([(1 / (64 * pi ** 2), d[2]), (1 / (18432 * pi ** 4), d[6])]),
    comb([(-1 / (64 * pi ** 2), d[1]), (-1 / (3840 * pi ** 4), d[5]),
          (-1 / (5308416 * pi ** 6), d[9])]),
    comb([(1 / (128 * pi ** 2), d[0]), (19 / (24576 * pi ** 4), d[4]),
          (11 / (5898240 * pi ** 6), d[8]), (1 / (2038431744 * pi ** 8), d[12])]),
]

for k, s in enumerate(C):
    # keep terms until the tail is negligible on |x| <= 1/2
    last = 0
    for i, c in enumerate(s):
        if abs(c) * mp.mpf(0.5) ** i > mp.mpf('1e-22'):
            last = i
    coeffs = s[: last + 1]
    print(f"const C{k}: [f64; {len(coeffs)}] = [")
    for c in coeffs:
        print(f"    {mp.nstr(c, 20, strip_zeros=False, min_fixed=-1, max_fixed=-1)},")
    print("];")
