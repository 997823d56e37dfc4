"""Independent high-precision evaluation of the lower-bound example values.

Run directly to print the constants frozen into tests/test_bounds.py.  Uses
mpmath and explicit binomial sums; shares no code with dsfilter.bounds.
"""

import mpmath as mp

mp.mp.dps = 50


def ball(r, d):
    return sum(mp.binomial(d, i) for i in range(r + 1))


def zero_error(n, d, cr):
    return max(mp.mpf(0), n * (d - mp.log(mp.e * n, 2) - mp.log(ball(cr, d), 2)))


def average(n, d, r, eps):
    return max(n * mp.log(1 / (2 * eps), 2), n * (2 * mp.mpf(r) ** 2 / d + 1) * mp.log(mp.e, 2))


def small_c(n, c, eps):
    return n / (c - 1) * mp.log(1 / eps, 2)


VALUES = {
    "zero_error(16, 64, cr=4)": zero_error(16, 64, 4),
    "zero_error(1, 4, cr=4)": zero_error(1, 4, 4),
    "average(16, 64, 8, 2^-10)": average(16, 64, 8, mp.mpf(2) ** -10),
    "average(4, 256, 32, 2^-10)": average(4, 256, 32, mp.mpf(2) ** -10),
    "small_c(16, 1.5, 2^-10)": small_c(16, mp.mpf("1.5"), mp.mpf(2) ** -10),
    "small_c(16, 2, 2^-10)": small_c(16, 2, mp.mpf(2) ** -10),
    "ball(4, 64)": ball(4, 64),
    "reduced hypothesis log2(n b(64,256)/2^256) for n=4": mp.log(4 * ball(64, 256), 2) - 256,
}

if __name__ == "__main__":
    for k, v in VALUES.items():
        print(f"{k} = {mp.nstr(v, 20)}")
