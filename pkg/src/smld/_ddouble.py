"""Minimal double-double arithmetic (~31 significant digits).

A value is an (hi, lo) pair with hi + lo the represented number and
|lo| <= ulp(hi)/2.  Only the handful of operations the compensated
central-moment sum needs are provided.  Products use Dekker splitting,
so no FMA is required.
"""

from __future__ import annotations

_SPLITTER = 134217729.0  # 2**27 + 1

DD = tuple[float, float]


def two_sum(a: float, b: float) -> DD:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a: float, b: float) -> DD:
    # requires |a| >= |b|
    s = a + b
    return s, b - (s - a)


def _split(a: float) -> DD:
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a: float, b: float) -> DD:
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd(a: float) -> DD:
    return a, 0.0


def dd_add(x: DD, y: DD) -> DD:
    s1, s2 = two_sum(x[0], y[0])
    t1, t2 = two_sum(x[1], y[1])
    s2 += t1
    s1, s2 = quick_two_sum(s1, s2)
    s2 += t2
    return quick_two_sum(s1, s2)

def dd_neg(x: DD) -> DD:
    return -x[0], -x[1]


def dd_sub(x: DD, y: DD) -> DD:
    return dd_add(x, dd_neg(y))


def dd_mul(x: DD, y: DD) -> DD:
    p1, p2 = two_prod(x[0], y[0])
    p2 += x[0] * y[1] + x[1] * y[0]
    return quick_two_sum(p1, p2)


def dd_div(x: DD, y: DD) -> DD:
    q1 = x[0] / y[0]
    r = dd_sub(x, dd_mul(y, dd(q1)))
    q2 = r[0] / y[0]
    r = dd_sub(r, dd_mul(y, dd(q2)))
    q3 = r[0] / y[0]
    s, e = quick_two_sum(q1, q2)
    return dd_add((s, e), dd(q3))


def dd_to_float(x: DD) -> float:
    return x[0] + x[1]
