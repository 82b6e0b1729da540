from fractions import Fraction

from smld._ddouble import dd, dd_add, dd_div, dd_mul, dd_to_float, two_prod, two_sum


def _frac(x):
    return Fraction(x[0]) + Fraction(x[1])


def test_two_sum_exact():
    s, e = two_sum(1e16, 1.0)
    assert Fraction(s) + Fraction(e) == Fraction(1e16) + 1


def test_two_prod_exact():
    p, e = two_prod(1.0 + 2.0**-30, 1.0 - 2.0**-30)
    assert Fraction(p) + Fraction(e) == (Fraction(1) + Fraction(2) ** -30) * (
        Fraction(1) - Fraction(2) ** -30
    )


def test_add_mul_accuracy():
    x = dd(0.1)
    y = dd(0.2)
    z = dd_add(dd_mul(x, y), dd(-0.02))
    # exact double arithmetic residue of 0.1 * 0.2 - 0.02
    exact = Fraction(0.1) * Fraction(0.2) - Fraction(0.02)
    assert abs(_frac(z) - exact) < Fraction(1, 10**30)


def test_div_roundtrip():
    x = dd(3.0)
    y = dd(7.0)
    q = dd_div(x, y)
    back = dd_mul(q, y)
    assert abs(_frac(back) - 3) < Fraction(1, 10**29)
    assert dd_to_float(q) == 3.0 / 7.0
