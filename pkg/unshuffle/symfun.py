"""
Symmetric function kernels: power sums, elementary symmetric polynomials,
Newton's identities and the pull-back of power sums along y = A x.
"""
from fractions import Fraction

from unshuffle.errors import UsageError
from unshuffle import polyring


def power_sum(ell, values):
    """
    Return p_ell(v) = sum_i v_i^ell. The coefficient domain of values is
    preserved: rationals stay exact, floats stay floats.
    """
    if ell < 1:
        raise UsageError("Power sum order has to be positive, got %d" % ell)
    total = 0
    for value in values:
        total += value ** ell
    return total


def power_sums(values, count):
    """Return (p_1(v), ..., p_count(v))"""
    return [power_sum(ell, values) for ell in range(1, count + 1)]


def _exact(values):
    """Convert values to Fractions, refusing floats"""
    try:
        return [polyring.to_coefficient(value, polyring.EXACT)
                for value in values]
    except UsageError:
        raise UsageError("Newton's identities are available in the exact "
                         "domain only")


def elementary_symmetric(values):
    """
    Return (s_1, ..., s_L) of the values by expanding prod_i (t + v_i)
    directly; s_k is the coefficient of t^(L-k).
    """
    coeffs = [1]
    for value in values:
        shifted = coeffs + [0]
        for index in range(1, len(shifted)):
            shifted[index] += value * coeffs[index - 1]
        coeffs = shifted
    return coeffs[1:]


def newton_p_to_e(psums):
    """
    Convert power sums (p_1..p_L) into elementary symmetric functions
    (s_1..s_L), with l*s_l = sum_{i=1}^{l} (-1)^(i-1) s_(l-i) p_i and s_0 = 1.
    """
    psums = _exact(psums)
    esyms = [Fraction(1)]
    for ell in range(1, len(psums) + 1):
        total = Fraction(0)
        for index in range(1, ell + 1):
            term = esyms[ell - index] * psums[index - 1]
            total += term if index % 2 else -term
        esyms.append(total / ell)
    return esyms[1:]


def newton_e_to_p(esyms):
    """
    Inverse of newton_p_to_e:
    p_l = (-1)^(l-1) (l*s_l - sum_{i=1}^{l-1} (-1)^(i-1) s_(l-i) p_i)
    """
    esyms = [Fraction(1)] + _exact(esyms)
    psums = []
    for ell in range(1, len(esyms)):
        total = ell * esyms[ell]
        for index in range(1, ell):
            term = esyms[ell - index] * psums[index - 1]
            total -= term if index % 2 else -term
        psums.append(total if ell % 2 else -total)
    return psums


def expand_power_sum_pullback(matrix, ell, order=polyring.GREVLEX):
    """
    Return p_ell(A x) = sum_i (a_i . x)^ell as a homogeneous polynomial in
    the n columns' variables. Rational entries give an exact polynomial,
    float entries a float one.
    """
    if ell < 1:
        raise UsageError("Power sum order has to be positive, got %d" % ell)
    rows = [list(row) for row in matrix]
    if not rows or not rows[0]:
        raise UsageError("Empty matrix")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise UsageError("Ragged matrix")

    domain = polyring.domain_of(value for row in rows for value in row)
    result = polyring.Poly.zero(width, order, domain)
    for row in rows:
        result = result + polyring.Poly.linear_form(row, order, domain) ** ell
    return result

