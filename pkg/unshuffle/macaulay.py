"""
Macaulay matrices of homogeneous forms and what is computed from them: the
regular sequence test for p_1(A x)..p_n(A x), resultants of specialised
forms and the eliminant of the augmented forms as a polynomial in the last
power sum.

Row monomials and column multipliers are listed in descending grevlex order,
columns grouped by generator.
"""
import math
from fractions import Fraction

from sympy.polys.monomials import monomial_divides, monomial_ldiv
from sympy.polys.monomials import monomial_mul

from unshuffle.errors import CapExceeded, DenominatorDegenerate
from unshuffle.errors import TheoremViolation, UsageError
from unshuffle.logger import get_logger
from unshuffle import polyring
from unshuffle import ratmat
from unshuffle import symfun
from unshuffle.polyring import Poly

LOG = get_logger(__name__)

QUOTIENT = 'quotient'
MINORS = 'minors'
METHODS = (QUOTIENT, MINORS)
MAX_ELIMINANT_N = 2
NODE_RETRIES = 8


class MacaulayMatrix(object):
    """
    Coefficient matrix of all shifts w * f_i of total degree `degree'.
    entries[r][c] is the coefficient of rows[r] in the shift cols[c].
    """

    def __init__(self, polys, degrees, degree, rows, cols, entries):
        self.polys = polys
        self.degrees = degrees
        self.degree = degree
        self.rows = rows
        self.cols = cols
        self.entries = entries
        self._col_index = dict((col, pos) for pos, col in enumerate(cols))

    @property
    def shape(self):
        return len(self.rows), len(self.cols)

    def is_square(self):
        return len(self.rows) == len(self.cols)

    def column(self, generator, multiplier):
        """Column of the shift multiplier * f_generator"""
        pos = self._col_index[(generator, tuple(multiplier))]
        return [row[pos] for row in self.entries]


def critical_degree(degrees):
    """l = l_1 + ... + l_a - a + 1"""
    return sum(degrees) - len(degrees) + 1


def build_macaulay(polys, degrees=None, degree=None):
    """
    Macaulay matrix of a homogeneous exact forms in a variables. The degree
    defaults to the critical one.
    """
    polys = list(polys)
    if not polys:
        raise UsageError("At least one form is required")
    arity = polys[0].arity
    if len(polys) != arity:
        raise UsageError("Expected %d forms in %d variables, got %d" %
                         (arity, arity, len(polys)))
    if degrees is None:
        degrees = [poly.total_degree() for poly in polys]
    degrees = list(degrees)
    if len(degrees) != len(polys):
        raise UsageError("One degree per form is required")
    for index, poly in enumerate(polys):
        if poly.domain != polyring.EXACT or poly.arity != arity:
            raise UsageError("Forms have to be exact and of one arity")
        if poly.is_zero() or not poly.is_homogeneous():
            raise UsageError("Form %d is not homogeneous" % (index + 1))
        if poly.total_degree() != degrees[index]:
            raise UsageError("Form %d has degree %d, not %d" %
                             (index + 1, poly.total_degree(),
                              degrees[index]))
    if degree is None:
        degree = critical_degree(degrees)

    rows = polyring.monomials_of_degree(arity, degree)
    row_index = dict((mono, pos) for pos, mono in enumerate(rows))
    cols = []
    for index, poly_degree in enumerate(degrees):
        if poly_degree <= degree:
            cols.extend((index, mono) for mono in
                        polyring.monomials_of_degree(arity,
                                                     degree - poly_degree))

    entries = [[Fraction(0)] * len(cols) for _ in rows]
    for pos, (index, shift) in enumerate(cols):
        for mono, coeff in polys[index].terms():
            entries[row_index[monomial_mul(shift, mono)]][pos] = coeff
    LOG.debug("Macaulay matrix of degree %d: %d x %d", degree, len(rows),
              len(cols))
    return MacaulayMatrix(polys, degrees, degree, rows, cols, entries)


def _pure_power(var, exp, arity):
    return tuple(exp if pos == var else 0 for pos in range(arity))


def regular_sequence_test(A):
    """
    True iff p_1(A x)..p_n(A x) span all forms of degree a = n(n-1)/2 + 1,
    i.e. the generator matrix of that degree has rank C(a+n-1, n-1).
    """
    rows = ratmat.to_rows(A)
    if not rows or not rows[0]:
        raise UsageError("Empty matrix")
    m, n = len(rows), len(rows[0])
    if m < n:
        raise UsageError("m >= n required (got m=%d, n=%d)" % (m, n))

    target = n * (n - 1) // 2 + 1
    forms = [symfun.expand_power_sum_pullback(rows, ell)
             for ell in range(1, n + 1)]
    if any(form.is_zero() for form in forms):
        LOG.info("Vanishing power sum, not a regular sequence")
        return False
    mac = build_macaulay(forms, degree=target)
    expected = math.comb(target + n - 1, n - 1)
    result = ratmat.has_full_row_rank(mac.entries)
    LOG.info("Regular sequence test, degree %d, %d x %d: %s", target,
             expected, len(mac.cols), result)
    return result


def _quotient(mac):
    """
    Classical formula det(M) / det(M'). Monomial alpha is assigned to the
    first form i with t_i^l_i | alpha, M holds the shift alpha / t_i^l_i of
    that form, M' the rows and columns of monomials divisible by more than
    one t_i^l_i.
    """
    arity = len(mac.polys)
    powers = [_pure_power(var, mac.degrees[var], arity)
              for var in range(arity)]

    picked = []
    spare = []
    for pos, alpha in enumerate(mac.rows):
        divisors = [var for var in range(arity)
                    if monomial_divides(powers[var], alpha)]
        shift = monomial_ldiv(alpha, powers[divisors[0]])
        picked.append(mac._col_index[(divisors[0], shift)])
        if len(divisors) > 1:
            spare.append(pos)

    square = [[row[col] for col in picked] for row in mac.entries]
    denominator = ratmat.determinant([[square[row][col] for col in spare]
                                      for row in spare])
    if denominator == 0:
        raise DenominatorDegenerate("denominator degenerate")
    return ratmat.determinant(square) / denominator


def resultant_eval(polys, method=QUOTIENT):
    """
    Resultant of a homogeneous exact forms in a variables, normalised to
    Res(t_1^l_1, ..., t_a^l_a) = 1. Zero iff the forms share a nonzero
    common root. The 'minors' method takes the determinant of the Macaulay
    matrix itself, which is square for a <= 2.
    """
    if method not in METHODS:
        raise UsageError("Unknown resultant method `%s'" % method)
    mac = build_macaulay(polys)
    if method == MINORS:
        if len(mac.polys) > 2:
            raise UsageError("The minors method needs at most two forms")
        return ratmat.determinant(mac.entries)
    return _quotient(mac)


def augmented_forms(A, r_fixed, r_last):
    """
    f_i = p_i(A t) - r_i t_(n+1)^i in n+1 variables, i = 1..n+1, with r_fixed
    used for r_1..r_n and r_last for r_(n+1).
    """
    rows = ratmat.to_rows(A)
    if not rows or not rows[0]:
        raise UsageError("Empty matrix")
    n = len(rows[0])
    values = [polyring.to_coefficient(value, polyring.EXACT)
              for value in r_fixed]
    if len(values) != n:
        raise UsageError("Expected %d fixed power sums, got %d" %
                         (n, len(values)))
    values.append(polyring.to_coefficient(r_last, polyring.EXACT))

    extended = [row + [Fraction(0)] for row in rows]
    forms = []
    for ell in range(1, n + 2):
        pullback = symfun.expand_power_sum_pullback(extended, ell)
        shifted = Poly({_pure_power(n, ell, n + 1): values[ell - 1]}, n + 1)
        forms.append(pullback - shifted)
    return forms


def interpolation_nodes():
    """0, 1, -1, 2, -2, ..."""
    yield Fraction(0)
    step = 1
    while True:
        yield Fraction(step)
        yield Fraction(-step)
        step += 1


def interpolate(nodes, values):
    """
    Ascending coefficients of the polynomial of degree < len(nodes) through
    the points, by Newton's divided differences.
    """
    nodes = [Fraction(node) for node in nodes]
    table = [Fraction(value) for value in values]
    size = len(nodes)
    for level in range(1, size):
        for pos in range(size - 1, level - 1, -1):
            table[pos] = ((table[pos] - table[pos - 1]) /
                          (nodes[pos] - nodes[pos - level]))

    coeffs = [table[-1]]
    for pos in range(size - 2, -1, -1):
        shifted = [Fraction(0)] + coeffs
        for index, value in enumerate(coeffs):
            shifted[index] -= nodes[pos] * value
        shifted[0] += table[pos]
        coeffs = shifted
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


class EliminantResult(object):
    """
    The eliminant as a polynomial in r_(n+1), ascending exact coefficients,
    with the nodes it was sampled at.
    """

    def __init__(self, coefficients, evaluation_points, denominator_ok):
        self.coefficients = coefficients
        self.evaluation_points = evaluation_points
        self.denominator_ok = denominator_ok

    @property
    def degree(self):
        if len(self.coefficients) == 1 and self.coefficients[0] == 0:
            return -1
        return len(self.coefficients) - 1

    def leading_coefficient(self):
        return self.coefficients[-1]

    def evaluate(self, value):
        """Horner evaluation at a rational point"""
        value = polyring.to_coefficient(value, polyring.EXACT)
        total = Fraction(0)
        for coeff in reversed(self.coefficients):
            total = total * value + coeff
        return total

    def monic(self):
        head = self.leading_coefficient()
        if head == 0:
            raise UsageError("Zero eliminant cannot be made monic")
        return EliminantResult([coeff / head for coeff in self.coefficients],
                               self.evaluation_points, self.denominator_ok)

    def to_dict(self):
        def fmt(value):
            return polyring.format_coefficient(value, polyring.EXACT)

        return {'degree': self.degree,
                'coefficients': [fmt(value) for value in self.coefficients],
                'evaluation_points': [fmt(value)
                                      for value in self.evaluation_points],
                'denominator_ok': list(self.denominator_ok)}


def eliminant(A, r_fixed, allow_large=False):
    """
    r_(n+1) -> Res(f_1, ..., f_(n+1)) with r_1..r_n fixed, sampled at n!+2
    nodes and interpolated. Its degree is n!, the extra node checks it.
    Nodes with a vanishing denominator are skipped, NODE_RETRIES of them
    at most.
    """
    rows = ratmat.to_rows(A)
    if not rows or not rows[0]:
        raise UsageError("Empty matrix")
    n = len(rows[0])
    if n > MAX_ELIMINANT_N and not allow_large:
        raise CapExceeded("cap: eliminant is limited to n <= %d" %
                          MAX_ELIMINANT_N)

    expected = math.factorial(n)
    wanted = expected + 2
    tried, flags, nodes, values = [], [], [], []
    for node in interpolation_nodes():
        if len(nodes) == wanted:
            break
        if len(tried) - len(nodes) >= NODE_RETRIES:
            raise DenominatorDegenerate("denominator degenerate at %d "
                                        "nodes" % NODE_RETRIES)
        tried.append(node)
        try:
            value = resultant_eval(augmented_forms(rows, r_fixed, node))
        except DenominatorDegenerate:
            LOG.debug("Denominator vanishes at node %s", node)
            flags.append(False)
            continue
        flags.append(True)
        nodes.append(node)
        values.append(value)

    result = EliminantResult(interpolate(nodes, values), tried, flags)
    if result.degree > expected:
        raise TheoremViolation("eliminant has degree %d > %d" %
                               (result.degree, expected))
    if result.degree < expected:
        LOG.warning("Eliminant degree %d is below %d", result.degree,
                    expected)
    LOG.info("Eliminant of degree %d from %d nodes", result.degree,
             len(nodes))
    return result
