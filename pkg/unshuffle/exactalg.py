"""
Exact algebra over the rationals.

Buchberger's algorithm with the normal selection strategy and the
Gebauer-Moeller pair criteria, reduced Groebner bases, standard monomials
and quotient dimension of zero-dimensional ideals, extraction of the single
point of the augmented power-sum system and the linear-form basis of the
ideal of maximal minors of [A | y].
"""
from fractions import Fraction

from sympy.polys.monomials import monomial_divides, monomial_lcm
from sympy.polys.monomials import monomial_ldiv, monomial_mul

from unshuffle.errors import CapExceeded, PivotSingular, TheoremViolation
from unshuffle.errors import UsageError
from unshuffle.logger import get_logger
from unshuffle import polyring
from unshuffle import ratmat
from unshuffle import symfun
from unshuffle.polyring import Poly

LOG = get_logger(__name__)

INFINITE = 'infinite'
UNIQUE = 'unique'
NO_SOLUTION = 'no solution'
MAX_EXACT_N = 3


class GroebnerCaps(object):
    """Resource limits of the Groebner computation"""

    def __init__(self, max_degree=40, max_basis=500, max_bits=20000):
        self.max_degree = max_degree
        self.max_basis = max_basis
        self.max_bits = max_bits

    def check(self, poly, basis_size):
        """Raise CapExceeded if the new basis element breaks any limit"""
        if basis_size > self.max_basis:
            raise CapExceeded("cap: basis size %d exceeds %d" %
                              (basis_size, self.max_basis))
        degree = poly.total_degree()
        if degree > self.max_degree:
            raise CapExceeded("cap: total degree %d exceeds %d" %
                              (degree, self.max_degree))
        bits = max(max(coeff.numerator.bit_length(),
                       coeff.denominator.bit_length())
                   for _, coeff in poly.terms())
        if bits > self.max_bits:
            raise CapExceeded("cap: coefficient of %d bits exceeds %d" %
                              (bits, self.max_bits))


class IdealBasis(object):
    """
    Generators of an ideal, all nonzero, exact, of the same arity and
    converted to one monomial order.
    """

    def __init__(self, generators, order=polyring.GREVLEX):
        generators = list(generators)
        if not generators:
            raise UsageError("Ideal needs at least one generator")
        polyring.order_key(order)
        arity = generators[0].arity
        for poly in generators:
            if poly.domain != polyring.EXACT:
                raise UsageError("Groebner bases need exact coefficients")
            if poly.arity != arity:
                raise UsageError("Generators differ in arity")
            if poly.is_zero():
                raise UsageError("Zero generator")
        self.generators = [poly.with_order(order) for poly in generators]
        self.order = order

    @property
    def arity(self):
        return self.generators[0].arity

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)


class GroebnerResult(object):
    """
    Reduced Groebner basis together with the standard monomials, which are
    only listed for zero-dimensional ideals (quotient_dim is INFINITE
    otherwise).
    """

    def __init__(self, basis, standard_monomials, quotient_dim):
        self.basis = basis
        self.standard_monomials = standard_monomials
        self.quotient_dim = quotient_dim

    @property
    def order(self):
        return self.basis[0].order

    def is_zero_dimensional(self):
        return self.quotient_dim != INFINITE

    def is_unit_ideal(self):
        return len(self.basis) == 1 and self.basis[0].is_constant()

    def is_linear(self):
        """True for a basis {x_i - c_i} of a single rational point"""
        return (len(self.basis) == self.basis[0].arity and
                all(poly.total_degree() == 1 for poly in self.basis))

    def leading_monomials(self):
        return [poly.leading_monomial() for poly in self.basis]


def normal_form(poly, divisors):
    """
    Fully reduced remainder of poly on division by the divisors, in the
    monomial order of poly.
    """
    return poly.rem(divisors)


def s_polynomial(left, right):
    """S-polynomial of two nonzero polynomials"""
    lead_l, coeff_l = left.leading_term()
    lead_r, coeff_r = right.leading_term()
    lcm = monomial_lcm(lead_l, lead_r)
    return (left.mul_term(monomial_ldiv(lcm, lead_l), 1 / coeff_l) -
            right.mul_term(monomial_ldiv(lcm, lead_r), 1 / coeff_r))


def _select(pairs, leads, key):
    """Normal strategy: pair with the smallest lcm of leading monomials"""
    return min(pairs, key=lambda pair: (
        key(monomial_lcm(leads[pair[0]], leads[pair[1]])), pair))


def _update(basis, leads, pairs, poly, key):
    """Add poly to the basis, pruning pairs with the Gebauer-Moeller rules"""
    lcm = monomial_lcm
    lead = poly.leading_monomial()
    new = len(basis)

    kept = set()
    for first, second in pairs:
        both = lcm(leads[first], leads[second])
        if (not monomial_divides(lead, both) or
                both == lcm(leads[first], lead) or
                both == lcm(leads[second], lead)):
            kept.add((first, second))

    groups = {}
    for index in range(new):
        groups.setdefault(lcm(leads[index], lead), []).append(index)
    minimal = []
    for common in sorted(groups, key=key):
        if all(not monomial_divides(other, common) for other in minimal):
            minimal.append(common)
    for common in minimal:
        if not any(common == monomial_mul(leads[index], lead)
                   for index in groups[common]):
            kept.add((min(groups[common]), new))

    basis.append(poly)
    leads.append(lead)
    return kept


def _minimalize(basis, key):
    result = []
    for poly in sorted(basis, key=lambda item: key(item.leading_monomial())):
        lead = poly.leading_monomial()
        if all(not monomial_divides(other.leading_monomial(), lead)
               for other in result):
            result.append(poly)
    return result


def _interreduce(basis):
    return [normal_form(poly, basis[:index] + basis[index + 1:]).monic()
            for index, poly in enumerate(basis)]


def standard_monomials(leads, arity, order=polyring.GREVLEX):
    """
    Monomials outside the ideal generated by the leading monomials, in
    descending order, or None when there are infinitely many of them.
    """
    if any(not any(lead) for lead in leads):
        return []
    for var in range(arity):
        if not any(lead[var] and sum(lead) == lead[var] for lead in leads):
            return None

    def standard(mono):
        return not any(monomial_divides(lead, mono) for lead in leads)

    start = (0,) * arity
    found = set([start])
    todo = [start]
    while todo:
        mono = todo.pop()
        for var in range(arity):
            bigger = tuple(exp + 1 if pos == var else exp
                           for pos, exp in enumerate(mono))
            if bigger not in found and standard(bigger):
                found.add(bigger)
                todo.append(bigger)
    return sorted(found, key=polyring.order_key(order), reverse=True)


def groebner(ideal, caps=None):
    """
    Reduced Groebner basis of the ideal in its monomial order. A plain list
    of polynomials is accepted as well and used in its own order.
    """
    if not isinstance(ideal, IdealBasis):
        ideal = list(ideal)
        if not ideal:
            raise UsageError("Ideal needs at least one generator")
        ideal = IdealBasis(ideal, ideal[0].order)
    caps = caps or GroebnerCaps()
    key = polyring.order_key(ideal.order)

    basis = []
    leads = []
    pairs = set()
    for poly in ideal:
        poly = poly.monic()
        caps.check(poly, len(basis) + 1)
        pairs = _update(basis, leads, pairs, poly, key)

    steps = 0
    while pairs:
        pair = _select(pairs, leads, key)
        pairs.remove(pair)
        remainder = normal_form(s_polynomial(basis[pair[0]], basis[pair[1]]),
                                basis)
        steps += 1
        if remainder.is_zero():
            continue
        remainder = remainder.monic()
        caps.check(remainder, len(basis) + 1)
        pairs = _update(basis, leads, pairs, remainder, key)

    reduced = _interreduce(_minimalize(basis, key))
    reduced.sort(key=lambda poly: key(poly.leading_monomial()))
    LOG.debug("Groebner basis in %s: %d elements after %d S-polynomials",
              ideal.order, len(reduced), steps)

    standard = standard_monomials([poly.leading_monomial()
                                   for poly in reduced],
                                  ideal.arity, ideal.order)
    if standard is None:
        return GroebnerResult(reduced, [], INFINITE)
    return GroebnerResult(reduced, standard, len(standard))


def _require_exact(instance):
    if instance.domain != polyring.EXACT:
        raise UsageError("Exact verification needs an exact instance")
    if instance.n < 1 or instance.m < instance.n:
        raise UsageError("m >= n required (got m=%d, n=%d)" %
                         (instance.m, instance.n))
    if instance.n > MAX_EXACT_N:
        raise CapExceeded("cap: exact verification is limited to n <= %d" %
                          MAX_EXACT_N)


def _power_sum_equations(instance, count, order):
    equations = []
    for ell in range(1, count + 1):
        pullback = symfun.expand_power_sum_pullback(instance.A, ell, order)
        equations.append(pullback - symfun.power_sum(ell, instance.y))
    return equations


def square_system(instance, order=polyring.GREVLEX):
    """Generators q_1..q_n, q_l = p_l(A x) - p_l(y)"""
    _require_exact(instance)
    return IdealBasis(_power_sum_equations(instance, instance.n, order),
                      order)


def augmented_system(instance, order=polyring.GREVLEX):
    """Generators q_1..q_(n+1)"""
    _require_exact(instance)
    return IdealBasis(_power_sum_equations(instance, instance.n + 1, order),
                      order)


def power_sum_ideal(A, order=polyring.GREVLEX):
    """Homogeneous generators p_1(A x)..p_n(A x)"""
    rows = ratmat.to_rows(A)
    if not rows or not rows[0]:
        raise UsageError("Empty matrix")
    return IdealBasis([symfun.expand_power_sum_pullback(rows, ell, order)
                       for ell in range(1, len(rows[0]) + 1)], order)


def verify_square_count(instance, caps=None):
    """
    Dimension of the quotient by the square system, n! for a generic
    instance, INFINITE if the system is not zero-dimensional.
    """
    result = groebner(square_system(instance), caps)
    LOG.info("Square system: quotient dimension %s", result.quotient_dim)
    return result.quotient_dim


def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def univariate_divmod(numerator, denominator):
    """
    Quotient and remainder of univariate polynomials given by ascending
    coefficient lists.
    """
    numerator = [Fraction(value) for value in _trim(numerator)]
    denominator = [Fraction(value) for value in _trim(denominator)]
    if not denominator:
        raise ZeroDivisionError("Division by zero polynomial")
    quotient = [Fraction(0)] * max(1, len(numerator) - len(denominator) + 1)
    head = denominator[-1]
    while len(numerator) >= len(denominator):
        shift = len(numerator) - len(denominator)
        factor = numerator[-1] / head
        quotient[shift] = factor
        for pos, value in enumerate(denominator):
            numerator[pos + shift] -= factor * value
        numerator = _trim(numerator[:-1])
    return _trim(quotient), numerator


def univariate_gcd(left, right):
    """Monic greatest common divisor, empty list when both are zero"""
    left, right = _trim(left), _trim(right)
    while right:
        left, right = right, univariate_divmod(left, right)[1]
    if not left:
        return []
    head = Fraction(left[-1])
    return [Fraction(value) / head for value in left]


def _single_root(coeffs):
    """
    Root c if the monic coefficient list is (x - c)^k, None if it has more
    than one distinct complex root.
    """
    degree = len(coeffs) - 1
    root = -coeffs[degree - 1] / degree
    power = [Fraction(1)]
    for _ in range(degree):
        power = [Fraction(0)] + power
        for pos in range(len(power) - 1):
            power[pos] -= root * power[pos + 1]
    return root if power == list(coeffs) else None


def back_substitute(basis):
    """
    Walk a zero-dimensional lex basis from the last variable up, intersect
    the fibres with univariate gcds and return the only point of the
    variety. None when the variety is empty; TheoremViolation when it has
    more than one point.
    """
    arity = basis[0].arity
    point = {}
    for var in reversed(range(arity)):
        common = []
        for poly in basis:
            used = poly.variables()
            if not used or used[0] != var:
                continue
            fibre = poly.substitute(point).univariate_coefficients(var)
            common = univariate_gcd(common, fibre)
        if not common:
            raise TheoremViolation("variety is not finite in x%d" %
                                   (var + 1))
        if len(common) == 1:
            return None
        root = _single_root(common)
        if root is None:
            raise TheoremViolation("variety has more than one point "
                                   "(x%d takes %d values)" %
                                   (var + 1, len(common) - 1))
        point[var] = root
    return tuple(point[var] for var in range(arity))


class UniqueRootResult(object):
    """
    Outcome of the uniqueness check. point is None when the augmented
    system has no solution at all.
    """

    def __init__(self, point, quotient_dim, basis, multiplicity_note=None):
        self.point = point
        self.quotient_dim = quotient_dim
        self.basis = basis
        self.multiplicity_note = multiplicity_note

    @property
    def status(self):
        return NO_SOLUTION if self.point is None else UNIQUE


def verify_unique_root(instance, caps=None):
    """
    Solve the augmented system exactly. The lex basis is computed from the
    grevlex one. Succeeds iff the variety is a single point, which has to
    equal xi_star when the instance carries it.
    """
    grevlex = groebner(augmented_system(instance), caps)
    result = groebner(IdealBasis(grevlex.basis, polyring.LEX), caps)

    if result.is_unit_ideal():
        LOG.info("Augmented system has no solution")
        return UniqueRootResult(None, 0, result.basis)
    if not result.is_zero_dimensional():
        raise TheoremViolation("variety of the augmented system is not "
                               "finite")

    note = None
    if result.is_linear():
        point = tuple(-poly.coefficient((0,) * poly.arity)
                      for poly in sorted(result.basis,
                                         key=lambda poly: poly.variables()))
    else:
        point = back_substitute(result.basis)
        if point is None:
            return UniqueRootResult(None, 0, result.basis)
        note = "multiplicity %d > 1" % result.quotient_dim
        LOG.warning("Single root with %s", note)

    if instance.xi_star is not None and point != tuple(instance.xi_star):
        raise TheoremViolation("unique root %s differs from xi_star" %
                               ", ".join(str(value) for value in point))
    LOG.info("Augmented system has the single root %s",
             ", ".join(str(value) for value in point))
    return UniqueRootResult(point, result.quotient_dim, result.basis, note)


def determinantal_linear_basis(A):
    """
    Linear forms l_i = y_i - sum_s c_is y_(m-n+s), i = 1..m-n, vanishing on
    y = A x. c_i solves c_i B = a_i for the bottom n x n block B, so by
    Cramer c_is = det(B with row s replaced by a_i) / det(B).
    """
    rows = ratmat.to_rows(A)
    if not rows or not rows[0]:
        raise UsageError("Empty matrix")
    m, n = len(rows), len(rows[0])
    if m < n:
        raise UsageError("m >= n required (got m=%d, n=%d)" % (m, n))
    if m == n:
        return []

    block = rows[m - n:]
    pivot = ratmat.determinant(block)
    if pivot == 0:
        raise PivotSingular("pivot block singular")

    forms = []
    for index in range(m - n):
        terms = {}
        unit = [0] * m
        unit[index] = 1
        terms[tuple(unit)] = Fraction(1)
        for pos in range(n):
            replaced = block[:pos] + [rows[index]] + block[pos + 1:]
            coeff = ratmat.determinant(replaced) / pivot
            if coeff:
                unit = [0] * m
                unit[m - n + pos] = 1
                terms[tuple(unit)] = -coeff
        forms.append(Poly(terms, m))
    return forms


def verification_record(instance, quotient_dim=None, unique_root=None,
                        multiplicity_note=None, wall_time=None):
    """JSON-ready record of one verification run"""
    record = {'seed': instance.seed,
              'n': instance.n,
              'm': instance.m,
              'quotient_dim': quotient_dim,
              'unique_root': (None if unique_root is None else
                              [polyring.format_coefficient(value,
                                                           polyring.EXACT)
                               for value in unique_root]),
              'multiplicity_note': multiplicity_note}
    if wall_time is not None:
        record['wall_time'] = wall_time
    return record
