"""
Sparse multivariate polynomials with exchangeable coefficient domain.

Two domains are supported behind one interface:

    - 'exact' - rationals, used on every verification path,
    - 'float' - 53-bit binary floating point, used by numeric code only.

Arithmetic is carried out by ``sympy.polys.rings`` over QQ and RR; one ring
is built per arity, monomial order and domain. At the interface the
coefficients are always ``fractions.Fraction`` or ``float``.

Monomials are plain tuples of non-negative exponents (dense, one entry per
variable). Every polynomial carries its monomial order ('grevlex' by default,
'lex' for elimination) and iterates its terms in descending order.

Text form of a polynomial is ``coeff*x1^e1*...*xn^en`` terms joined with
`` + ``; exact coefficients are always written as ``p/q``, floats with the
shortest round-trip representation.
"""
import functools
import itertools
import numbers
from fractions import Fraction

import numpy as np
from sympy.polys.domains import QQ, RR
from sympy.polys.monomials import monomial_deg
from sympy.polys.orderings import monomial_key
from sympy.polys.rings import PolyRing

from unshuffle.errors import UsageError

EXACT = 'exact'
FLOAT = 'float'
DOMAINS = (EXACT, FLOAT)
GROUNDS = {EXACT: QQ, FLOAT: RR}

LEX = 'lex'
GREVLEX = 'grevlex'
ORDERS = (LEX, GREVLEX)


def order_key(order):
    """
    Return sort key function for the named monomial order. Bigger key means
    bigger monomial.
    """
    if order not in ORDERS:
        raise UsageError("Unknown monomial order `%s'" % order)
    return monomial_key(order)


def check_domain(domain):
    """Raise UsageError for unknown coefficient domain"""
    if domain not in DOMAINS:
        raise UsageError("Unknown coefficient domain `%s'" % domain)
    return domain


@functools.lru_cache(maxsize=None)
def poly_ring(arity, order=GREVLEX, domain=EXACT):
    """sympy ring in x1..x_arity for the monomial order and domain"""
    if arity < 1:
        raise UsageError("Arity has to be positive, got %d" % arity)
    order_key(order)
    check_domain(domain)
    names = ["x%d" % (index + 1) for index in range(arity)]
    return PolyRing(names, GROUNDS[domain], order)


def to_coefficient(value, domain):
    """
    Convert value to the coefficient type of the domain. Floats are refused
    in the exact domain, since the conversion would silently pretend
    exactness.
    """
    if domain == FLOAT:
        return float(value)

    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise UsageError("Boolean is not a coefficient")
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator)
    raise UsageError("Value %r cannot be used in the exact domain" % (value,))


def to_ground(value, domain):
    """Element of the sympy ground domain (QQ or RR) for the value"""
    value = to_coefficient(value, domain)
    if domain == EXACT:
        return QQ(value.numerator, value.denominator)
    return RR.convert(value)


def from_ground(value, domain):
    """Inverse of to_ground"""
    if domain == EXACT:
        return Fraction(int(QQ.numer(value)), int(QQ.denom(value)))
    return float(value)


def format_coefficient(value, domain):
    """Serialize coefficient: `p/q' for rationals, repr for floats"""
    if domain == EXACT:
        return "%d/%d" % (value.numerator, value.denominator)
    return repr(float(value))


def parse_coefficient(text, domain):
    """Inverse of format_coefficient; decimals are accepted in both domains"""
    if domain == EXACT:
        return Fraction(text.strip())
    return float(text)


def domain_of(values):
    """
    Guess the domain of a collection of scalars: float if any of them is
    a float, exact otherwise.
    """
    for value in values:
        if isinstance(value, (float, np.floating)):
            return FLOAT
    return EXACT


def monomials_of_degree(arity, degree, order=GREVLEX):
    """
    Return all monomials of given total degree in `arity' variables, sorted
    descending in the given order. There are C(degree+arity-1, arity-1) of
    them.
    """
    if arity < 1:
        raise UsageError("Arity has to be positive, got %d" % arity)
    if degree < 0:
        raise UsageError("Degree has to be non-negative, got %d" % degree)

    monos = []
    for bars in itertools.combinations_with_replacement(range(arity),
                                                        degree):
        exps = [0] * arity
        for var in bars:
            exps[var] += 1
        monos.append(tuple(exps))
    return sorted(monos, key=order_key(order), reverse=True)


class Poly(object):
    """
    Immutable sparse polynomial wrapping a sympy ring element, which keeps
    a dict monomial -> coefficient with no zero coefficient stored.
    """
    __slots__ = ('_element', '_order', '_domain', '_sorted')

    def __init__(self, terms, arity, order=GREVLEX, domain=EXACT):
        """
        Initialization. terms is a mapping (or iterable of pairs) from
        exponent tuples to coefficients; repeated monomials are summed up.
        """
        ring = poly_ring(arity, order, domain)

        items = terms.items() if hasattr(terms, 'items') else terms
        clean = {}
        for mono, coeff in items:
            mono = tuple(int(exp) for exp in mono)
            if len(mono) != arity:
                raise UsageError("Monomial %r does not have arity %d" %
                                 (mono, arity))
            if any(exp < 0 for exp in mono):
                raise UsageError("Negative exponent in %r" % (mono,))
            clean[mono] = clean.get(mono, 0) + to_coefficient(coeff, domain)

        self._element = ring.from_dict(dict(
            (mono, to_ground(coeff, domain))
            for mono, coeff in clean.items() if coeff != 0))
        self._order = order
        self._domain = domain
        self._sorted = None

    @classmethod
    def _wrap(cls, element, order, domain):
        """Construct around a ring element, no checks"""
        poly = cls.__new__(cls)
        poly._element = element
        poly._order = order
        poly._domain = domain
        poly._sorted = None
        return poly

    def _new(self, element):
        return Poly._wrap(element, self._order, self._domain)

    @classmethod
    def zero(cls, arity, order=GREVLEX, domain=EXACT):
        """Zero polynomial"""
        return cls({}, arity, order, domain)

    @classmethod
    def constant(cls, value, arity, order=GREVLEX, domain=EXACT):
        """Constant polynomial"""
        return cls({(0,) * arity: value}, arity, order, domain)

    @classmethod
    def variable(cls, index, arity, order=GREVLEX, domain=EXACT):
        """The polynomial x_{index+1}"""
        if not 0 <= index < arity:
            raise UsageError("Variable index %d out of range" % index)
        return cls._wrap(poly_ring(arity, order, domain).gens[index], order,
                         domain)

    @classmethod
    def linear_form(cls, coefficients, order=GREVLEX, domain=None):
        """Return sum_j c_j x_j for the provided coefficients"""
        coefficients = list(coefficients)
        if domain is None:
            domain = domain_of(coefficients)
        arity = len(coefficients)
        terms = {}
        for index, coeff in enumerate(coefficients):
            mono = tuple(1 if pos == index else 0 for pos in range(arity))
            terms[mono] = coeff
        return cls(terms, arity, order, domain)

    @classmethod
    def from_string(cls, text, arity, order=GREVLEX, domain=EXACT):
        """
        Parse the text serialization produced by str(). Variables are
        written as x1..xn, exponent `^1' may be omitted.
        """
        text = text.strip()
        if text == '0':
            return cls.zero(arity, order, domain)

        terms = []
        for chunk in text.split(' + '):
            coeff = 1
            exps = [0] * arity
            for factor in chunk.strip().split('*'):
                if not factor.startswith('x'):
                    coeff = parse_coefficient(factor, domain)
                    continue
                name, _, exp = factor.partition('^')
                index = int(name[1:]) - 1
                if not 0 <= index < arity:
                    raise UsageError("Variable `%s' out of range" % name)
                exps[index] += int(exp) if exp else 1
            terms.append((tuple(exps), coeff))
        return cls(terms, arity, order, domain)

    @property
    def arity(self):
        return self._element.ring.ngens

    @property
    def order(self):
        return self._order

    @property
    def domain(self):
        return self._domain

    @property
    def ring(self):
        return self._element.ring

    def terms(self):
        """Return (monomial, coefficient) pairs, descending in the order"""
        if self._sorted is None:
            self._sorted = tuple((mono, from_ground(coeff, self._domain))
                                 for mono, coeff in self._element.terms())
        return self._sorted

    def monomials(self):
        """Monomials in descending order"""
        return [mono for mono, _ in self.terms()]

    def coefficient(self, mono):
        """Coefficient of given monomial, zero when absent"""
        value = self._element.get(tuple(mono))
        if value is None:
            return to_coefficient(0, self._domain)
        return from_ground(value, self._domain)

    def __len__(self):
        return len(self._element)

    def __iter__(self):
        return iter(self.terms())

    def __bool__(self):
        return bool(self._element)

    __nonzero__ = __bool__

    def is_zero(self):
        return not self._element

    def is_constant(self):
        return self._element.is_ground

    def total_degree(self):
        """Highest total degree of a term, -1 for the zero polynomial"""
        return max([monomial_deg(mono) for mono in self._element] or [-1])

    def is_homogeneous(self):
        """True if all terms share the same total degree"""
        return len(set(monomial_deg(mono) for mono in self._element)) <= 1

    def variables(self):
        """Sorted indices of the variables occurring in the polynomial"""
        return sorted(set(index for mono in self._element
                          for index, exp in enumerate(mono) if exp))

    def leading_term(self):
        """Biggest (monomial, coefficient) pair in the polynomial order"""
        if not self._element:
            raise UsageError("Zero polynomial has no leading term")
        mono, coeff = self._element.LT
        return mono, from_ground(coeff, self._domain)

    def leading_monomial(self):
        if not self._element:
            raise UsageError("Zero polynomial has no leading term")
        return self._element.LM

    def leading_coefficient(self):
        return self.leading_term()[1]

    def monic(self):
        """Divide through by the leading coefficient"""
        if not self._element:
            raise UsageError("Zero polynomial has no leading term")
        return self._new(self._element.monic())

    def with_order(self, order):
        """Same polynomial, different monomial order"""
        if order == self._order:
            return self
        ring = poly_ring(self.arity, order, self._domain)
        return Poly._wrap(self._element.set_ring(ring), order, self._domain)

    def to_float(self):
        """Convert coefficients to floats"""
        ring = poly_ring(self.arity, self._order, FLOAT)
        terms = dict((mono, to_ground(float(coeff), FLOAT))
                     for mono, coeff in self.terms())
        return Poly._wrap(ring.from_dict(terms), self._order, FLOAT)

    def rem(self, divisors):
        """
        Remainder of the multivariate division by the divisors in the
        order of this polynomial; every term of the result is irreducible.
        Zero divisors are skipped.
        """
        elements = []
        for div in divisors:
            div = self._coerce(div)
            if not div.is_zero():
                elements.append(div._element)
        if not elements:
            return self
        return self._new(self._element.rem(elements))

    def _coerce(self, other):
        """
        Return other as a polynomial compatible with this one, or
        NotImplemented
        """
        if isinstance(other, Poly):
            if other.arity != self.arity:
                raise UsageError("Arity mismatch: %d vs %d" %
                                 (self.arity, other.arity))
            if other._domain != self._domain:
                raise UsageError("Domain mismatch: %s vs %s" %
                                 (self._domain, other._domain))
            return other.with_order(self._order)
        if isinstance(other, (numbers.Number, np.number)):
            return Poly.constant(other, self.arity, self._order,
                                 self._domain)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._new(self._element + other._element)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self._element)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._new(self._element - other._element)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            if not isinstance(other, (numbers.Number, np.number)):
                return NotImplemented
            scalar = to_ground(other, self._domain)
            return self._new(self._element.mul_ground(scalar))

        other = self._coerce(other)
        return self._new(self._element * other._element)

    __rmul__ = __mul__

    def __pow__(self, exponent):
        if not isinstance(exponent, numbers.Integral) or exponent < 0:
            raise UsageError("Exponent has to be a non-negative integer")
        return self._new(self._element ** int(exponent))

    def mul_term(self, mono, coeff):
        """Multiply by the single term coeff * mono"""
        return self._new(self._element.mul_term(
            (tuple(mono), to_ground(coeff, self._domain))))

    def __eq__(self, other):
        if isinstance(other, Poly):
            return (self.arity == other.arity and
                    self._domain == other._domain and
                    dict.__eq__(self._element, other._element))
        if isinstance(other, (numbers.Number, np.number)):
            if not self.is_constant():
                return False
            return self.coefficient((0,) * self.arity) == other
        return NotImplemented

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        # constants hash like the number they equal
        if self.is_constant():
            return hash(self.coefficient((0,) * self.arity))
        return hash((self.arity, self._domain,
                     frozenset(self._element.items())))

    def evaluate(self, point):
        """
        Value of the polynomial at point. Exact domain evaluates exactly,
        float points are refused there.
        """
        point = list(point)
        if len(point) != self.arity:
            raise UsageError("Point has %d coordinates, arity is %d" %
                             (len(point), self.arity))
        values = [to_ground(value, self._domain) for value in point]
        if not self._element:
            return to_coefficient(0, self._domain)
        return from_ground(self._element(*values), self._domain)

    def diff(self, var_index):
        """Formal partial derivative with respect to x_{var_index+1}"""
        if not 0 <= var_index < self.arity:
            raise UsageError("Variable index %d out of range" % var_index)
        return self._new(self._element.diff(self.ring.gens[var_index]))

    def substitute(self, assignments):
        """
        Replace some variables by values. assignments maps variable index to
        value; arity is kept, substituted variables simply vanish.
        """
        pairs = []
        for index, value in assignments.items():
            if not 0 <= index < self.arity:
                raise UsageError("Variable index %d out of range" % index)
            pairs.append((self.ring.gens[index],
                          to_ground(value, self._domain)))
        if not pairs:
            return self
        return self._new(self._element.subs(pairs))

    def univariate_coefficients(self, var_index):
        """
        Coefficients c_0..c_d of the polynomial seen as univariate in the
        given variable. Fails if other variables occur.
        """
        if any(index != var_index for index in self.variables()):
            raise UsageError("Polynomial is not univariate in x%d" %
                             (var_index + 1))
        terms = self.terms()
        degree = max([mono[var_index] for mono, _ in terms] or [0])
        coeffs = [to_coefficient(0, self._domain)] * (degree + 1)
        for mono, coeff in terms:
            coeffs[mono[var_index]] = coeff
        return coeffs

    def __str__(self):
        if not self._element:
            return '0'
        chunks = []
        for mono, coeff in self.terms():
            factors = [format_coefficient(coeff, self._domain)]
            factors.extend("x%d^%d" % (index + 1, exp)
                           for index, exp in enumerate(mono) if exp)
            chunks.append('*'.join(factors))
        return ' + '.join(chunks)

    def __repr__(self):
        return "Poly(%r, arity=%d, order=%r, domain=%r)" % (
            str(self), self.arity, self._order, self._domain)
