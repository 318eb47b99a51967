#!/usr/bin/env python
"""
Tests for unshuffle.exactalg module
"""
from fractions import Fraction
from unittest import TestCase, main
import math

from unshuffle import exactalg
from unshuffle import instance
from unshuffle import polyring
from unshuffle.errors import CapExceeded, PivotSingular, TheoremViolation
from unshuffle.errors import UsageError
from unshuffle.instance import Instance
from unshuffle.polyring import Poly


def variables(arity, order=polyring.GREVLEX):
    return [Poly.variable(index, arity, order) for index in range(arity)]


class TestReduction(TestCase):
    """
    Test normal forms and S-polynomials
    """

    def test_normal_form(self):
        """
        Test division remainder
        """
        x1, x2 = variables(2)
        self.assertEqual(exactalg.normal_form(x1 ** 2 + x2, [x1 - 1]),
                         x2 + 1)
        self.assertTrue(exactalg.normal_form(x1 * x2 - x2,
                                             [x1 - 1]).is_zero())
        self.assertEqual(exactalg.normal_form(x2, []), x2)
        self.assertEqual(exactalg.normal_form(x2 + 3, [x1]), x2 + 3)

    def test_s_polynomial(self):
        """
        Test leading terms cancel
        """
        x1, x2 = variables(2)
        spoly = exactalg.s_polynomial(2 * x1 ** 2 + x2, x1 * x2 - 1)
        self.assertEqual(spoly, Fraction(1, 2) * x2 ** 2 + x1)


class TestGroebner(TestCase):
    """
    Test Buchberger's algorithm
    """

    def assertGroebner(self, generators, result):
        """Every generator and S-polynomial reduces to zero"""
        basis = result.basis
        for poly in generators:
            self.assertTrue(exactalg.normal_form(poly, basis).is_zero())
        for left in range(len(basis)):
            for right in range(left + 1, len(basis)):
                spoly = exactalg.s_polynomial(basis[left], basis[right])
                self.assertTrue(exactalg.normal_form(spoly, basis).is_zero())
        for poly in basis:
            self.assertEqual(poly.leading_coefficient(), 1)

    def test_point(self):
        """
        Test an ideal of a single point
        """
        x1, x2 = variables(2)
        result = exactalg.groebner([x1 - 1, x2 - 2])
        self.assertEqual(set(result.basis), set([x1 - 1, x2 - 2]))
        self.assertEqual(result.quotient_dim, 1)
        self.assertEqual(result.standard_monomials, [(0, 0)])
        self.assertTrue(result.is_linear())

    def test_monomial_ideal(self):
        """
        Test standard monomials of <x1^2, x1 x2, x2^2>
        """
        x1, x2 = variables(2)
        result = exactalg.groebner([x1 ** 2, x1 * x2, x2 ** 2])
        self.assertEqual(result.quotient_dim, 3)
        self.assertEqual(result.standard_monomials,
                         [(1, 0), (0, 1), (0, 0)])

    def test_unit_ideal(self):
        """
        Test inconsistent generators give the basis {1}
        """
        x1, _ = variables(2)
        result = exactalg.groebner([x1, x1 - 1])
        self.assertEqual(result.basis, [Poly.constant(1, 2)])
        self.assertEqual(result.quotient_dim, 0)
        self.assertEqual(result.standard_monomials, [])
        self.assertTrue(result.is_unit_ideal())

    def test_positive_dimension(self):
        """
        Test ideals with infinitely many standard monomials
        """
        x1, x2 = variables(2)
        result = exactalg.groebner([x1 * x2])
        self.assertEqual(result.quotient_dim, exactalg.INFINITE)
        self.assertFalse(result.is_zero_dimensional())
        self.assertEqual(result.standard_monomials, [])

    def test_needs_new_elements(self):
        """
        Test an ideal whose basis is bigger than its generating set
        """
        x1, x2, x3 = variables(3)
        generators = [x1 ** 2 - x2, x1 ** 3 - x3]
        result = exactalg.groebner(generators)
        self.assertGroebner(generators, result)
        self.assertTrue(len(result.basis) > 2)

    def test_lex_order(self):
        """
        Test lex basis of a circle and a line is triangular
        """
        x1, x2 = variables(2, polyring.LEX)
        generators = [x1 ** 2 + x2 ** 2 - 5, x1 - x2 + 1]
        result = exactalg.groebner(exactalg.IdealBasis(generators,
                                                       polyring.LEX))
        self.assertGroebner(generators, result)
        self.assertEqual(result.quotient_dim, 2)
        # x2^2 - x2 - 2 = (x2 - 2)(x2 + 1)
        self.assertTrue(x2 ** 2 - x2 - 2 in result.basis)

    def test_power_sum_system(self):
        """
        Test the square system of a random instance
        """
        inst = instance.generate(4, 2, 1)
        ideal = exactalg.square_system(inst)
        result = exactalg.groebner(ideal)
        self.assertGroebner(ideal.generators, result)
        self.assertEqual(result.quotient_dim, 2)

    def test_unique_basis(self):
        """
        Test reduced bases do not depend on the generator order
        """
        inst = instance.generate(5, 2, 2)
        generators = exactalg.augmented_system(inst).generators
        first = exactalg.groebner(generators)
        second = exactalg.groebner(list(reversed(generators)))
        self.assertEqual(first.basis, second.basis)

    def test_power_sum_ideal(self):
        """
        Test p_1(A x), p_2(A x) only vanish together at the origin
        """
        A = instance.generate(4, 2, 3).A
        result = exactalg.groebner(exactalg.power_sum_ideal(A))
        self.assertEqual(result.quotient_dim, 2)
        degenerate = exactalg.power_sum_ideal([[1, 1], [1, 1]])
        self.assertEqual(exactalg.groebner(degenerate).quotient_dim,
                         exactalg.INFINITE)

    def test_caps(self):
        """
        Test resource caps abort the computation
        """
        x1, x2 = variables(2)
        self.assertRaises(CapExceeded, exactalg.groebner, [x1 ** 2 - x2],
                          exactalg.GroebnerCaps(max_degree=1))
        self.assertRaises(CapExceeded, exactalg.groebner, [x1 - 1, x2 - 1],
                          exactalg.GroebnerCaps(max_basis=1))
        big = x1 - Fraction(2 ** 100)
        self.assertRaises(CapExceeded, exactalg.groebner, [big],
                          exactalg.GroebnerCaps(max_bits=64))

    def test_bad_ideal(self):
        """
        Test generator checks
        """
        x1, _ = variables(2)
        self.assertRaises(UsageError, exactalg.IdealBasis, [])
        self.assertRaises(UsageError, exactalg.IdealBasis, [Poly.zero(2)])
        self.assertRaises(UsageError, exactalg.IdealBasis,
                          [x1, Poly.variable(0, 3)])
        self.assertRaises(UsageError, exactalg.IdealBasis, [x1.to_float()])
        self.assertRaises(UsageError, exactalg.groebner, [])


class TestUnivariate(TestCase):
    """
    Test univariate helpers
    """

    def test_divmod(self):
        """
        Test polynomial division
        """
        # x^2 - 1 = (x + 1)(x - 1)
        self.assertEqual(exactalg.univariate_divmod([-1, 0, 1], [-1, 1]),
                         ([1, 1], []))
        self.assertEqual(exactalg.univariate_divmod([1, 0, 1], [0, 1]),
                         ([0, 1], [1]))
        self.assertRaises(ZeroDivisionError, exactalg.univariate_divmod,
                          [1], [0])

    def test_gcd(self):
        """
        Test monic gcd
        """
        self.assertEqual(exactalg.univariate_gcd([-1, 0, 1], [-2, 2]),
                         [-1, 1])
        self.assertEqual(exactalg.univariate_gcd([1, 1], [2, 1]), [1])
        self.assertEqual(exactalg.univariate_gcd([], [4, 2]), [2, 1])
        self.assertEqual(exactalg.univariate_gcd([], [0]), [])


class TestVerify(TestCase):
    """
    Test the exact checks on power-sum systems
    """

    def test_square_count(self):
        """
        Test the square system has n! solutions
        """
        for m, n, seed in ((3, 1, 1), (4, 2, 2), (6, 2, 3), (6, 3, 4)):
            inst = instance.generate(m, n, seed)
            self.assertEqual(exactalg.verify_square_count(inst),
                             math.factorial(n))

    def test_unique_root(self):
        """
        Test the augmented system has xi_star as its only root
        """
        for m, n, seed in ((2, 1, 1), (4, 2, 5), (5, 2, 6), (7, 2, 7),
                           (6, 3, 8)):
            inst = instance.generate(m, n, seed)
            result = exactalg.verify_unique_root(inst)
            self.assertEqual(result.status, exactalg.UNIQUE)
            self.assertEqual(result.point, tuple(inst.xi_star))
            self.assertEqual(result.quotient_dim, 1)
            self.assertIsNone(result.multiplicity_note)
            self.assertTrue(all(isinstance(value, Fraction)
                                for value in result.point))
            for poly in exactalg.augmented_system(inst):
                self.assertEqual(poly.evaluate(result.point), 0)

    def test_no_solution(self):
        """
        Test a perturbed y gives an empty variety, not an error
        """
        inst = instance.perturb(instance.generate(5, 2, 9), 0, 1)
        result = exactalg.verify_unique_root(inst)
        self.assertEqual(result.status, exactalg.NO_SOLUTION)
        self.assertIsNone(result.point)
        self.assertEqual(result.quotient_dim, 0)

    def test_two_points(self):
        """
        Test a symmetric design with two roots is a violation
        """
        inst = Instance([[1, 0], [0, 1]], [1, 2], xi_star=[1, 2])
        self.assertRaises(TheoremViolation, exactalg.verify_unique_root,
                          inst)

    def test_tightness(self):
        """
        Test A = [I; 0] with y = (1..n, 0..) reaches n! square roots, all
        of which also solve the augmented system
        """
        for n, zero_rows in ((2, 0), (2, 2), (3, 0), (3, 1)):
            inst = instance.tightness_example(n, zero_rows)
            self.assertEqual(exactalg.verify_square_count(inst),
                             math.factorial(n))
            self.assertRaises(TheoremViolation,
                              exactalg.verify_unique_root, inst)
            for poly in exactalg.augmented_system(inst):
                self.assertEqual(poly.evaluate(inst.xi_star[::-1]), 0)

    def test_multiplicity(self):
        """
        Test a double root is accepted with a note
        """
        inst = Instance([[1, 0], [0, 1]], [1, 1], xi_star=[1, 1])
        result = exactalg.verify_unique_root(inst)
        self.assertEqual(result.point, (Fraction(1), Fraction(1)))
        self.assertEqual(result.quotient_dim, 2)
        self.assertEqual(result.multiplicity_note, "multiplicity 2 > 1")

    def test_preconditions(self):
        """
        Test float instances and big n are refused
        """
        floated = instance.generate(4, 2, 1, polyring.FLOAT)
        self.assertRaises(UsageError, exactalg.verify_square_count, floated)
        big = instance.generate(4, 4, 1)
        self.assertRaises(CapExceeded, exactalg.verify_unique_root, big)

    def test_record(self):
        """
        Test JSON record of a verification
        """
        inst = instance.generate(4, 2, 5)
        result = exactalg.verify_unique_root(inst)
        record = exactalg.verification_record(
            inst, quotient_dim=result.quotient_dim,
            unique_root=result.point, wall_time=0.5)
        self.assertEqual(sorted(record),
                         ['m', 'multiplicity_note', 'n', 'quotient_dim',
                          'seed', 'unique_root', 'wall_time'])
        self.assertEqual(record['unique_root'],
                         [polyring.format_coefficient(value, polyring.EXACT)
                          for value in inst.xi_star])


class TestDeterminantal(TestCase):
    """
    Test the linear forms vanishing on y = A x
    """

    def test_small(self):
        """
        Test the form y1 + y2 - y3
        """
        y1, y2, y3 = variables(3)
        forms = exactalg.determinantal_linear_basis([[1, 0], [0, 1], [1, 1]])
        self.assertEqual(forms, [y1 + y2 - y3])

    def test_square(self):
        """
        Test m = n gives no forms
        """
        self.assertEqual(exactalg.determinantal_linear_basis([[1, 2],
                                                              [3, 4]]), [])

    def test_vanishing(self):
        """
        Test every form composed with y = A x is zero
        """
        A = instance.generate(5, 2, 3).A
        forms = exactalg.determinantal_linear_basis(A)
        self.assertEqual(len(forms), 3)
        for index, form in enumerate(forms):
            lead = [0] * 5
            lead[index] = 1
            self.assertEqual(form.leading_monomial(), tuple(lead))
            self.assertEqual(form.leading_coefficient(), 1)
            self.assertTrue(set(form.variables()) <=
                            set([index, 3, 4]))
            for col in range(2):
                self.assertEqual(sum(form.coefficient(
                    tuple(1 if pos == row else 0 for pos in range(5))) *
                    A[row][col] for row in range(5)), 0)

    def test_singular_block(self):
        """
        Test a singular bottom block is reported
        """
        self.assertRaises(PivotSingular, exactalg.determinantal_linear_basis,
                          [[1, 2], [1, 1], [1, 1]])
        self.assertRaises(UsageError, exactalg.determinantal_linear_basis,
                          [[1, 2]])


if __name__ == "__main__":
    main()
