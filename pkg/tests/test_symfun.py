#!/usr/bin/env python
"""
Tests for unshuffle.symfun module
"""
from fractions import Fraction
from unittest import TestCase, main
import random

from unshuffle import symfun
from unshuffle.errors import UsageError
from unshuffle.polyring import Poly


def random_rationals(rng, size):
    return [Fraction(rng.randint(-50, 50), rng.randint(1, 9))
            for _ in range(size)]


class TestPowerSums(TestCase):
    """
    Test power sums
    """

    def test_power_sum(self):
        """
        Test p_l for rationals and floats
        """
        self.assertEqual(symfun.power_sum(2, [1, 2, 3]), 14)
        self.assertEqual(symfun.power_sum(1, [Fraction(1, 2)] * 2), 1)
        self.assertEqual(symfun.power_sum(3, [0.5, 1.0]), 1.125)
        self.assertEqual(symfun.power_sums([1, 2, 3], 3), [6, 14, 36])
        self.assertRaises(UsageError, symfun.power_sum, 0, [1])

    def test_permutation_invariance(self):
        """
        Test power sums do not depend on the order of the values
        """
        values = random_rationals(random.Random(3), 7)
        shuffled = list(reversed(values))
        self.assertEqual(symfun.power_sums(values, 8),
                         symfun.power_sums(shuffled, 8))


class TestNewton(TestCase):
    """
    Test Newton's identities
    """

    def test_known_values(self):
        """
        Test conversions for (1, 2, 3)
        """
        self.assertEqual(symfun.elementary_symmetric([1, 2, 3]), [6, 11, 6])
        self.assertEqual(symfun.newton_p_to_e([6, 14, 36]), [6, 11, 6])
        self.assertEqual(symfun.newton_e_to_p([6, 11, 6]), [6, 14, 36])

    def test_round_trip(self):
        """
        Test p -> e -> p is exact and agrees with direct expansion
        """
        rng = random.Random(10)
        for _ in range(100):
            values = random_rationals(rng, rng.randint(1, 10))
            psums = symfun.power_sums(values, len(values))
            esyms = symfun.newton_p_to_e(psums)
            self.assertEqual(esyms, symfun.elementary_symmetric(values))
            self.assertEqual(symfun.newton_e_to_p(esyms), psums)

    def test_floats_refused(self):
        """
        Test Newton's identities are exact only
        """
        self.assertRaises(UsageError, symfun.newton_p_to_e, [1.0, 2.0])
        self.assertRaises(UsageError, symfun.newton_e_to_p, [1.5])

    def test_empty(self):
        """
        Test empty input
        """
        self.assertEqual(symfun.newton_p_to_e([]), [])
        self.assertEqual(symfun.elementary_symmetric([]), [])


class TestPullback(TestCase):
    """
    Test p_l(A x) expansion
    """

    def test_expand(self):
        """
        Test expansion for a small matrix
        """
        matrix = [[1, 0], [0, 1], [1, 1]]
        x1 = Poly.variable(0, 2)
        x2 = Poly.variable(1, 2)
        self.assertEqual(symfun.expand_power_sum_pullback(matrix, 1),
                         2 * x1 + 2 * x2)
        self.assertEqual(symfun.expand_power_sum_pullback(matrix, 2),
                         2 * x1 ** 2 + 2 * x1 * x2 + 2 * x2 ** 2)
        cube = symfun.expand_power_sum_pullback(matrix, 3)
        self.assertTrue(cube.is_homogeneous())
        self.assertEqual(cube.total_degree(), 3)

    def test_value(self):
        """
        Test the expansion agrees with direct evaluation
        """
        rng = random.Random(5)
        matrix = [random_rationals(rng, 3) for _ in range(4)]
        point = random_rationals(rng, 3)
        for ell in range(1, 5):
            poly = symfun.expand_power_sum_pullback(matrix, ell)
            image = [sum(a * x for a, x in zip(row, point))
                     for row in matrix]
            self.assertEqual(poly.evaluate(point),
                             symfun.power_sum(ell, image))

    def test_float_matrix(self):
        """
        Test float matrices give float polynomials
        """
        poly = symfun.expand_power_sum_pullback([[0.5], [1.5]], 2)
        self.assertEqual(poly.domain, "float")
        self.assertEqual(poly.coefficient((2,)), 2.5)

    def test_bad_matrix(self):
        """
        Test empty and ragged matrices
        """
        self.assertRaises(UsageError, symfun.expand_power_sum_pullback, [],
                          1)
        self.assertRaises(UsageError, symfun.expand_power_sum_pullback,
                          [[1, 2], [3]], 1)
        self.assertRaises(UsageError, symfun.expand_power_sum_pullback,
                          [[1]], 0)


if __name__ == "__main__":
    main()
