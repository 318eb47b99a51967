#!/usr/bin/env python
"""
Tests for unshuffle.homotopy module
"""
import itertools
import math
from unittest import TestCase, main

import numpy as np

from unshuffle import homotopy
from unshuffle import instance
from unshuffle import residual
from unshuffle import solver
from unshuffle.errors import UsageError
from unshuffle.polyring import FLOAT


def float_system(inst):
    A, y = inst.to_float().float_arrays()
    return residual.ResidualSystem.from_data(A, y)


class TestStack(TestCase):
    """
    Test start roots and stacked solves
    """

    def test_start_roots(self):
        """
        Test there are n! distinct roots of u_l^l = 1
        """
        for n in range(1, 5):
            roots = homotopy.start_roots(n)
            self.assertEqual(roots.shape, (math.factorial(n), n))
            for degree in range(1, n + 1):
                np.testing.assert_allclose(roots[:, degree - 1] ** degree,
                                           1.0, atol=1e-12)
            distinct = set(tuple(np.round(row, 9)) for row in roots)
            self.assertEqual(len(distinct), math.factorial(n))

    def test_solve_stack(self):
        """
        Test non-finite rows come back as NaN and the others are solved
        """
        matrices = np.array([[[2.0, 0.0], [0.0, 4.0]],
                             [[np.nan, 0.0], [0.0, 1.0]]])
        rhs = np.array([[[2.0], [2.0]], [[1.0], [1.0]]])
        result = homotopy.solve_stack(matrices, rhs)
        np.testing.assert_allclose(result[0, :, 0], [1.0, 0.5])
        self.assertTrue(np.all(np.isnan(result[1])))

    def test_singular_stack(self):
        """
        Test a singular matrix falls back to the pseudo-inverse
        """
        matrices = np.array([[[1.0, 1.0], [1.0, 1.0]],
                             [[1.0, 0.0], [0.0, 1.0]]])
        rhs = np.array([[[2.0], [2.0]], [[3.0], [4.0]]])
        result = homotopy.solve_stack(matrices, rhs)
        np.testing.assert_allclose(result[0, :, 0], [1.0, 1.0])
        np.testing.assert_allclose(result[1, :, 0], [3.0, 4.0])


class TestSquareSystem(TestCase):
    """
    Test the normalised square system
    """

    def test_true_point(self):
        """
        Test xi* solves every equation in normalised coordinates
        """
        inst = instance.generate(40, 3, 2, FLOAT)
        system = float_system(inst)
        square = homotopy.SquareSystem(system.A, system.target)
        point = np.array([inst.xi_star], dtype=complex) / square.kappa
        values, jacobian = square.evaluate(point)
        self.assertEqual(values.shape, (1, 3))
        self.assertEqual(jacobian.shape, (1, 3, 3))
        self.assertLess(np.max(np.abs(values)), 1e-10)
        self.assertLess(abs(square.last_equation(point)[0]), 1e-10)

    def test_jacobian(self):
        """
        Test the Jacobian against central differences
        """
        inst = instance.generate(12, 2, 3, FLOAT)
        system = float_system(inst)
        square = homotopy.SquareSystem(system.A, system.target)
        point = np.array([[0.3 + 0.1j, -0.7 + 0.2j]])
        _, jacobian = square.evaluate(point)
        step = 1e-6
        for var in range(2):
            shift = np.zeros((1, 2), dtype=complex)
            shift[0, var] = step
            ahead, _ = square.evaluate(point + shift)
            behind, _ = square.evaluate(point - shift)
            np.testing.assert_allclose((ahead - behind)[0] / (2 * step),
                                       jacobian[0, :, var], rtol=1e-6,
                                       atol=1e-8)

    def test_vanishing_measurements(self):
        """
        Test y = 0 cannot be normalised
        """
        A = np.eye(2)
        target = residual.target_power_sums(np.zeros(2), 3)
        self.assertRaises(UsageError, homotopy.SquareSystem, A, target)
        self.assertRaises(UsageError, homotopy.SquareSystem, A, target[:2])


class TestSquareRoots(TestCase):
    """
    Test path tracking to all roots of the square system
    """

    def test_generic(self):
        """
        Test one path per start root and xi* among the real endpoints
        """
        for m, seed in ((6, 1), (50, 2)):
            inst = instance.generate(m, 3, seed, FLOAT)
            roots = homotopy.square_roots(float_system(inst), seed=seed)
            self.assertEqual(roots.paths, 6)
            self.assertGreater(roots.count, 0)
            indices, points = roots.real_points()
            self.assertEqual(indices.shape[0], points.shape[0])
            errors = (np.linalg.norm(points - inst.xi_star, axis=1) /
                      np.linalg.norm(inst.xi_star))
            self.assertLess(errors.min(), 1e-6)

    def test_tightness(self):
        """
        Test A = [I; 0] gives n! real roots, the orderings of 1..n
        """
        for n in (2, 3):
            inst = instance.tightness_example(n)
            roots = homotopy.square_roots(float_system(inst))
            self.assertEqual(roots.count, math.factorial(n))
            _, points = roots.real_points()
            self.assertEqual(points.shape[0], math.factorial(n))
            found = set(tuple(int(round(value)) for value in point)
                        for point in points)
            self.assertEqual(found, set(itertools.permutations(
                range(1, n + 1))))
            np.testing.assert_allclose(np.sort(points, axis=1),
                                       np.tile(np.arange(1.0, n + 1),
                                               (points.shape[0], 1)),
                                       atol=1e-8)
            # the extra equation holds at every one of them
            self.assertLess(np.max(roots.last), 1e-8)

    def test_determinism(self):
        """
        Test equal seeds track equal paths
        """
        system = float_system(instance.generate(10, 2, 4, FLOAT))
        first = homotopy.square_roots(system, seed=3)
        second = homotopy.square_roots(system, seed=3)
        np.testing.assert_array_equal(first.points, second.points)
        self.assertEqual(first.gamma, second.gamma)
        self.assertNotEqual(homotopy.square_roots(system, seed=4).gamma,
                            first.gamma)


class TestBaselineTightness(TestCase):
    """
    Test solving the square system first and filtering afterwards
    """

    def test_all_roots_survive(self):
        """
        Test every real root of the tight example passes the filter
        """
        system = float_system(instance.tightness_example(3))
        report = solver.solve_square_then_filter(system)
        self.assertEqual(report.notes[-1],
                         "6 of 6 paths finished, 6 real roots")
        self.assertEqual(report.converged_starts, 6)
        # the converged roots disagree, which flags the lost uniqueness
        self.assertGreater(report.agreement, 0.5)
        self.assertEqual(sorted(int(round(value))
                                for value in report.xi_hat), [1, 2, 3])


if __name__ == "__main__":
    main()
