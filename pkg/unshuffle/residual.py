"""
Numeric evaluation of the power-sum system

    q_l(x) = p_l(A x) - p_l(y),    l = 1, ..., n+1

and of its Jacobian, in O(m n) per point. Nothing is expanded symbolically:
the inner products a_i . x are computed once and their powers 1..n+1 are
accumulated by iterated multiplication, shared between the residual and the
Jacobian. Points are evaluated in stacks (one row per point); every row is
computed on its own, so a point gets the same values whatever stack it is
part of.
"""
import numpy as np

from unshuffle.errors import NonFiniteData, UsageError
from unshuffle.logger import get_logger

LOG = get_logger(__name__)


def _powers(values, count):
    """
    Array whose entry [..., k, :] holds values**(k+1) for values of shape
    (..., m). The last axis is contiguous, so sums along it are pairwise.
    """
    result = np.empty(values.shape[:-1] + (count, values.shape[-1]))
    if count:
        result[..., 0, :] = values
    for row in range(1, count):
        result[..., row, :] = result[..., row - 1, :] * values
    return result


def target_power_sums(y, count):
    """
    (p_1(y), ..., p_count(y)) summed over y sorted ascending, so the result
    does not depend on the order of y, bit for bit.
    """
    return _powers(np.sort(np.asarray(y, dtype=float)), count).sum(axis=1)


class ResidualSystem(object):
    """
    Compiled, immutable evaluator of the scaled residuals
    r_l = scale_l * (sum_i (a_i . x)^l - target_l).
    """

    def __init__(self, A, target, scale=None, sorted_y=None):
        """
        Initialization. A is m x n, target holds n+1 power sums, scale n+1
        positive weights (all ones by default). sorted_y, when known, is
        the multiset of measurements in ascending order.
        """
        A = np.array(A, dtype=float)
        if A.ndim != 2 or A.shape[1] < 1:
            raise UsageError("A has to be a non-empty matrix")
        m, n = A.shape
        if m < n:
            raise UsageError("m >= n required (got m=%d, n=%d)" % (m, n))
        if not np.all(np.isfinite(A)):
            raise NonFiniteData("A has non-finite entries")

        target = np.array(target, dtype=float)
        if target.shape != (n + 1,):
            raise UsageError("Expected %d targets, got %s" %
                             (n + 1, target.shape))
        if not np.all(np.isfinite(target)):
            raise NonFiniteData("Targets are not finite")

        if scale is None:
            scale = np.ones(n + 1)
        scale = np.array(scale, dtype=float)
        if (scale.shape != (n + 1,) or not np.all(np.isfinite(scale)) or
                not np.all(scale > 0)):
            raise UsageError("Scales have to be n+1 positive finite numbers")

        arrays = [A, target, scale]
        if sorted_y is not None:
            sorted_y = np.sort(np.array(sorted_y, dtype=float))
            if sorted_y.shape != (m,):
                raise UsageError("y has to have one entry per row of A")
            arrays.append(sorted_y)
        for array in arrays:
            array.flags.writeable = False
        self.A = A
        self.target = target
        self.scale = scale
        self.sorted_y = sorted_y
        self._orders = np.arange(1, n + 2, dtype=float)

    @classmethod
    def from_data(cls, A, y, scale=None):
        """System for the matrix A and the (shuffled) measurements y"""
        A = np.asarray(A, dtype=float)
        y = np.asarray(y, dtype=float)
        if A.ndim != 2 or y.shape != (A.shape[0],):
            raise UsageError("y has to have one entry per row of A")
        if not np.all(np.isfinite(y)):
            raise NonFiniteData("y has non-finite entries")
        return cls(A, target_power_sums(y, A.shape[1] + 1), scale,
                   sorted_y=y)

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    def rescaled(self, x0):
        """
        Same system with the default scales 1 / max(1, m c^l), c being the
        median of |a_i . x0|.
        """
        spread = float(np.median(np.abs(self.A.dot(x0))))
        with np.errstate(over='ignore'):
            magnitude = self.m * spread ** self._orders
        scale = 1.0 / np.maximum(1.0, magnitude)
        if not np.all(np.isfinite(scale)) or not np.all(scale > 0):
            LOG.warning("Cannot estimate scales at the initial point, "
                        "keeping unit scales")
            return self
        LOG.debug("Residual scales %s (c=%g)", scale, spread)
        return ResidualSystem(self.A, self.target, scale, self.sorted_y)

    def _stacked_powers(self, points):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.n:
            raise UsageError("Points have to have %d coordinates" % self.n)
        # one (1 x n) by (n x m) product per row
        values = np.matmul(points[:, np.newaxis, :], self.A.T)[:, 0, :]
        return _powers(values, self.n + 1)

    def _residual(self, powers):
        return self.scale * (powers.sum(axis=-1) - self.target)

    def _jacobian(self, powers):
        lowered = np.empty_like(powers)
        lowered[:, 0] = 1.0
        lowered[:, 1:] = powers[:, :-1]
        return (np.matmul(lowered, self.A) *
                (self.scale * self._orders)[:, np.newaxis])

    def evaluate_many(self, points):
        """
        Residuals (k x (n+1)) and Jacobians (k x (n+1) x n) of k points
        given as the rows of a k x n array. Overflow shows up as non-finite
        entries; it is up to the caller to reject such points.
        """
        with np.errstate(over='ignore', invalid='ignore'):
            powers = self._stacked_powers(points)
            return self._residual(powers), self._jacobian(powers)

    def _single(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise UsageError("Point has to have %d coordinates" % self.n)
        return x[np.newaxis]

    def residual(self, x):
        """Scaled residual vector of length n+1"""
        return self.evaluate_many(self._single(x))[0][0]

    def jacobian(self, x):
        """(n+1) x n matrix J_lj = scale_l * l * sum_i (a_i.x)^(l-1) a_ij"""
        return self.evaluate_many(self._single(x))[1][0]

    def evaluate(self, x):
        """Residual and Jacobian at x from one set of powers"""
        resid, jac = self.evaluate_many(self._single(x))
        return resid[0], jac[0]

    def noise_floor(self, x, sigma):
        """
        Predicted norm of the scaled residual caused by i.i.d. noise of
        standard deviation sigma on y, linearised at x:
        |scale_l * sigma * l * sqrt(sum_i (a_i.x)^(2(l-1)))|.
        """
        if sigma <= 0:
            return 0.0
        with np.errstate(over='ignore', invalid='ignore'):
            powers = self._stacked_powers(self._single(x))[0]
            lowered = np.ones_like(powers)
            lowered[1:] = powers[:-1]
            spread = np.sqrt((lowered * lowered).sum(axis=1))
            floor = self.scale * sigma * self._orders * spread
        return float(np.linalg.norm(floor))


def compile_system(instance):
    """
    Compile the instance into a ResidualSystem with unit scales. Exact
    instances are converted to floats first.
    """
    if instance.n < 1 or instance.m < instance.n:
        raise UsageError("m >= n required (got m=%d, n=%d)" %
                         (instance.m, instance.n))
    A, y = instance.to_float().float_arrays()
    return ResidualSystem.from_data(A, y)
