"""
Complex roots of the square power-sum system q_1 = ... = q_n = 0 by
total-degree homotopy continuation.

The start system u_l^l - 1 = 0 (l = 1..n) has n! roots, all combinations of
roots of unity, which is also the Bezout number of the target system. For
generic A the target has no solutions at infinity (p_1(A x), ..., p_n(A x)
have no common nonzero root), so with a random complex gamma every path of

    H(u, t) = (1 - t) gamma G(u) + t F(u)

stays regular on [0, 1) and ends in a distinct root of F. All paths are
tracked at once in numpy stacks, each with its own step size: an Euler
predictor along the tangent, a few Newton corrections, the step halved on
failure and doubled after a run of successes.

Evaluation costs O(P m n) per step for P live paths, so the work grows
linearly with the number of measurements m.
"""
import itertools
import math

import numpy as np

from unshuffle.errors import UsageError
from unshuffle.logger import get_logger

LOG = get_logger(__name__)

GAMMA_KEY = 5
START_STEP = 0.02
MAX_STEP = 0.1
MIN_STEP = 1e-9
GROW_AFTER = 3
CORRECTOR_STEPS = 3
CORRECTOR_TOL = 1e-8
MAX_CORRECTION = 0.1
MAX_ROUNDS = 4000
ENDGAME_STEPS = 4
REAL_TOLERANCE = 1e-6

TRACKING, FINISHED, FAILED = 0, 1, 2


def solve_stack(matrices, rhs):
    """
    Solve matrices[k] v = rhs[k] for a stack of square systems (rhs has a
    trailing axis of length 1). Entries with non-finite data come back as
    NaN; if some matrix is singular, pseudo-inverses are used instead.
    """
    result = np.full(rhs.shape, np.nan,
                     dtype=np.result_type(matrices, rhs, float))
    finite = (np.all(np.isfinite(matrices), axis=(1, 2)) &
              np.all(np.isfinite(rhs), axis=(1, 2)))
    if finite.any():
        try:
            result[finite] = np.linalg.solve(matrices[finite], rhs[finite])
        except np.linalg.LinAlgError:
            result[finite] = np.matmul(np.linalg.pinv(matrices[finite]),
                                       rhs[finite])
    return result


def start_roots(n):
    """The n! roots of u_l^l = 1, l = 1..n, one per row"""
    axes = [np.exp(2j * np.pi * np.arange(degree) / degree)
            for degree in range(1, n + 1)]
    return np.array(list(itertools.product(*axes)), dtype=complex)


class SquareSystem(object):
    """
    q_1 .. q_{n+1} in normalised coordinates u = x / kappa, equation l
    divided by m tau^l. tau is the root mean square of y, and kappa gives
    the rows of the rescaled matrix a unit mean square entry, so the root
    sits at |u| of order one.
    """

    def __init__(self, A, target):
        A = np.asarray(A, dtype=float)
        target = np.asarray(target, dtype=float)
        m, n = A.shape
        if target.shape != (n + 1,):
            raise UsageError("Expected %d targets, got %s" %
                             (n + 1, target.shape))
        tau = math.sqrt(max(target[1], 0.0) / m)
        frobenius = float(np.linalg.norm(A))
        if not (tau > 0 and frobenius > 0):
            raise UsageError("Cannot normalise: all measurements vanish")

        factor = math.sqrt(m * n) / frobenius
        self.m = m
        self.n = n
        self.kappa = tau * factor
        self._rows = (A * factor).astype(complex)
        self._cols = np.ascontiguousarray(self._rows.T)
        self.targets = target / (m * tau ** np.arange(1, n + 2))

    def evaluate(self, points):
        """
        Values (P x n) and Jacobians (P x n x n) of q_1..q_n at the rows of
        the complex array points
        """
        inner = points.dot(self._cols)
        count = points.shape[0]
        values = np.empty((count, self.n), dtype=complex)
        jacobian = np.empty((count, self.n, self.n), dtype=complex)
        power = np.ones_like(inner)
        for order in range(1, self.n + 1):
            jacobian[:, order - 1] = order * power.dot(self._rows) / self.m
            power = power * inner
            values[:, order - 1] = (power.mean(axis=1) -
                                    self.targets[order - 1])
        return values, jacobian

    def last_equation(self, points):
        """Normalised q_{n+1} at the rows of points"""
        inner = points.dot(self._cols)
        return (inner ** (self.n + 1)).mean(axis=1) - self.targets[self.n]


def _homotopy(square, gamma, points, time):
    """H, dH/du and dH/dt at the given points and per-row times"""
    values, jacobian = square.evaluate(points)
    degrees = np.arange(1, square.n + 1)
    start = points ** degrees - 1.0
    slope = degrees * points ** (degrees - 1)

    weight = ((1.0 - time) * gamma)[:, np.newaxis]
    value = weight * start + time[:, np.newaxis] * values
    jacobian = time[:, np.newaxis, np.newaxis] * jacobian
    diagonal = np.arange(square.n)
    jacobian[:, diagonal, diagonal] += weight * slope
    return value, jacobian, values - gamma * start


def track(square, gamma, points=None):
    """
    Follow every start root from t = 0 to t = 1. Returns the endpoints and
    a mask of the paths that got there; a path fails when its step drops
    below MIN_STEP or the round budget runs out.
    """
    if points is None:
        points = start_roots(square.n)
    points = np.array(points, dtype=complex)
    count = points.shape[0]
    time = np.zeros(count)
    step = np.full(count, START_STEP)
    streak = np.zeros(count, dtype=int)
    state = np.full(count, TRACKING)

    with np.errstate(all='ignore'):
        for _ in range(MAX_ROUNDS):
            rows = np.flatnonzero(state == TRACKING)
            if not rows.size:
                break
            here = time[rows]
            ahead = np.minimum(here + step[rows], 1.0)

            _, jacobian, speed = _homotopy(square, gamma, points[rows], here)
            tangent = -solve_stack(jacobian, speed[..., np.newaxis])[..., 0]
            guess = points[rows] + (ahead - here)[:, np.newaxis] * tangent

            first = None
            for _ in range(CORRECTOR_STEPS):
                value, jacobian, _ = _homotopy(square, gamma, guess, ahead)
                delta = solve_stack(jacobian, value[..., np.newaxis])[..., 0]
                guess = guess - delta
                size = np.linalg.norm(delta, axis=1)
                if first is None:
                    first = size
            bound = 1.0 + np.linalg.norm(guess, axis=1)
            good = (np.isfinite(size) & (size <= CORRECTOR_TOL * bound) &
                    (first <= MAX_CORRECTION * bound))

            moved = rows[good]
            points[moved] = guess[good]
            time[moved] = ahead[good]
            streak[moved] += 1
            grown = moved[streak[moved] >= GROW_AFTER]
            step[grown] = np.minimum(2.0 * step[grown], MAX_STEP)
            streak[grown] = 0
            state[moved[time[moved] >= 1.0]] = FINISHED

            stuck = rows[~good]
            step[stuck] *= 0.5
            streak[stuck] = 0
            state[stuck[step[stuck] < MIN_STEP]] = FAILED
    state[state == TRACKING] = FAILED
    return points, state == FINISHED


def newton(square, points, steps=ENDGAME_STEPS):
    """Newton iterations on q_1..q_n; a row keeps its last finite value"""
    points = np.array(points, dtype=complex)
    with np.errstate(all='ignore'):
        for _ in range(steps):
            values, jacobian = square.evaluate(points)
            delta = solve_stack(jacobian, values[..., np.newaxis])[..., 0]
            moved = points - delta
            finite = np.all(np.isfinite(moved), axis=1)
            points[finite] = moved[finite]
    return points


class SquareRoots(object):
    """Endpoints of the tracked paths, in the coordinates of x"""

    def __init__(self, points, finished, last, gamma):
        self.points = points
        self.finished = finished
        self.last = last
        self.gamma = gamma

    @property
    def paths(self):
        return self.points.shape[0]

    @property
    def count(self):
        """Number of paths that reached t = 1"""
        return int(self.finished.sum())

    def real_points(self, tolerance=REAL_TOLERANCE):
        """
        Path indices and real parts of the finished endpoints whose
        imaginary part is below tolerance relative to their size
        """
        size = np.linalg.norm(self.points, axis=1)
        imaginary = np.linalg.norm(self.points.imag, axis=1)
        keep = self.finished & (imaginary <= tolerance * np.maximum(size,
                                                                    1e-300))
        indices = np.flatnonzero(keep)
        return indices, self.points[indices].real.copy()


def square_roots(system, seed=0):
    """
    Every complex root of q_1 = ... = q_n = 0 of the residual system (its
    scales are irrelevant here), by continuation from the roots of unity.
    gamma is drawn from the seed, so equal seeds track equal paths.
    """
    square = SquareSystem(system.A, system.target)
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=(int(seed), GAMMA_KEY))))
    gamma = np.exp(2j * np.pi * rng.random())

    endpoints, finished = track(square, gamma)
    endpoints = newton(square, endpoints)
    with np.errstate(all='ignore'):
        last = np.abs(square.last_equation(endpoints))
    LOG.debug("%d of %d paths finished", finished.sum(), finished.size)
    return SquareRoots(square.kappa * endpoints, finished, last, gamma)
