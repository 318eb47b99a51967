"""
Numeric recovery of xi* from the augmented power-sum system.

Every point with zero residual on the n+1 equations q_1 = ... = q_{n+1} = 0
is xi* itself for generic data, so a Levenberg-Marquardt descent that
drives the residual to zero is accepted without further checks; this is the
"unique-root" certificate. Afterwards the correspondence is recovered by
sorting A xi_hat against y, and xi is refitted by ordinary least squares.

Descents start from three kinds of points:

- square-system seeds: for small n, the real roots of the first n
  equations, found by homotopy continuation (unshuffle.homotopy). xi* is
  one of them, and noise moves it only slightly;
- seeded random points of scale start_radius |y| / sigma_min(A);
- in restart rounds, random points on the set where q_1 and q_2 vanish,
  and the best iterates of the previous round moved by sorted matching
  (match the ranks of A x to y, then solve the least squares problem).

Rounds are repeated with fresh streams until a certificate is reached or
the round budget is spent. Every descent owns its row of the numpy stacks,
so results do not depend on how starts are grouped or spread over threads.
"""
import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.linalg

from unshuffle.errors import AmbiguousMatching, DegenerateDesign, UsageError
from unshuffle import homotopy
from unshuffle.instance import Permutation
from unshuffle.logger import get_logger
from unshuffle.residual import compile_system

LOG = get_logger(__name__)

CERT_UNIQUE = 'unique-root'
CERT_APPROXIMATE = 'approximate'
CERT_NONE = 'none'

NOISE_FLOOR_FACTOR = 10.0
MATCHING_FACTOR = 4.0
RANK_TOLERANCE = 1e-10
TIE_TOLERANCE = 1e-9
LAMBDA_MIN = 1e-15
LAMBDA_MAX = 1e16
STEP_TOLERANCE = 1e-15
POLISH_STEPS = 2
STALL_WINDOW = 25
STALL_DECREASE = 1e-4
HOPS = 4
MATCHING_SWEEPS = 3


class SolverConfig(object):
    """
    Levenberg-Marquardt multistart settings. rounds bounds the number of
    start rounds, square_seeds the largest n for which the roots of the
    square system seed the first round (0 switches the seeds off).
    """

    def __init__(self, starts=16, max_iters=200, residual_tol=1e-10,
                 lm_lambda0=1e-3, lm_up=10.0, lm_down=0.1, start_radius=1.0,
                 seed=0, workers=1, rounds=8, square_seeds=6):
        self.starts = int(starts)
        self.max_iters = int(max_iters)
        self.residual_tol = float(residual_tol)
        self.lm_lambda0 = float(lm_lambda0)
        self.lm_up = float(lm_up)
        self.lm_down = float(lm_down)
        self.start_radius = float(start_radius)
        self.seed = int(seed)
        self.workers = int(workers)
        self.rounds = int(rounds)
        self.square_seeds = int(square_seeds)
        self.validate()

    def validate(self):
        """Raise UsageError for settings out of range"""
        if self.starts < 1:
            raise UsageError("At least one start is needed")
        if self.max_iters < 1:
            raise UsageError("max_iters has to be positive")
        if self.workers < 1:
            raise UsageError("workers has to be positive")
        if self.rounds < 1:
            raise UsageError("At least one round is needed")
        if self.square_seeds < 0:
            raise UsageError("square_seeds has to be non-negative")
        for name in ('residual_tol', 'lm_lambda0', 'start_radius'):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise UsageError("%s has to be positive" % name)
        if not self.lm_up > 1 > self.lm_down > 0:
            raise UsageError("Damping factors need lm_up > 1 > lm_down > 0")
        if not 0 <= self.seed < 2 ** 64:
            raise UsageError("Seed has to be a 64-bit unsigned integer")

    def to_dict(self):
        return {'starts': self.starts,
                'max_iters': self.max_iters,
                'residual_tol': self.residual_tol,
                'lm_lambda0': self.lm_lambda0,
                'lm_up': self.lm_up,
                'lm_down': self.lm_down,
                'start_radius': self.start_radius,
                'seed': self.seed,
                'rounds': self.rounds,
                'square_seeds': self.square_seeds}


class StartOutcome(object):
    """Final state of a single descent"""

    def __init__(self, index, x, residual_norm, iterations, round_index=0):
        self.index = index
        self.x = x
        self.residual_norm = residual_norm
        self.iterations = iterations
        self.round_index = round_index


class SolveReport(object):
    """
    Result of solve(), completed by run_pipeline() with the recovered
    permutation, refit and errors against the ground truth.
    """

    def __init__(self, xi_hat, residual_norm, certificate, converged_starts,
                 best_start_index, config, scale, noise_floor=0.0,
                 start_residuals=(), agreement=None, wall_time=0.0,
                 rounds=1, matching_rms=None):
        self.xi_hat = [float(value) for value in xi_hat]
        self.residual_norm = float(residual_norm)
        self.certificate = certificate
        self.converged_starts = converged_starts
        self.best_start_index = best_start_index
        self.config = config
        self.scale = [float(value) for value in scale]
        self.noise_floor = float(noise_floor)
        self.start_residuals = [float(value) for value in start_residuals]
        self.agreement = agreement
        self.wall_time = wall_time
        self.rounds = rounds
        self.matching_rms = matching_rms
        self.pi_hat = None
        self.refit_xi = None
        self.relative_error = None
        self.refit_relative_error = None
        self.permutation_accuracy = None
        self.timings = {}
        self.notes = []

    def to_dict(self, timings=False):
        """
        JSON-ready dictionary. Wall clock figures are left out unless
        requested, so that reports of equal runs are identical.
        """
        data = {'certificate': self.certificate,
                'xi_hat': self.xi_hat,
                'residual_norm': self.residual_norm,
                'converged_starts': self.converged_starts,
                'best_start_index': self.best_start_index,
                'agreement': self.agreement,
                'noise_floor': self.noise_floor,
                'matching_rms': self.matching_rms,
                'rounds': self.rounds,
                'start_residuals': self.start_residuals,
                'scale': self.scale,
                'pi_hat': (None if self.pi_hat is None
                           else list(self.pi_hat.image)),
                'refit_xi': self.refit_xi,
                'relative_error': self.relative_error,
                'refit_relative_error': self.refit_relative_error,
                'permutation_accuracy': self.permutation_accuracy,
                'certificate_basis': 'xi* is the unique complex solution '
                                     'of q_1 = ... = q_{n+1} = 0 for '
                                     'generic data',
                'scaling': '1 / max(1, m * c^l), c = median |a_i . x0|',
                'notes': self.notes,
                'config': self.config.to_dict()}
        if timings:
            data['wall_time'] = self.wall_time
            data['timings'] = self.timings
        return data


def _norms(resid, jac):
    """Residual norm per row, infinite where anything overflowed"""
    finite = (np.all(np.isfinite(resid), axis=1) &
              np.all(np.isfinite(jac), axis=(1, 2)))
    norms = np.full(resid.shape[0], math.inf)
    norms[finite] = np.linalg.norm(resid[finite], axis=1)
    return norms


def _damped_steps(jac, resid, lam):
    """
    Marquardt steps solving (J^T J + lam diag(J^T J)) step = -J^T r for a
    stack of Jacobians and residuals
    """
    transposed = np.swapaxes(jac, 1, 2)
    normal = np.matmul(transposed, jac)
    gradient = np.matmul(transposed, resid[..., np.newaxis])
    diagonal = np.diagonal(normal, axis1=1, axis2=2)
    floor = 1e-24 * np.maximum(1.0, diagonal.max(axis=1))
    damping = np.maximum(diagonal, floor[:, np.newaxis])
    index = np.arange(normal.shape[1])
    normal[:, index, index] += lam[:, np.newaxis] * damping
    return -homotopy.solve_stack(normal, gradient)[..., 0]


def levenberg_marquardt(system, points, config):
    """
    Damped Gauss-Newton descents on the scaled residual, one per row of
    points, advanced together. A descent stops shortly after its residual
    norm drops below the tolerance, when its step vanishes, when the
    damping runs away, or when its residual went down by less than
    STALL_DECREASE over the last STALL_WINDOW iterations. Steps that do not
    strictly decrease the residual norm (or overflow) are rejected and the
    damping is increased.

    Returns (x, residual norms, iterations), one row per start.
    """
    x = np.array(points, dtype=float, ndmin=2)
    resid, jac = system.evaluate_many(x)
    cost = _norms(resid, jac)
    count = x.shape[0]
    lam = np.full(count, config.lm_lambda0)
    iterations = np.zeros(count, dtype=int)
    polish = np.zeros(count, dtype=int)
    active = np.isfinite(cost)
    checkpoint = cost.copy()

    for iteration in range(1, config.max_iters + 1):
        # a couple of extra steps once below the tolerance
        below = active & (cost <= config.residual_tol)
        active &= ~(below & (polish == POLISH_STEPS))
        polish[below & active] += 1
        if iteration % STALL_WINDOW == 0:
            active &= ~((cost > config.residual_tol) &
                        (cost > (1.0 - STALL_DECREASE) * checkpoint))
            checkpoint = cost.copy()

        rows = np.flatnonzero(active)
        if not rows.size:
            break
        iterations[rows] = iteration

        with np.errstate(over='ignore', invalid='ignore'):
            step = _damped_steps(jac[rows], resid[rows], lam[rows])
            candidate = x[rows] + step
        new_resid, new_jac = system.evaluate_many(candidate)
        new_cost = _norms(new_resid, new_jac)

        better = new_cost < cost[rows]
        improved = rows[better]
        x[improved] = candidate[better]
        resid[improved] = new_resid[better]
        jac[improved] = new_jac[better]
        cost[improved] = new_cost[better]
        lam[improved] = np.maximum(lam[improved] * config.lm_down,
                                   LAMBDA_MIN)
        tiny = (np.linalg.norm(step[better], axis=1) <=
                STEP_TOLERANCE * (1.0 + np.linalg.norm(x[improved], axis=1)))
        active[improved[tiny]] = False

        worse = rows[~better]
        lam[worse] *= config.lm_up
        active[worse[lam[worse] > LAMBDA_MAX]] = False
    return x, cost, iterations


def _check_design(system):
    """sigma_min(A), or DegenerateDesign for a rank deficient A"""
    singular = np.linalg.svd(system.A, compute_uv=False)
    if singular[-1] < RANK_TOLERANCE * singular[0]:
        raise DegenerateDesign("degenerate design: sigma_min/sigma_max = %g"
                               % (singular[-1] / singular[0]))
    return singular[-1]


def _random_starts(system, config, radius):
    """Seeded random initial points, one independent stream per start"""
    children = np.random.SeedSequence(config.seed).spawn(config.starts)
    points = np.empty((config.starts, system.n))
    for row, child in enumerate(children):
        rng = np.random.Generator(np.random.PCG64(child))
        points[row] = (radius * rng.standard_normal(system.n) /
                       math.sqrt(system.n))
    return points


def _constrained_starts(system, config, round_index):
    """
    Random points with q_1 = q_2 = 0: a random direction inside the
    hyperplane (sum_i a_i) . x = p_1(y), scaled along that direction until
    |A x|^2 = p_2(y) where the quadric allows it.
    """
    A = system.A
    column_sums = A.sum(axis=0)
    weight = column_sums.dot(column_sums)
    children = np.random.SeedSequence(
        entropy=(config.seed, round_index)).spawn(config.starts)
    points = np.empty((config.starts, system.n))
    for row, child in enumerate(children):
        direction = np.random.Generator(
            np.random.PCG64(child)).standard_normal(system.n)
        if not weight > 0:
            points[row] = direction
            continue
        base = system.target[0] * column_sums / weight
        direction -= direction.dot(column_sums) / weight * column_sums
        fixed, moving = A.dot(base), A.dot(direction)
        quadratic = moving.dot(moving)
        if not quadratic > 0:
            points[row] = base
            continue
        linear = 2.0 * fixed.dot(moving)
        constant = fixed.dot(fixed) - system.target[1]
        discriminant = max(linear * linear - 4.0 * quadratic * constant, 0.0)
        points[row] = base + ((math.sqrt(discriminant) - linear) /
                              (2.0 * quadratic)) * direction
    return points


def _sorted_matching(system, pinv, x, sweeps=MATCHING_SWEEPS):
    """
    Alternate between matching the ranks of A x to the sorted y and the
    least squares solution for that matching. Returns the last solution and
    the matched measurements it was fitted to.
    """
    target = None
    for _ in range(sweeps):
        fitted = system.A.dot(x)
        ranks = np.empty(fitted.size, dtype=int)
        ranks[np.argsort(fitted, kind='stable')] = np.arange(fitted.size)
        target = system.sorted_y[ranks]
        x = pinv.dot(target)
    return x, target


def _matching_rms(system, pinv, x):
    """
    Root mean square residual of the least squares fit to y matched by
    ranks against A x; of the order of sigma near xi*, and much larger at
    spurious minima
    """
    if system.sorted_y is None or not np.all(np.isfinite(x)):
        return None
    refitted, target = _sorted_matching(system, pinv, x, sweeps=1)
    return float(np.linalg.norm(system.A.dot(refitted) - target) /
                 math.sqrt(system.m))


def _square_seeds(system, config):
    """
    Real roots of the square system, best full residual first, at most
    config.starts of them
    """
    if system.n > config.square_seeds or not system.target[1] > 0:
        return np.empty((0, system.n))
    roots = homotopy.square_roots(system, config.seed)
    _, points = roots.real_points()
    if not points.shape[0]:
        return np.empty((0, system.n))
    costs = _norms(*system.evaluate_many(points))
    order = np.argsort(costs, kind='stable')[:config.starts]
    LOG.debug("%d real roots of %d tracked paths (%d finished), %d used as "
              "seeds", points.shape[0], roots.paths, roots.count,
              order.size)
    return points[order]


def _restart_points(system, pinv, outcomes, config, round_index):
    """Sorted-matching moves of the last round's best iterates, then fresh
    constrained points"""
    points = []
    if system.sorted_y is not None:
        previous = sorted((outcome for outcome in outcomes
                           if outcome.round_index == round_index - 1 and
                           np.all(np.isfinite(outcome.x))),
                          key=lambda outcome: (outcome.residual_norm,
                                               outcome.index))
        points = [_sorted_matching(system, pinv, outcome.x)[0]
                  for outcome in previous[:HOPS]]
    points.extend(_constrained_starts(system, config, round_index))
    return np.array(points)


def _descend(system, points, config, round_index, offset):
    """
    Run one descent per row of points, split over config.workers threads;
    start indices continue from offset
    """
    chunks = [chunk for chunk in
              np.array_split(np.arange(points.shape[0]), config.workers)
              if chunk.size]

    def run(chunk):
        return levenberg_marquardt(system, points[chunk], config)

    if len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=len(chunks)) as executor:
            results = list(executor.map(run, chunks))
    else:
        results = [run(chunk) for chunk in chunks]

    outcomes = []
    for chunk, (xs, costs, iterations) in zip(chunks, results):
        for row, x, cost, count in zip(chunk, xs, costs, iterations):
            index = offset + int(row)
            LOG.debug("Start %d: residual %.3e after %d iterations", index,
                      cost, count)
            outcomes.append(StartOutcome(index, x, float(cost), int(count),
                                         round_index))
    return outcomes


def _certify(system, pinv, best, sigma, config):
    """
    Certificate of the best iterate, with the predicted noise floor, the
    residual threshold for counting converged starts and the matching rms
    """
    finite = bool(np.all(np.isfinite(best.x)))
    floor = system.noise_floor(best.x, sigma) if finite else 0.0
    matching = _matching_rms(system, pinv, best.x)
    if best.residual_norm <= config.residual_tol:
        return CERT_UNIQUE, floor, config.residual_tol, matching
    if (sigma > 0 and best.residual_norm <= NOISE_FLOOR_FACTOR * floor and
            (matching is None or matching <= MATCHING_FACTOR * sigma)):
        return CERT_APPROXIMATE, floor, NOISE_FLOOR_FACTOR * floor, matching
    return CERT_NONE, floor, config.residual_tol, matching


def _prepare(system, config):
    """Design check, the random starts of the first round and the scaled
    system"""
    smallest = _check_design(system)
    # p_2(y) = |y|^2
    y_norm = math.sqrt(max(system.target[1], 0.0))
    points = _random_starts(system, config,
                            config.start_radius * y_norm / smallest)
    return system.rescaled(points[0]), points


def _agreement(best, converged):
    if not converged:
        return None
    reference = max(np.linalg.norm(best.x), 1e-300)
    return max(float(np.linalg.norm(outcome.x - best.x)) / reference
               for outcome in converged)


def solve(system, config=None, sigma=0.0):
    """
    Run Levenberg-Marquardt descents in rounds and return a SolveReport for
    the minimum-residual iterate (ties go to the lowest start index). The
    first round descends from the square-system seeds followed by
    config.starts random points; later rounds only run while no
    certificate has been reached.
    """
    config = config or SolverConfig()
    started = time.perf_counter()
    scaled, points = _prepare(system, config)
    pinv = np.linalg.pinv(system.A)
    points = np.vstack([_square_seeds(scaled, config), points])

    outcomes = []
    for round_index in range(config.rounds):
        if round_index:
            points = _restart_points(scaled, pinv, outcomes, config,
                                     round_index)
        outcomes.extend(_descend(scaled, points, config, round_index,
                                 len(outcomes)))
        best = min(outcomes, key=lambda outcome: (outcome.residual_norm,
                                                  outcome.index))
        certificate, floor, threshold, matching = _certify(
            scaled, pinv, best, sigma, config)
        if certificate != CERT_NONE:
            break
        LOG.debug("Round %d: best residual %.3e, no certificate",
                  round_index, best.residual_norm)

    converged = [outcome for outcome in outcomes
                 if outcome.residual_norm <= threshold]
    LOG.info("Certificate %s, residual %.3e, %d of %d starts converged in "
             "%d round(s)", certificate, best.residual_norm, len(converged),
             len(outcomes), round_index + 1)
    return SolveReport(best.x, best.residual_norm, certificate,
                       len(converged), best.index, config, scaled.scale,
                       noise_floor=floor,
                       start_residuals=[outcome.residual_norm
                                        for outcome in outcomes],
                       agreement=_agreement(best, converged),
                       wall_time=time.perf_counter() - started,
                       rounds=round_index + 1, matching_rms=matching)


def solve_square_then_filter(system, config=None, sigma=0.0):
    """
    Baseline: all roots of the square system q_1 = ... = q_n = 0 by
    homotopy continuation, keeping the real root with the smallest residual
    on the full system (which is |q_{n+1}| up to the tracking accuracy).
    Its cost grows with n!, the number of tracked paths.
    """
    config = config or SolverConfig()
    started = time.perf_counter()
    scaled, _ = _prepare(system, config)
    pinv = np.linalg.pinv(system.A)
    roots = homotopy.square_roots(scaled, config.seed)
    indices, points = roots.real_points()
    note = "%d of %d paths finished, %d real roots" % (
        roots.count, roots.paths, indices.size)
    LOG.info("%s", note)

    if not indices.size:
        report = SolveReport(np.zeros(system.n), math.inf, CERT_NONE, 0, -1,
                             config, scaled.scale,
                             wall_time=time.perf_counter() - started)
        report.notes.append(note)
        return report

    costs = _norms(*scaled.evaluate_many(points))
    outcomes = [StartOutcome(int(index), point, float(cost), 0)
                for index, point, cost in zip(indices, points, costs)]
    best = min(outcomes, key=lambda outcome: (outcome.residual_norm,
                                              outcome.index))
    certificate, floor, threshold, matching = _certify(scaled, pinv, best,
                                                       sigma, config)
    converged = [outcome for outcome in outcomes
                 if outcome.residual_norm <= threshold]
    report = SolveReport(best.x, best.residual_norm, certificate,
                         len(converged), best.index, config, scaled.scale,
                         noise_floor=floor, start_residuals=costs,
                         agreement=_agreement(best, converged),
                         wall_time=time.perf_counter() - started,
                         matching_rms=matching)
    report.notes.append(note)
    return report


def _check_ties(values, name):
    """Raise AmbiguousMatching if two values are within the tie tolerance"""
    if values.size < 2:
        return
    ordered = np.sort(values)
    spread = ordered[-1] - ordered[0]
    if spread == 0 or np.any(np.diff(ordered) <= TIE_TOLERANCE * spread):
        raise AmbiguousMatching("ambiguous matching: tied entries in %s" %
                                name)


def recover_permutation(A, xi_hat, y):
    """
    Return pi_hat with (A xi_hat)_i ~ y_{pi_hat(i)}, matching ranks of the
    two sorted vectors.
    """
    fitted = np.asarray(A, dtype=float).dot(np.asarray(xi_hat, dtype=float))
    y = np.asarray(y, dtype=float)
    if fitted.shape != y.shape:
        raise UsageError("y has to have one entry per row of A")
    _check_ties(fitted, "A xi_hat")
    _check_ties(y, "y")

    image = np.empty(y.size, dtype=int)
    image[np.argsort(fitted, kind='stable')] = np.argsort(y, kind='stable')
    return Permutation(image)


def refit(A, y, pi_hat):
    """
    Ordinary least squares solution of A x = pi_hat^-1(y), via QR with
    column pivoting.
    """
    A = np.asarray(A, dtype=float)
    target = np.asarray(pi_hat.apply_inverse(list(y)), dtype=float)
    qmat, rmat, pivots = scipy.linalg.qr(A, mode='economic', pivoting=True)
    diagonal = np.abs(np.diag(rmat))
    if not diagonal.size or diagonal[-1] <= RANK_TOLERANCE * diagonal[0]:
        raise DegenerateDesign("degenerate design: rank deficient A")

    solution = np.empty(A.shape[1])
    solution[pivots] = scipy.linalg.solve_triangular(rmat,
                                                     qmat.T.dot(target))
    return solution


def relative_error(estimate, truth):
    """|estimate - truth| / |truth|"""
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    scale = np.linalg.norm(truth)
    error = np.linalg.norm(estimate - truth)
    return float(error / scale if scale else error)


def run_pipeline(instance, config=None, baseline=False):
    """
    compile -> solve -> recover_permutation -> refit for one instance;
    baseline=True solves with solve_square_then_filter instead.
    Phase timings are stored in report.timings (milliseconds).
    """
    config = config or SolverConfig()
    method = solve_square_then_filter if baseline else solve

    started = time.perf_counter()
    system = compile_system(instance)
    compiled = time.perf_counter()
    report = method(system, config, sigma=instance.sigma)
    solved = time.perf_counter()

    floated = instance.to_float()
    A, y = floated.float_arrays()
    try:
        report.pi_hat = recover_permutation(A, report.xi_hat, y)
        report.refit_xi = refit(A, y, report.pi_hat).tolist()
    except AmbiguousMatching as exc:
        LOG.warning("%s", exc)
        report.notes.append(str(exc))
    refitted = time.perf_counter()

    report.timings = {'compile_ms': 1e3 * (compiled - started),
                      'solve_ms': 1e3 * (solved - compiled),
                      'refit_ms': 1e3 * (refitted - solved)}

    if instance.xi_star is not None:
        report.relative_error = relative_error(report.xi_hat, floated.xi_star)
        if report.refit_xi is not None:
            report.refit_relative_error = relative_error(report.refit_xi,
                                                         floated.xi_star)
    if instance.pi is not None and report.pi_hat is not None:
        report.permutation_accuracy = report.pi_hat.accuracy_against(
            instance.pi)
    return report
