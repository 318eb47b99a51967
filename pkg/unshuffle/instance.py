"""
Unlabeled sensing instances: generation, perturbation, validation and the
JSON instance file.

Random streams
--------------
Every instance is reproducible from its 64-bit master seed. Independent
streams for A, xi, pi and noise are numpy PCG64 generators seeded with
``SeedSequence(entropy=seed, spawn_key=(label,))`` where label is 1, 2, 3
and 4 respectively.

Exact instances draw rationals with numerator uniform in [-10^4, 10^4] and
denominator uniform in [1, 10^2]; float instances draw standard normals.

Permutation convention: y = pi(v) puts v_i at position pi(i), so that
v_i = y_{pi(i)}.
"""
import json
import math
from fractions import Fraction

import numpy as np

from unshuffle.errors import UsageError
from unshuffle import polyring
from unshuffle.polyring import EXACT, FLOAT

STREAM_LABELS = {'A': 1, 'xi': 2, 'pi': 3, 'noise': 4}
NUMERATOR_BOUND = 10 ** 4
DENOMINATOR_BOUND = 10 ** 2
SEED_LIMIT = 2 ** 64
FLOAT_CONSISTENCY = 1e-12


def stream(seed, label):
    """Return numpy Generator for the labelled stream of master seed"""
    if not 0 <= seed < SEED_LIMIT:
        raise UsageError("Seed has to be a 64-bit unsigned integer")
    sequence = np.random.SeedSequence(entropy=seed,
                                      spawn_key=(STREAM_LABELS[label],))
    return np.random.Generator(np.random.PCG64(sequence))


class Permutation(object):
    """
    Permutation of {0, ..., m-1} given by its image sequence
    """
    __slots__ = ('image',)

    def __init__(self, image):
        self.image = tuple(int(target) for target in image)

    @classmethod
    def identity(cls, size):
        return cls(range(size))

    @classmethod
    def reversal(cls, size):
        return cls(range(size - 1, -1, -1))

    def __len__(self):
        return len(self.image)

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.image == other.image

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash(self.image)

    def __repr__(self):
        return "Permutation(%r)" % (list(self.image),)

    def is_bijection(self):
        return sorted(self.image) == list(range(len(self.image)))

    def _check(self, values):
        if not self.is_bijection():
            raise UsageError("pi not a bijection")
        if len(values) != len(self.image):
            raise UsageError("Permutation of size %d applied to %d values" %
                             (len(self.image), len(values)))

    def apply(self, values):
        """Return pi(values): entry i moves to position pi(i)"""
        values = list(values)
        self._check(values)
        result = [None] * len(values)
        for index, value in enumerate(values):
            result[self.image[index]] = value
        return result

    def apply_inverse(self, values):
        """Return pi^-1(values), i.e. entry i is values[pi(i)]"""
        values = list(values)
        self._check(values)
        return [values[target] for target in self.image]

    def inverse(self):
        inverse = [0] * len(self.image)
        for index, target in enumerate(self.image):
            inverse[target] = index
        return Permutation(inverse)

    def accuracy_against(self, other):
        """Fraction of indices mapped identically by both permutations"""
        if len(other) != len(self):
            raise UsageError("Permutations of different sizes")
        if not self.image:
            return 1.0
        same = sum(1 for left, right in zip(self.image, other.image)
                   if left == right)
        return same / float(len(self.image))


def mat_vec(matrix, vector, domain):
    """A . x in the given domain"""
    if domain == FLOAT:
        return np.dot(np.asarray(matrix, dtype=float),
                      np.asarray(vector, dtype=float)).tolist()
    return [sum(a * x for a, x in zip(row, vector)) for row in matrix]


class Instance(object):
    """
    One unlabeled sensing problem (A, xi*, pi, sigma, y). xi_star and pi
    are absent for externally supplied problems.
    """

    def __init__(self, A, y, xi_star=None, pi=None, sigma=0.0, seed=0,
                 domain=EXACT):
        """
        Initialization. Values are converted to the coefficient type of the
        domain; shape problems are left for validate() to report.
        """
        self.domain = polyring.check_domain(domain)

        def conv(value):
            return polyring.to_coefficient(value, domain)

        self.A = tuple(tuple(conv(value) for value in row) for row in A)
        self.y = tuple(conv(value) for value in y)
        self.xi_star = (None if xi_star is None
                        else tuple(conv(value) for value in xi_star))
        if pi is not None and not isinstance(pi, Permutation):
            pi = Permutation(pi)
        self.pi = pi
        self.sigma = float(sigma)
        self.seed = int(seed)

    @property
    def m(self):
        return len(self.A)

    @property
    def n(self):
        return len(self.A[0]) if self.A else 0

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __repr__(self):
        return "Instance(m=%d, n=%d, domain=%r, seed=%d, sigma=%r)" % (
            self.m, self.n, self.domain, self.seed, self.sigma)

    def signal(self):
        """A . xi_star, the noiseless unpermuted measurements"""
        if self.xi_star is None:
            raise UsageError("Instance has no ground truth")
        return mat_vec(self.A, self.xi_star, self.domain)

    def float_arrays(self):
        """Return (A, y) as float numpy arrays"""
        return (np.array([[float(value) for value in row]
                          for row in self.A], dtype=float).reshape(self.m,
                                                                   self.n),
                np.array([float(value) for value in self.y], dtype=float))

    def to_float(self):
        """Same instance in the float domain"""
        if self.domain == FLOAT:
            return self
        return Instance([[float(value) for value in row] for row in self.A],
                        [float(value) for value in self.y],
                        xi_star=(None if self.xi_star is None
                                 else [float(value)
                                       for value in self.xi_star]),
                        pi=self.pi, sigma=self.sigma, seed=self.seed,
                        domain=FLOAT)

    def to_dict(self):
        """JSON-ready dictionary, all numbers but m, n and seed as strings"""
        def fmt(value):
            return polyring.format_coefficient(value, self.domain)

        data = {'m': self.m,
                'n': self.n,
                'seed': self.seed,
                'domain': self.domain,
                'sigma': repr(self.sigma),
                'A': [[fmt(value) for value in row] for row in self.A]}
        if self.xi_star is not None:
            data['xi_star'] = [fmt(value) for value in self.xi_star]
        if self.pi is not None:
            data['pi'] = list(self.pi.image)
        data['y'] = [fmt(value) for value in self.y]
        return data

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data):
        """Inverse of to_dict"""
        try:
            domain = polyring.check_domain(data.get('domain', EXACT))

            def parse(text):
                return polyring.parse_coefficient(str(text), domain)

            xi_star = data.get('xi_star')
            return cls([[parse(value) for value in row]
                        for row in data['A']],
                       [parse(value) for value in data['y']],
                       xi_star=(None if xi_star is None
                                else [parse(value) for value in xi_star]),
                       pi=data.get('pi'),
                       sigma=float(data.get('sigma', 0.0)),
                       seed=int(data.get('seed', 0)),
                       domain=domain)
        except (KeyError, TypeError, ZeroDivisionError) as exc:
            raise UsageError("Malformed instance data: %s" % exc)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except ValueError as exc:
            raise UsageError("Instance is not valid JSON: %s" % exc)
        return cls.from_dict(data)

    @classmethod
    def load(cls, filename):
        with open(filename) as fobj:
            return cls.from_json(fobj.read())

    def save(self, filename):
        with open(filename, "w") as fobj:
            fobj.write(self.to_json())


def _rational_draw(rng, size):
    """Draw `size' rationals num/den from the instance bounds"""
    nums = rng.integers(-NUMERATOR_BOUND, NUMERATOR_BOUND, size=size,
                        endpoint=True)
    dens = rng.integers(1, DENOMINATOR_BOUND, size=size, endpoint=True)
    return [Fraction(int(num), int(den))
            for num, den in zip(nums, dens)]


def generate(m, n, seed, domain=EXACT, sigma=0.0, snr_db=None):
    """
    Draw a random instance. With snr_db provided, sigma is derived from the
    noiseless signal with snr_to_sigma. Noise is available in the float
    domain only.
    """
    if n < 1 or m < n:
        raise UsageError("m >= n required (got m=%d, n=%d)" % (m, n))
    polyring.check_domain(domain)
    if sigma < 0:
        raise UsageError("sigma has to be non-negative")
    if domain == EXACT and (sigma > 0 or snr_db is not None):
        raise UsageError("Noise is available in the float domain only")

    rng_a = stream(seed, 'A')
    rng_xi = stream(seed, 'xi')
    rng_pi = stream(seed, 'pi')

    if domain == EXACT:
        flat = _rational_draw(rng_a, m * n)
        A = [flat[row * n:(row + 1) * n] for row in range(m)]
        xi_star = _rational_draw(rng_xi, n)
    else:
        A = rng_a.standard_normal((m, n)).tolist()
        xi_star = rng_xi.standard_normal(n).tolist()
    pi = Permutation(rng_pi.permutation(m))

    y = pi.apply(mat_vec(A, xi_star, domain))
    inst = Instance(A, y, xi_star=xi_star, pi=pi, sigma=0.0, seed=seed,
                    domain=domain)

    if snr_db is not None:
        sigma = snr_to_sigma(inst, snr_db)
    if sigma > 0:
        noise = stream(seed, 'noise').normal(0.0, sigma, size=m)
        inst = Instance(A, (np.asarray(y, dtype=float) + noise).tolist(),
                        xi_star=xi_star, pi=pi, sigma=sigma, seed=seed,
                        domain=domain)
    return inst


def snr_to_sigma(instance, snr_db):
    """
    Noise standard deviation for the requested SNR, defined as
    10 log10((|A xi*|^2 / m) / sigma^2).
    """
    signal = [float(value) for value in instance.signal()]
    power = sum(value * value for value in signal) / len(signal)
    if power == 0:
        raise UsageError("Zero signal power, SNR is undefined")
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise UsageError("SNR has to be a number above -inf dB")
    if snr_db == math.inf:
        return 0.0
    try:
        return math.sqrt(power) * 10.0 ** (-snr_db / 20.0)
    except OverflowError:
        raise UsageError("SNR of %r dB is out of range" % snr_db)


def perturb(instance, index=0, delta=1):
    """
    Return an adversarial copy of the instance with y[index] shifted by
    delta. y is then generically not a permuted image of any A x, so the
    ground truth is dropped.
    """
    if not 0 <= index < instance.m:
        raise UsageError("Index %d out of range" % index)
    y = list(instance.y)
    y[index] = y[index] + polyring.to_coefficient(delta, instance.domain)
    return Instance(instance.A, y, sigma=instance.sigma, seed=instance.seed,
                    domain=instance.domain)


def tightness_example(n, zero_rows=0):
    """
    A = [I_n; 0] with y = (1, ..., n, 0, ..., 0). Every ordering of
    (1, ..., n) solves q_1 = ... = q_n = 0, so the square system reaches
    its bound of n! real roots while q_{n+1} still holds at all of them.
    """
    if n < 1 or zero_rows < 0:
        raise UsageError("n >= 1 and zero_rows >= 0 required")
    m = n + zero_rows
    A = [[Fraction(int(row == col)) for col in range(n)]
         for row in range(m)]
    xi_star = [Fraction(value) for value in range(1, n + 1)]
    y = xi_star + [Fraction(0)] * zero_rows
    return Instance(A, y, xi_star=xi_star, pi=Permutation.identity(m),
                    domain=EXACT)


def validate(instance):
    """
    Return list of violated instance invariants, empty if all hold.
    """
    violations = []
    m, n = instance.m, instance.n

    if n < 1:
        violations.append("n >= 1 required")
    if m < n:
        violations.append("m >= n required")
    if any(len(row) != n for row in instance.A):
        violations.append("A is not an m x n matrix")
    if len(instance.y) != m:
        violations.append("y has %d entries, m is %d" % (len(instance.y), m))
    if instance.xi_star is not None and len(instance.xi_star) != n:
        violations.append("xi_star has %d entries, n is %d" %
                          (len(instance.xi_star), n))
    if instance.pi is not None and (len(instance.pi) != m or
                                    not instance.pi.is_bijection()):
        violations.append("pi not a bijection")
    if instance.sigma < 0 or math.isnan(instance.sigma):
        violations.append("sigma must be non-negative")
    if instance.domain == EXACT and instance.sigma > 0:
        violations.append("noise is float-only")
    if not 0 <= instance.seed < SEED_LIMIT:
        violations.append("seed out of 64-bit range")
    if instance.domain == FLOAT:
        values = [value for row in instance.A for value in row]
        values.extend(instance.y)
        if not all(math.isfinite(value) for value in values):
            violations.append("non-finite entries")

    if violations or instance.xi_star is None or instance.pi is None:
        return violations
    if instance.sigma != 0:
        return violations

    expected = instance.pi.apply(instance.signal())
    if instance.domain == EXACT:
        consistent = list(instance.y) == expected
    else:
        bound = FLOAT_CONSISTENCY * max([1.0] + [abs(value)
                                                 for value in expected])
        consistent = all(abs(got - want) <= bound
                         for got, want in zip(instance.y, expected))
    if not consistent:
        violations.append("y is not pi(A xi_star)")
    return violations
