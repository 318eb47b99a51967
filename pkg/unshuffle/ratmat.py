"""
Exact linear algebra over the rationals.

Determinants and ranks are computed by ``sympy.polys.matrices.DomainMatrix``
over QQ. Rank modulo a large prime (over GF(p)) is offered as a cheap lower
bound: full rank modulo p implies full rank over Q.
"""
from sympy.polys.domains import GF, QQ
from sympy.polys.matrices import DomainMatrix

from unshuffle.errors import UsageError
from unshuffle import polyring

MERSENNE_61 = 2 ** 61 - 1


def to_rows(matrix):
    """Copy the matrix as list of lists of Fractions; floats are refused"""
    rows = [[polyring.to_coefficient(value, polyring.EXACT) for value in row]
            for row in matrix]
    if rows and any(len(row) != len(rows[0]) for row in rows):
        raise UsageError("Ragged matrix")
    return rows


def domain_matrix(matrix, fmt='sparse'):
    """The rational matrix as a DomainMatrix over QQ"""
    rows = to_rows(matrix)
    shape = (len(rows), len(rows[0]) if rows else 0)
    elements = [[polyring.to_ground(value, polyring.EXACT) for value in row]
                for row in rows]
    return DomainMatrix(elements, shape, QQ, fmt=fmt)


def determinant(matrix):
    """Exact determinant of a square rational matrix"""
    mat = domain_matrix(matrix, fmt='dense')
    rows, cols = mat.shape
    if rows != cols:
        raise UsageError("Determinant needs a square matrix")
    if not rows:
        return polyring.to_coefficient(1, polyring.EXACT)
    return polyring.from_ground(mat.det(), polyring.EXACT)


def rank(matrix):
    """Exact rank of a rational matrix"""
    mat = domain_matrix(matrix)
    if not all(mat.shape):
        return 0
    return mat.rank()


def rank_modp(matrix, prime=MERSENNE_61):
    """
    Rank of the matrix reduced modulo prime. Returns None when some
    denominator vanishes modulo prime, since the reduction is undefined.
    The result never exceeds the rank over Q.
    """
    field = GF(prime)
    rows = []
    for row in to_rows(matrix):
        reduced = []
        for value in row:
            if value.denominator % prime == 0:
                return None
            reduced.append(field(value.numerator *
                                 pow(value.denominator, -1, prime)))
        rows.append(reduced)
    if not rows or not rows[0]:
        return 0
    return DomainMatrix(rows, (len(rows), len(rows[0])), field,
                        fmt='sparse').rank()


def has_full_row_rank(matrix):
    """
    True if rank equals the number of rows. Decided modulo a prime first,
    exactly when that is not conclusive.
    """
    rows = to_rows(matrix)
    modular = rank_modp(rows)
    if modular == len(rows):
        return True
    return rank(rows) == len(rows)
