"""Exact classical and generalized Hermite polynomials.

The generalized Hermite polynomial is the n x n Wronskian-type determinant

    H_{m,n}(z) = det[ d^l/dz^l H_{m+j}(z) ]_{l,j = 0..n-1}

expanded over the integers and reduced to a canonical representative
(primitive, positive leading coefficient).

The determinant is computed with fraction-free Bareiss elimination.  Rather
than running Bareiss on polynomial entries directly, every entry is packed
into a single big integer by Kronecker substitution z -> 2**W, the integer
determinant is computed with gmpy2, and the coefficients are unpacked from
the signed base-2**W digits.  A packing width that is too small is detected
by a random modular evaluation and retried with a wider W.
"""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass
from typing import Sequence

import gmpy2
from gmpy2 import mpz

from .errors import DegreeCapExceeded

__all__ = [
    "ExactPolynomial",
    "hermite_classical",
    "hermite_generalized",
    "bareiss_det",
    "degree_cap",
    "DEFAULT_DEGREE_CAP",
]

DEFAULT_DEGREE_CAP = 5000
_P61 = (1 << 61) - 1  # Mersenne prime used for the modular check


@dataclass(frozen=True)
class ExactPolynomial:
    """Dense integer polynomial, ``coeffs[i]`` multiplies ``z**i``.

    Attributes
    ----------
    coeffs : tuple of int
        Coefficients in increasing degree, no trailing zeros.
    """

    coeffs: tuple

    def __post_init__(self):
        c = [int(a) for a in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c) if c else (0,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> int:
        return self.coeffs[-1]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, ExactPolynomial):
            return self.coeffs == other.coeffs
        return tuple(other) == self.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __call__(self, z):
        """Horner evaluation; works for ints, floats, complex and mpmath types."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def derivative(self) -> "ExactPolynomial":
        return ExactPolynomial(_deriv(list(self.coeffs)))

    def content(self) -> int:
        g = 0
        for a in self.coeffs:
            g = math.gcd(g, a)
        return g

    def normalized(self) -> "ExactPolynomial":
        """Primitive part with positive leading coefficient."""
        g = self.content()
        if g == 0:
            return self
        c = [a // g for a in self.coeffs]
        if c[-1] < 0:
            c = [-a for a in c]
        return ExactPolynomial(tuple(c))

    def substitute_i(self) -> "ExactPolynomial":
        """Return P(i z) up to a unit, assuming P has a single parity.

        For a polynomial with only even (or only odd) powers the substitution
        z -> i z multiplies the coefficient of z**k by i**k; pulling out the
        common power of i leaves an integer polynomial.
        """
        d = self.degree
        out = []
        for k, a in enumerate(self.coeffs):
            if a == 0:
                out.append(0)
                continue
            if (d - k) % 2:
                raise ValueError("polynomial has mixed parity")
            # i**k / i**d = i**(k-d) = (-1)**((d-k)//2)
            out.append(a if ((d - k) // 2) % 2 == 0 else -a)
        return ExactPolynomial(tuple(out)).normalized()


def _deriv(p: Sequence[int]) -> list:
    return [i * c for i, c in enumerate(p)][1:] or [0]


def _classical_list(k: int) -> list:
    h0 = [1]
    if k == 0:
        return h0
    h1 = [0, 2]
    for j in range(1, k):
        h2 = [0] + [2 * c for c in h1]
        for i, c in enumerate(h0):
            h2[i] -= 2 * j * c
        h0, h1 = h1, h2
    return h1


def hermite_classical(k: int) -> ExactPolynomial:
    """Physicists' Hermite polynomial H_k with exact integer coefficients.

    Uses H_{k+1} = 2 z H_k - 2 k H_{k-1} with H_0 = 1, H_1 = 2 z.

    Examples
    --------
    >>> hermite_classical(2).coeffs
    (-2, 0, 4)
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    return ExactPolynomial(tuple(_classical_list(k)))


def bareiss_det(M) -> int:
    """Integer determinant by fraction-free Bareiss elimination.

    Row swaps are used when a pivot vanishes.  All intermediate divisions
    are exact.
    """
    n = len(M)
    if n == 0:
        return 1
    A = [[mpz(x) for x in row] for row in M]
    prev = mpz(1)
    sign = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = A[k][k]
        rowk = A[k]
        for i in range(k + 1, n):
            rowi = A[i]
            aik = rowi[k]
            for j in range(k + 1, n):
                rowi[j] = gmpy2.divexact(rowi[j] * akk - aik * rowk[j], prev)
        prev = akk
    return int(sign * A[n - 1][n - 1])


def _horner_mpz(p, x):
    r = mpz(0)
    for c in reversed(p):
        r = r * x + c
    return r


def _horner_mod(p, x, q):
    r = 0
    for c in reversed(p):
        r = (r * x + c) % q
    return r


def _det_mod(M, q):
    n = len(M)
    A = [[x % q for x in row] for row in M]
    d = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k]), None)
        if piv is None:
            return 0
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            d = -d
        d = d * A[k][k] % q
        inv = pow(A[k][k], q - 2, q)
        for i in range(k + 1, n):
            f = A[i][k] * inv % q
            if f:
                for j in range(k, n):
                    A[i][j] = (A[i][j] - f * A[k][j]) % q
    return d % q


def degree_cap() -> int:
    """Degree cap, overridable through the ``GHP_MAX_DEGREE`` variable."""
    raw = os.environ.get("GHP_MAX_DEGREE")
    return int(raw) if raw else DEFAULT_DEGREE_CAP


def wronskian_entries(m: int, n: int) -> list:
    """Matrix of exact entries d^l H_{m+j}, as coefficient lists."""
    ent = [[None] * n for _ in range(n)]
    for j in range(n):
        p = _classical_list(m + j)
        for l in range(n):
            ent[l][j] = p
            p = _deriv(p)
    return ent


def _he_list(k: int) -> list:
    """Probabilists' Hermite He_k, He_{k+1} = x He_k - k He_{k-1}."""
    h0 = [1]
    if k == 0:
        return h0
    h1 = [0, 1]
    for j in range(1, k):
        h2 = [0] + h1
        for i, c in enumerate(h0):
            h2[i] -= j * c
        h0, h1 = h1, h2
    return h1


def hermite_generalized(m: int, n: int, max_degree: int | None = None) -> ExactPolynomial:
    """Generalized Hermite polynomial H_{m,n}, primitive with positive lead.

    Parameters
    ----------
    m, n : int
        Positive integers; the result has degree ``m * n``.
    max_degree : int, optional
        Degree cap; defaults to ``GHP_MAX_DEGREE`` or 5000.

    Notes
    -----
    The determinant is reduced by exact identities before expansion, all of
    which only change it by a nonzero constant or a unit:

    * ``H_k(z) = 2**(k/2) He_k(x)`` with ``x = sqrt(2) z`` and
      ``He_k' = k He_{k-1}``, so after pulling column and row factorials the
      matrix becomes Toeplitz with integer entries
      ``He_{m+j-l}(x) (m+n-1-l)! / (m+j-l)!``;
    * ``H_{m,n}(z)`` is proportional to ``H_{n,m}(i z)``, so the smaller of
      the two determinants is expanded;
    * entry (l, j) has the parity of ``m + j - l``; multiplying it by
      ``x**((l % 2) + ((m + j) % 2))`` makes every entry even, and the
      determinant is expanded as a polynomial in ``t = x**2``.

    The raw coefficients are a few hundred bits smaller than those of the
    literal Wronskian, which shortens the Kronecker packing.

    Examples
    --------
    >>> hermite_generalized(2, 2).coeffs
    (3, 0, 0, 0, 4)
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    cap = degree_cap() if max_degree is None else max_degree
    if m * n > cap:
        raise DegreeCapExceeded(f"degree m*n = {m * n} exceeds cap {cap}")
    if n == 1:
        return ExactPolynomial(tuple(_classical_list(m))).normalized()
    if n > m:
        return hermite_generalized(n, m, max_degree=cap).substitute_i()

    went = []
    for l in range(n):
        wrow = []
        for j in range(n):
            k = m + j - l
            scale = math.factorial(m + n - 1 - l) // math.factorial(k)
            sh = (l % 2) + ((m + j) % 2)
            e = [0] * sh + [scale * c for c in _he_list(k)]
            wrow.append(e[0::2])
        went.append(wrow)
    shift = sum(l % 2 for l in range(n)) + sum((m + j) % 2 for j in range(n))
    degw = (m * n + shift) // 2

    d = m * n
    W = int(0.4 * d * math.log2(max(d, 2))) + 64
    rng = random.Random(m * 1_000_003 + n)
    while True:
        coeffs = _packed_det(went, W, degw)
        if coeffs is not None:
            r = rng.randrange(2, _P61)
            lhs = _det_mod([[_horner_mod(e, r, _P61) for e in row] for row in went], _P61)
            if lhs == _horner_mod(coeffs, r, _P61):
                break
        W = W * 3 // 2

    full = [0] * (2 * degw + 1)
    for i, a in enumerate(coeffs):
        full[2 * i] = a
    if any(full[:shift]):
        raise ArithmeticError("parity shift left a nonzero low coefficient")
    # back from x = sqrt(2) z; every surviving power has the parity of d
    full = full[shift:]
    r0 = d % 2
    z = [a << ((i - r0) // 2) if a else 0 for i, a in enumerate(full)]
    return ExactPolynomial(tuple(z)).normalized()


def _packed_det(went, W, degw):
    """Bareiss at t = 2**W, unpacked to signed digits, or None if inconsistent."""
    x = mpz(1) << W
    v = mpz(bareiss_det([[_horner_mpz(e, x) for e in row] for row in went]))
    base = mpz(1) << W
    half = base >> 1
    out = []
    for _ in range(degw + 1):
        r = gmpy2.f_mod(v, base)
        if r >= half:
            r -= base
        out.append(int(r))
        v = (v - r) >> W
    return out if v == 0 else None
