"""
Building blocks for reducing SL(n) correlations to SL(2) x| k^2 ones.

Indices ``j, l`` and simple-root indices are 1-based, as in the usual
matrix-entry and Dynkin-diagram conventions.  Matrices are tuples of rows.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .repdata import ARCHIMEDEAN, Q_EXPONENT, DiagonalElement, WeightVector

# Tolerance for the floating-point product check of a split.
SPLIT_TOL = 1e-12


class RankError(ValueError):
    """The reduction needs rank at least 2 (n >= 3)."""


def _check_pair(n: int, j: int, l: int):
    if not 1 <= j < l <= n:
        raise IndexError(f"need 1 <= j < l <= n, got j={j}, l={l}, n={n}")


def embed_sl2_v(n: int, j: int, l: int, element) -> tuple:
    """Embed ``((a, b), (c, d)), (x, y)`` into ``SL(n)``.

    ``a, b, c, d`` go to rows/columns ``j, l`` and the translation ``(x, y)``
    to column ``l + 1``.  When ``l == n`` there is no spare column; only the
    SL(2) part is embedded and a warning is issued.

    ``element`` is an :class:`~mixinglab.torus.AffineLatticeElement` or a pair
    ``(A, v)``; entries may be any numbers.
    """
    _check_pair(n, j, l)
    A, v = (element.A, element.v) if hasattr(element, "A") else element
    (a, b), (c, d) = A
    x, y = v
    m = [[1 if r == s else 0 for s in range(n)] for r in range(n)]
    j0, l0 = j - 1, l - 1
    m[j0][j0], m[j0][l0], m[l0][j0], m[l0][l0] = a, b, c, d
    if l < n:
        m[j0][l] = x
        m[l0][l] = y
    elif x != 0 or y != 0:
        warnings.warn("l == n: translation part dropped from the embedding", RuntimeWarning)
    return tuple(tuple(row) for row in m)


def matmul(a, b) -> tuple:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0])))
        for i in range(len(a))
    )


def diag_matrix(entries: Sequence) -> tuple:
    n = len(entries)
    return tuple(tuple(entries[i] if i == j else 0 for j in range(n)) for i in range(n))


@dataclass(frozen=True)
class DiagonalSplit:
    """``a = a_hat * a_prime`` with ``a_hat`` in the (j, l) copy of SL(2).

    In q-exponent mode with ``a_j a_l`` an odd power of q the ideal split
    has half-integer exponents; ``parity_shift`` records the 1/2 moved from
    ``a_prime`` to ``a_hat`` at slot ``j`` (and back at slot ``l``) so all
    stored exponents are integers.  ``b`` and ``c`` hold the ideal
    (uncompensated) values, as exponents in q-exponent mode.
    """

    a: DiagonalElement
    j: int
    l: int
    a_hat: DiagonalElement
    a_prime: DiagonalElement
    b: object
    c: object
    mode: str
    parity_shift: Fraction = Fraction(0)
    exact: bool = True

    def product(self) -> DiagonalElement:
        return self.a_hat * self.a_prime

    def ideal_exponents(self) -> tuple:
        """Uncompensated q-exponents ``(a_hat, a_prime)`` as Fractions."""
        if self.mode != Q_EXPONENT:
            raise ValueError("only defined in q-exponent mode")
        j0, l0 = self.j - 1, self.l - 1
        hat = [Fraction(x) for x in self.a_hat.entries]
        prime = [Fraction(x) for x in self.a_prime.entries]
        hat[j0] -= self.parity_shift
        hat[l0] += self.parity_shift
        prime[j0] += self.parity_shift
        prime[l0] -= self.parity_shift
        return tuple(hat), tuple(prime)

    def to_dict(self) -> dict:
        def enc(x):
            if isinstance(x, Fraction):
                return str(x)
            return x

        return {
            "mode": self.mode,
            "j": self.j,
            "l": self.l,
            "a": [enc(x) for x in self.a.entries],
            "a_hat": [enc(x) for x in self.a_hat.entries],
            "a_prime": [enc(x) for x in self.a_prime.entries],
            "b": enc(self.b),
            "c": enc(self.c),
            "parity_shift": str(self.parity_shift),
            "exact": self.exact,
        }


def exact_sqrt(x) -> Optional[Fraction]:
    """Square root of a nonnegative rational if it is rational, else None."""
    if not isinstance(x, (int, Fraction)):
        return None
    x = Fraction(x)
    if x < 0:
        return None
    p, q = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if p * p == x.numerator and q * q == x.denominator:
        return Fraction(p, q)
    return None


def split_diagonal(a: DiagonalElement, j: int, l: int) -> DiagonalSplit:
    """Split ``a`` as ``a_hat * a_prime``.

    ``c = sqrt(a_j a_l)`` and ``b = a_j / c``; ``a_hat`` is ``b`` at ``j``,
    ``1/b`` at ``l`` and 1 elsewhere, ``a_prime`` is ``c`` at ``j`` and ``l``
    and ``a`` elsewhere.  Rational entries whose product is a perfect
    square are handled exactly; otherwise floats are used.
    """
    n = a.rank
    _check_pair(n, j, l)
    j0, l0 = j - 1, l - 1
    if a.mode == Q_EXPONENT:
        nj, nl = a.entries[j0], a.entries[l0]
        c = Fraction(nj + nl, 2)
        b = Fraction(nj - nl, 2)
        shift = Fraction(0) if c.denominator == 1 else Fraction(1, 2)
        hat = [0] * n
        hat[j0] = int(b + shift)
        hat[l0] = int(-b - shift)
        prime = list(a.entries)
        prime[j0] = int(c - shift)
        prime[l0] = int(c + shift)
        return DiagonalSplit(
            a, j, l,
            DiagonalElement(tuple(hat), Q_EXPONENT),
            DiagonalElement(tuple(prime), Q_EXPONENT),
            b, c, Q_EXPONENT, shift, True,
        )
    aj, al = a.entries[j0], a.entries[l0]
    c = exact_sqrt(aj * al)
    exact = c is not None
    if exact:
        b = Fraction(aj) / c
        one = 1
    else:
        c = math.sqrt(float(aj) * float(al))
        b = float(aj) / c
        one = 1.0
    hat = [one] * n
    hat[j0], hat[l0] = b, 1 / b
    prime = list(a.entries) if exact else [float(x) for x in a.entries]
    prime[j0] = prime[l0] = c
    return DiagonalSplit(
        a, j, l, _diag(hat), _diag(prime), b, c, ARCHIMEDEAN, Fraction(0), exact
    )


def _diag(entries) -> DiagonalElement:
    return DiagonalElement(tuple(entries), ARCHIMEDEAN)


def split_error(split: DiagonalSplit) -> float:
    """Largest relative entrywise error of ``a_hat * a_prime`` against ``a``."""
    if split.mode == Q_EXPONENT:
        prod = [x + y for x, y in zip(split.a_hat.entries, split.a_prime.entries)]
        return float(max(abs(p - e) for p, e in zip(prod, split.a.entries)))
    prod = [x * y for x, y in zip(split.a_hat.entries, split.a_prime.entries)]
    return float(max(abs(p - e) / abs(e) for p, e in zip(prod, split.a.entries)))


def centralizes(split: DiagonalSplit, generators: Sequence, tol: float = 0.0) -> bool:
    """Whether ``a_prime`` commutes with the embedded SL(2) elements given.

    ``generators`` are 2x2 matrices embedded with :func:`embed_sl2_v` (no
    translation part).  ``tol = 0`` demands exact equality.
    """
    if split.mode == Q_EXPONENT:
        j0, l0 = split.j - 1, split.l - 1
        return split.a_prime.entries[j0] == split.a_prime.entries[l0]
    n = split.a.rank
    D = diag_matrix(split.a_prime.entries)
    for r in generators:
        E = embed_sl2_v(n, split.j, split.l, (r, (0, 0)))
        left, right = matmul(D, E), matmul(E, D)
        for row_l, row_r in zip(left, right):
            for x, y in zip(row_l, row_r):
                if abs(x - y) > tol:
                    return False
    return True


WEYL_GENERATOR = ((0, -1), (1, 0))


def rotation(theta: float) -> tuple:
    c, s = math.cos(theta), math.sin(theta)
    return ((c, -s), (s, c))


def simple_root(n: int, i: int) -> WeightVector:
    """``e_i - e_{i+1}`` for ``1 <= i <= n - 1``."""
    if not 1 <= i <= n - 1:
        raise IndexError(f"simple root index {i} out of range for SL({n})")
    return WeightVector(tuple(1 if t == i - 1 else -1 if t == i else 0 for t in range(n)))


def cartan_integer(alpha: WeightVector, beta: WeightVector) -> int:
    """``2 (alpha, beta) / (beta, beta)`` for the standard form on type A roots."""
    ab = sum(x * y for x, y in zip(alpha.exponents, beta.exponents))
    bb = sum(y * y for y in beta.exponents)
    return 2 * ab // bb


def select_root_pair(n: int, omega: int) -> tuple:
    """A simple root adjacent to ``omega`` in the A_{n-1} Dynkin chain.

    Returns ``(omega, omega')``; the lower-index neighbour is preferred.
    In type A the pair always spans an A_2 subsystem.  The C_2 case of
    other types is not handled.
    """
    if n < 3:
        raise RankError("root-pair reduction needs SL(n) with n >= 3")
    if not 1 <= omega <= n - 1:
        raise IndexError(f"simple root index {omega} out of range for SL({n})")
    other = omega - 1 if omega > 1 else omega + 1
    return omega, other


def root_pair_type(n: int, omega: int, other: int) -> str:
    a, b = simple_root(n, omega), simple_root(n, other)
    if cartan_integer(a, b) == -1 and cartan_integer(b, a) == -1:
        return "A2"
    raise ValueError("roots do not span an A2 subsystem")


def _root_slots(omega: WeightVector) -> tuple:
    exps = omega.exponents
    if omega.is_zero():
        raise ValueError("the zero weight is not a root")
    plus = [i for i, e in enumerate(exps) if e == 1]
    minus = [i for i, e in enumerate(exps) if e == -1]
    if len(plus) != 1 or len(minus) != 1 or sum(abs(e) for e in exps) != 2:
        raise ValueError(f"{exps} is not a root e_j - e_l of SL(n)")
    return plus[0], minus[0]


def decompose_torus(a: DiagonalElement, omega) -> tuple:
    """Write ``a = kernel * d_omega`` with ``omega(kernel) = 1``.

    For ``omega = e_j - e_l`` the one-parameter part is ``diag(t, 1/t)`` on
    slots ``j, l`` with ``t = sqrt(a_j / a_l)``.  In q-exponent mode the
    difference ``n_j - n_l`` must be even; use :func:`split_diagonal` for
    the compensated split otherwise.
    """
    omega = omega if isinstance(omega, WeightVector) else WeightVector(tuple(omega))
    if len(omega) != a.rank:
        raise ValueError("root and element have different rank")
    j0, l0 = _root_slots(omega)
    n = a.rank
    if a.mode == Q_EXPONENT:
        diff = a.entries[j0] - a.entries[l0]
        if diff % 2:
            raise ValueError("odd exponent difference; no integral decomposition")
        t = diff // 2
        part = [0] * n
        part[j0], part[l0] = t, -t
        d_omega = DiagonalElement(tuple(part), Q_EXPONENT)
        return a / d_omega, d_omega
    ratio = a.entries[j0] / Fraction(a.entries[l0]) if isinstance(a.entries[l0], (int, Fraction)) and isinstance(a.entries[j0], (int, Fraction)) else a.entries[j0] / a.entries[l0]
    t = exact_sqrt(ratio)
    if t is None:
        t = math.sqrt(float(ratio))
        part = [1.0] * n
        part[j0], part[l0] = t, 1.0 / t
        d_omega = _diag(part)
        kernel = _diag(tuple(float(x) / y for x, y in zip(a.entries, part)))
        return kernel, d_omega
    part = [1] * n
    part[j0], part[l0] = t, 1 / t
    d_omega = _diag(part)
    return a / d_omega, d_omega
