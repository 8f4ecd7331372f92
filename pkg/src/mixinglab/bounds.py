"""
Right-hand sides of the multiple-mixing bounds, the exponent balancing
for the ``(+-, A)`` variant, and empirical calibration of the constant C.

Weight-sum factors are passed in as numbers (``Fraction`` when exact); the
only inexact step is the final fractional power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

STANDARD = "standard"
ADJOINT = "adjoint"


@dataclass
class BoundInputs:
    """Parameters shared by the bound evaluators.

    ``sup_norms``, ``pm_norms`` and ``sobolev_norms`` are per-function
    ``|f_i|_inf``, ``|f_i|_{+-,A}`` and ``|f_i|_{inf,A,m}`` values.
    """

    s: float = 1.0
    q: Fraction = Fraction(1)
    d0: int = 1
    dk: int = 1
    C: float = 1.0
    C_prime: Optional[float] = None
    A: Optional[float] = None
    sup_norms: Sequence[float] = field(default_factory=tuple)
    pm_norms: Sequence[float] = field(default_factory=tuple)
    sobolev_norms: Sequence[float] = field(default_factory=tuple)

    def __post_init__(self):
        self.q = Fraction(self.q)
        if not 0 < self.q <= 1:
            raise ValueError("q must lie in (0, 1]")
        if self.d0 < 1 or self.dk < 1:
            raise ValueError("d0 and dk must be positive")
        if self.A is not None and self.A <= 0:
            raise ValueError("A must be positive")
        for name in ("sup_norms", "pm_norms", "sobolev_norms"):
            if any(x < 0 for x in getattr(self, name)):
                raise ValueError(f"{name} must be nonnegative")


def _pow(x, e: Fraction):
    """``x ** e`` exactly when both are rational and ``e`` is an integer."""
    if isinstance(x, (int, Fraction)) and e.denominator == 1:
        return Fraction(x) ** int(e)
    return float(x) ** float(e)


def _decay_term(lam, rho, exponent: Fraction):
    """``(lam * rho) ** (-exponent)``."""
    if lam <= 0 or rho <= 0:
        raise ValueError("weight-sum factors must be positive")
    return _pow(lam * rho, -exponent)


def _prefactor(C, s, s_power: Fraction, d0: int, dk: int):
    return C * _pow(s, s_power) * math.sqrt(d0 * dk)


def rhs_theorem_3_3(inputs: BoundInputs, lam, rho) -> float:
    """``C s^{2q} sqrt(d0 dk) lam^{-q/2} rho^{-q/2}``."""
    q = inputs.q
    pre = _prefactor(inputs.C, inputs.s, 2 * q, inputs.d0, inputs.dk)
    return float(pre * _decay_term(lam, rho, q / 2))


def optimal_epsilon(A, q) -> float:
    """Exponent ``eps`` in ``s = R**eps`` balancing ``s^{-A}`` against
    ``s^{2q} R^{-q/2}``: ``eps = q / (2 (A + 2q))``."""
    if A <= 0:
        raise ValueError("A must be positive")
    q = float(q)
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    return q / (2 * (A + 2 * q))


def theorem_4_exponent(A, q) -> float:
    """Decay exponent ``A q / (2 (A + 2 q))`` of the ``(+-, A)`` bounds."""
    return A * optimal_epsilon(A, q)


def balanced_envelope(R, eps, A, q) -> float:
    """``max(s^{-A}, s^{2q} R^{-q/2})`` at ``s = R**eps``."""
    s = R ** eps
    return max(s ** (-A), s ** (2 * q) * R ** (-q / 2))


def rhs_theorem_4_1(inputs: BoundInputs, lam, rho) -> float:
    """``C sqrt(d0 dk) prod(|f_i|_inf |f_i|_{+-,A}) R^{-Aq/(2(A+2q))}``."""
    if inputs.A is None or inputs.A <= 0:
        raise ValueError("A must be positive")
    if len(inputs.sup_norms) != len(inputs.pm_norms):
        raise ValueError("need one sup norm and one (+-,A) norm per function")
    if lam <= 0 or rho <= 0:
        raise ValueError("weight-sum factors must be positive")
    norms = math.prod(a * b for a, b in zip(inputs.sup_norms, inputs.pm_norms))
    e = theorem_4_exponent(inputs.A, inputs.q)
    return inputs.C * math.sqrt(inputs.d0 * inputs.dk) * norms * float(lam * rho) ** (-e)


def rhs_theorem_4_2(inputs: BoundInputs, lam, rho) -> float:
    """``C prod |f_i|^2_{inf,A,m} R^{-Aq/(2(A+2q))}``."""
    if inputs.A is None or inputs.A <= 0:
        raise ValueError("A must be positive")
    if not inputs.sobolev_norms:
        raise ValueError("Sobolev norms |f_i|_{inf,A,m} are required")
    if lam <= 0 or rho <= 0:
        raise ValueError("weight-sum factors must be positive")
    norms = math.prod(x * x for x in inputs.sobolev_norms)
    e = theorem_4_exponent(inputs.A, inputs.q)
    return inputs.C * norms * float(lam * rho) ** (-e)


def sl2_factors(variant: str, a_values: Sequence) -> tuple:
    """Weight sums for ``diag(a_i, 1/a_i)``, ``1 = a_0 < a_1 < ... < a_k``.

    Standard action: ``(sum_{i<k} a_k / a_i, sum_{i>=1} a_i)``; the adjoint
    action squares every term.
    """
    if variant not in (STANDARD, ADJOINT):
        raise ValueError(f"unknown variant {variant!r}")
    if not a_values:
        raise ValueError("need at least one acting element")
    a = [1] + [Fraction(x) if isinstance(x, (int, Fraction)) else x for x in a_values]
    if any(b <= c for c, b in zip(a, a[1:])):
        raise ValueError("a-values must satisfy 1 < a_1 < ... < a_k")
    p = 1 if variant == STANDARD else 2
    k = len(a) - 1
    lam = sum(((a[k] / a[i]) ** p for i in range(k)), start=0)
    rho = sum((a[i] ** p for i in range(1, k + 1)), start=0)
    return lam, rho


def sl2_ratios_exceed(a_values: Sequence, C_prime) -> bool:
    """Whether ``a_i / a_j > C_prime`` for all ``i > j`` (with ``a_0 = 1``)."""
    a = [1] + list(a_values)
    return all(a[i] / a[i - 1] > C_prime for i in range(1, len(a)))


def corollary_sl2(variant: str, a_values: Sequence, inputs: BoundInputs) -> float:
    """The SL(2) x| k^2 (standard) or SL(2) x| sl2 (adjoint) bound.

    ``C s^2 sqrt(d0 dk) (lam rho)^{-1/2}`` with ``lam, rho`` from
    :func:`sl2_factors`.  The exponent is 1/2 in both cases, whatever
    ``inputs.q`` says.
    """
    lam, rho = sl2_factors(variant, a_values)
    pre = _prefactor(inputs.C, inputs.s, Fraction(2), inputs.d0, inputs.dk)
    return float(pre * _decay_term(lam, rho, Fraction(1, 2)))


@dataclass(frozen=True)
class Calibration:
    C_cal: float
    violations: tuple
    checked: int

    @property
    def valid(self) -> bool:
        return not self.violations


def calibrate_constant(reports: Sequence, held_out: Sequence = ()) -> Calibration:
    """Fit ``C`` as the largest ``|exact| / unit bound`` over ``reports``.

    Reports whose bound is not applicable are skipped.  ``held_out``
    reports are then checked against ``|exact| <= C_cal * unit bound``; the
    offending reports are returned as violations.
    """
    if not reports:
        raise ValueError("no reports to calibrate on")
    usable = [r for r in reports if r.unit_bound is not None]
    if not usable:
        raise ValueError("no report has an applicable bound")
    c_cal = max(abs(r.exact) / r.unit_bound for r in usable)
    # the quotient may round down; step up until the products dominate
    while any(abs(r.exact) > c_cal * r.unit_bound for r in usable):
        c_cal = math.nextafter(c_cal, math.inf)
    tested = [r for r in held_out if r.unit_bound is not None]
    bad = tuple(r for r in tested if abs(r.exact) > c_cal * r.unit_bound)
    return Calibration(c_cal, bad, len(tested))
