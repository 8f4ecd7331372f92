"""
Weights, diagonal elements and the weight-sum quantities entering the
multiple-mixing bounds.

Diagonal elements come in two flavours:

* archimedean: a tuple of positive scalars (``int``, ``Fraction`` or ``float``)
  whose product is 1;
* q-exponent: a tuple of integers ``n_i`` standing for ``q**n_i`` with
  ``sum(n_i) == 0``.  Only valuations are stored; no p-adic arithmetic is
  done.  With ``Q`` the residue field cardinality, ``|q**n| = Q**(-n)``.

Weights are integer exponent vectors ``w`` with ``w(a) = prod a_i**w_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Optional, Sequence

ARCHIMEDEAN = "archimedean"
Q_EXPONENT = "q-exponent"

# Relative tolerance for the determinant check on floating entries.
_FLOAT_DET_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when a weight and a diagonal element have different ranks."""


class DegenerateRepresentationError(ValueError):
    """Raised for representations with fewer than two weights."""


@dataclass(frozen=True)
class WeightVector:
    """Integer exponent vector of a character of the diagonal torus."""

    exponents: tuple

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if any(e != f for e, f in zip(exps, self.exponents)):
            raise TypeError("weight exponents must be integers")
        object.__setattr__(self, "exponents", exps)

    def __len__(self):
        return len(self.exponents)

    def __add__(self, other: "WeightVector") -> "WeightVector":
        _check_len(self, other)
        return WeightVector(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __neg__(self) -> "WeightVector":
        return WeightVector(tuple(-e for e in self.exponents))

    def __sub__(self, other: "WeightVector") -> "WeightVector":
        return self + (-other)

    def is_zero(self) -> bool:
        return not any(self.exponents)


@dataclass(frozen=True)
class DiagonalElement:
    """Element of the diagonal torus of SL(d).

    Parameters
    ----------
    entries : tuple
        Positive scalars (archimedean) or integer valuations (q-exponent).
    mode : str
        ``"archimedean"`` or ``"q-exponent"``.
    """

    entries: tuple
    mode: str = ARCHIMEDEAN

    def __post_init__(self):
        entries = tuple(self.entries)
        if self.mode == ARCHIMEDEAN:
            if any(not isinstance(e, Real) or e <= 0 for e in entries):
                raise ValueError("archimedean entries must be positive reals")
            prod = math.prod(entries)
            if any(isinstance(e, float) for e in entries):
                if abs(prod - 1) > _FLOAT_DET_TOL * max(1.0, *[abs(e) for e in entries]):
                    raise ValueError(f"entries multiply to {prod}, not 1")
            elif prod != 1:
                raise ValueError(f"entries multiply to {prod}, not 1")
        elif self.mode == Q_EXPONENT:
            ints = tuple(int(e) for e in entries)
            if ints != entries:
                raise ValueError("q-exponent entries must be integers")
            if sum(ints) != 0:
                raise ValueError("q-exponents must sum to 0")
            entries = ints
        else:
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def identity(cls, d: int, mode: str = ARCHIMEDEAN) -> "DiagonalElement":
        return cls((1,) * d if mode == ARCHIMEDEAN else (0,) * d, mode)

    @classmethod
    def sl2(cls, a) -> "DiagonalElement":
        """``diag(a, 1/a)``; integer or Fraction ``a`` stays exact."""
        inv = Fraction(1) / a if isinstance(a, (int, Fraction)) else 1.0 / a
        return cls((a, inv))

    @property
    def rank(self) -> int:
        return len(self.entries)

    def __mul__(self, other: "DiagonalElement") -> "DiagonalElement":
        self._check_compatible(other)
        if self.mode == ARCHIMEDEAN:
            return DiagonalElement(tuple(a * b for a, b in zip(self.entries, other.entries)))
        return DiagonalElement(
            tuple(a + b for a, b in zip(self.entries, other.entries)), Q_EXPONENT
        )

    def inverse(self) -> "DiagonalElement":
        if self.mode == ARCHIMEDEAN:
            return DiagonalElement(tuple(_reciprocal(e) for e in self.entries))
        return DiagonalElement(tuple(-e for e in self.entries), Q_EXPONENT)

    def __truediv__(self, other: "DiagonalElement") -> "DiagonalElement":
        return self * other.inverse()

    def is_identity(self) -> bool:
        return all(e == (1 if self.mode == ARCHIMEDEAN else 0) for e in self.entries)

    def sort_key(self) -> tuple:
        return tuple(self.entries)

    def _check_compatible(self, other):
        if self.mode != other.mode:
            raise ValueError("cannot combine archimedean and q-exponent elements")
        if self.rank != other.rank:
            raise DimensionError(f"rank {self.rank} vs {other.rank}")


def _reciprocal(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(1) / x
    return 1.0 / x


def _check_len(w, a):
    if len(w) != len(a.entries if isinstance(a, DiagonalElement) else a):
        raise DimensionError(f"length mismatch: {len(w)} vs {len(a.entries) if isinstance(a, DiagonalElement) else len(a)}")


def evaluate_weight(w: WeightVector, a: DiagonalElement):
    """Evaluate the character ``w`` at ``a``.

    Returns ``prod a_i**w_i`` in archimedean mode and the valuation
    ``sum w_i * n_i`` in q-exponent mode.
    """
    _check_len(w, a)
    if a.mode == Q_EXPONENT:
        return sum(e * n for e, n in zip(w.exponents, a.entries))
    value = 1
    for x, e in zip(a.entries, w.exponents):
        if e >= 0:
            value *= x ** e
        else:
            value *= _reciprocal(x) ** (-e)
    return value


def weight_abs(w: WeightVector, a: DiagonalElement, residue_cardinality: Optional[int] = None):
    """``|w(a)|`` as a real number.

    In q-exponent mode the residue field cardinality is required, since
    ``|w(a)| = Q**(-valuation)``.
    """
    value = evaluate_weight(w, a)
    if a.mode == ARCHIMEDEAN:
        return abs(value)
    if residue_cardinality is None or residue_cardinality < 2:
        raise ValueError("q-exponent mode needs residue_cardinality >= 2")
    return Fraction(residue_cardinality) ** (-value)


@dataclass(frozen=True)
class RepresentationData:
    """Weights of a finite dimensional representation with multiplicities."""

    name: str
    weights: tuple
    dims: tuple
    highest: WeightVector
    lowest: WeightVector
    torus_rank: int = field(init=False)

    def __post_init__(self):
        weights = tuple(w if isinstance(w, WeightVector) else WeightVector(tuple(w)) for w in self.weights)
        dims = tuple(int(d) for d in self.dims)
        highest = self.highest if isinstance(self.highest, WeightVector) else WeightVector(tuple(self.highest))
        lowest = self.lowest if isinstance(self.lowest, WeightVector) else WeightVector(tuple(self.lowest))
        if len(weights) != len(dims):
            raise ValueError("one dimension per weight is required")
        if len(set(weights)) != len(weights):
            raise ValueError("weights must be distinct; use dims for multiplicity")
        if any(d < 1 for d in dims):
            raise ValueError("weight space dimensions must be positive")
        ranks = {len(w) for w in weights}
        if len(ranks) > 1:
            raise DimensionError("weights of differing length")
        if highest not in weights or lowest not in weights:
            raise ValueError("highest and lowest weights must belong to the weight list")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "highest", highest)
        object.__setattr__(self, "lowest", lowest)
        object.__setattr__(self, "torus_rank", ranks.pop() if ranks else 0)

    @property
    def dim(self) -> int:
        return sum(self.dims)

    def weight_dim(self, w: WeightVector) -> int:
        return self.dims[self.weights.index(w)]

    def coordinate_indices(self, w: WeightVector) -> tuple:
        """Coordinates of the weight space of ``w`` in the weight basis of V."""
        i = self.weights.index(w)
        start = sum(self.dims[:i])
        return tuple(range(start, start + self.dims[i]))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "weights": [list(w.exponents) for w in self.weights],
            "dims": list(self.dims),
            "highest": list(self.highest.exponents),
            "lowest": list(self.lowest.exponents),
        }


def standard_sl2() -> RepresentationData:
    """Standard representation of SL(2): ``diag(a, 1/a) -> a**(+1), a**(-1)``."""
    return RepresentationData(
        "standard", ((1, 0), (0, 1)), (1, 1), highest=(1, 0), lowest=(0, 1)
    )


def adjoint_sl2() -> RepresentationData:
    """Adjoint representation of SL(2): weights ``a**2, 1, a**(-2)``."""
    return RepresentationData(
        "adjoint", ((1, -1), (0, 0), (-1, 1)), (1, 1, 1), highest=(1, -1), lowest=(-1, 1)
    )


def standard_sln(n: int) -> RepresentationData:
    """Standard representation of SL(n); weights are the coordinate characters."""
    basis = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    return RepresentationData("standard", basis, (1,) * n, highest=basis[0], lowest=basis[-1])


def q_exponent(rep: RepresentationData, override=None) -> Fraction:
    """Decay exponent of the representation.

    ``(1/3)**(#weights - 1)`` when the highest weight space has dimension
    greater than one, ``(1/3)**(#weights - 2)`` otherwise.  ``override``
    replaces the formula value (it must lie in (0, 1]).
    """
    if len(rep.weights) < 2:
        raise DegenerateRepresentationError("need at least two weights")
    if override is not None:
        q = Fraction(override)
        if not 0 < q <= 1:
            raise ValueError("exponent override must lie in (0, 1]")
        return q
    n = len(rep.weights)
    power = n - 1 if rep.weight_dim(rep.highest) > 1 else n - 2
    return Fraction(1, 3) ** power


@dataclass(frozen=True)
class RatioFactor:
    lam: object
    rho: object

    @property
    def value(self):
        return self.lam * self.rho


def _with_identity(elements: Sequence[DiagonalElement]) -> list:
    if not elements:
        raise ValueError("acting tuple is empty")
    first = elements[0]
    return [DiagonalElement.identity(first.rank, first.mode)] + list(elements)


def ratio_factor(
    rep: RepresentationData,
    elements: Sequence[DiagonalElement],
    *,
    lambda_start: int = 0,
    residue_cardinality: Optional[int] = None,
) -> RatioFactor:
    """Weight-sum factors of the main bound.

    ``elements`` are the acting elements ``a^1 .. a^k``; ``a^0 = I`` is
    prepended internally.  Returns

    * ``lam = |sum_{i=lambda_start}^{k-1} lambda(a^k / a^i)|``
    * ``rho = |sum_{i=1}^{k} varrho(a^i)^{-1}|``

    ``lambda_start`` is 0 by default; pass 1 to drop the ``a^0`` term.
    """
    if lambda_start not in (0, 1):
        raise ValueError("lambda_start must be 0 or 1")
    a = _with_identity(elements)
    k = len(a) - 1
    top = a[k]
    lam = sum(
        (weight_abs(rep.highest, top / a[i], residue_cardinality) for i in range(lambda_start, k)),
        start=0,
    )
    rho = sum(
        (weight_abs(-rep.lowest, a[i], residue_cardinality) for i in range(1, k + 1)),
        start=0,
    )
    return RatioFactor(lam, rho)


def order_by_highest_weight(
    rep: RepresentationData,
    elements: Sequence[DiagonalElement],
    residue_cardinality: Optional[int] = None,
) -> list:
    """Sort acting elements by increasing ``|lambda(a)|``, ties lexicographic."""
    return sorted(
        elements,
        key=lambda a: (weight_abs(rep.highest, a, residue_cardinality), a.sort_key()),
    )


def divergence_check(
    rep: RepresentationData,
    elements: Sequence[DiagonalElement],
    threshold,
    residue_cardinality: Optional[int] = None,
) -> tuple:
    """Check the divergence hypothesis of the main bound.

    Returns ``(holds, minimum)`` where ``minimum`` is the smallest of
    ``|lambda(a^k / a^i)|`` for ``i = 0..k-1`` and ``|varrho(a^i)^{-1}|`` for
    ``i = 1..k``, and ``holds`` is ``minimum > threshold``.
    """
    a = _with_identity(elements)
    k = len(a) - 1
    values = [weight_abs(rep.highest, a[k] / a[i], residue_cardinality) for i in range(k)]
    values += [weight_abs(-rep.lowest, a[i], residue_cardinality) for i in range(1, k + 1)]
    minimum = min(values)
    return minimum > threshold, minimum
