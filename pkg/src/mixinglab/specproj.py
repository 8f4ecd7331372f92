"""
Fourier multipliers on trigonometric polynomials over the torus T^d.

For the translation action of R^d on T^d the approximate projection
``P_phi`` is the Fourier multiplier ``c_m -> phi(m) c_m``.  Everything here
works on finite coefficient maps, so symbols are only ever evaluated on the
support of the operand.  Frequency space is normed by the max-norm.

Coefficients may be any Python numbers.  With integer, ``Fraction`` or
dyadic-rational floating values the operator identities hold with exact
equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np


def max_norm(m: Sequence[int]) -> int:
    return max((abs(x) for x in m), default=0)


def _is_zero(c) -> bool:
    return c == 0


class TrigPolynomial:
    """Finite sum ``sum_m c_m exp(2 pi i m.x)`` on ``T^d``.

    Zero coefficients are never stored.  Instances are immutable.
    """

    __slots__ = ("dim", "_coeffs")

    def __init__(self, dim: int, coeffs: Optional[Mapping] = None):
        self.dim = int(dim)
        clean = {}
        for m, c in (coeffs or {}).items():
            key = tuple(int(x) for x in m)
            if len(key) != self.dim:
                raise ValueError(f"frequency {m} has wrong length for dimension {dim}")
            if not _is_zero(c):
                clean[key] = clean.get(key, 0) + c
                if _is_zero(clean[key]):
                    del clean[key]
        self._coeffs = MappingProxyType(dict(sorted(clean.items())))

    @classmethod
    def character(cls, m: Sequence[int], coeff=1) -> "TrigPolynomial":
        return cls(len(m), {tuple(m): coeff})

    @classmethod
    def constant(cls, dim: int, value=1) -> "TrigPolynomial":
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def zero(cls, dim: int) -> "TrigPolynomial":
        return cls(dim)

    @property
    def coeffs(self) -> Mapping:
        return self._coeffs

    def support(self) -> list:
        return list(self._coeffs)

    def __len__(self):
        return len(self._coeffs)

    def __getitem__(self, m) -> complex:
        return self._coeffs.get(tuple(m), 0)

    def __eq__(self, other):
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        return self.dim == other.dim and dict(self._coeffs) == dict(other._coeffs)

    def __hash__(self):
        return hash((self.dim, tuple(self._coeffs.items())))

    def __repr__(self):
        terms = ", ".join(f"{m}: {c!r}" for m, c in self._coeffs.items())
        return f"TrigPolynomial(dim={self.dim}, {{{terms}}})"

    def is_zero(self) -> bool:
        return not self._coeffs

    def _check_dim(self, other):
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        self._check_dim(other)
        out = dict(self._coeffs)
        for m, c in other._coeffs.items():
            out[m] = out.get(m, 0) + c
        return TrigPolynomial(self.dim, out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a) -> "TrigPolynomial":
        return TrigPolynomial(self.dim, {m: a * c for m, c in self._coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, TrigPolynomial):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = scale

    def conj(self) -> "TrigPolynomial":
        """Complex conjugate function: ``c'_m = conj(c_{-m})``."""
        return TrigPolynomial(
            self.dim,
            {tuple(-x for x in m): _conj(c) for m, c in self._coeffs.items()},
        )

    def mean(self):
        return self[(0,) * self.dim]

    def norm2_sq(self):
        """Squared L^2 norm, by Parseval."""
        return sum((_abs2(c) for c in self._coeffs.values()), start=0)

    def norm2(self) -> float:
        return math.sqrt(self.norm2_sq())

    def inner(self, other: "TrigPolynomial"):
        """``<f, g> = integral f conj(g)``."""
        self._check_dim(other)
        return sum(
            (c * _conj(other._coeffs[m]) for m, c in self._coeffs.items() if m in other._coeffs),
            start=0,
        )

    def sup_bound(self) -> float:
        """``sum |c_m|``, an upper bound for the sup norm."""
        return float(sum(abs(c) for c in self._coeffs.values()))

    def spectral_radius(self) -> int:
        """Largest max-norm of a frequency in the support."""
        return max((max_norm(m) for m in self._coeffs), default=0)

    def relabel(self, fn: Callable[[tuple], tuple]) -> "TrigPolynomial":
        """Move each coefficient from ``m`` to ``fn(m)``; ``fn`` must be injective."""
        out = {}
        for m, c in self._coeffs.items():
            key = tuple(fn(m))
            if key in out:
                raise ValueError("frequency relabelling is not injective")
            out[key] = c
        return TrigPolynomial(len(next(iter(out))) if out else self.dim, out)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at points ``x`` of shape ``(N, d)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if not self._coeffs:
            return np.zeros(x.shape[0], dtype=complex)
        freqs = np.array(list(self._coeffs), dtype=float)
        coeffs = np.array([complex(c) for c in self._coeffs.values()])
        phase = x @ freqs.T
        return np.exp(2j * np.pi * phase) @ coeffs

    def to_dict(self) -> dict:
        terms = []
        for m, c in self._coeffs.items():
            c = complex(c)
            terms.append({"freq": list(m), "re": c.real, "im": c.imag})
        return {"dim": self.dim, "terms": terms}

    @classmethod
    def from_dict(cls, data: Mapping) -> "TrigPolynomial":
        coeffs = {}
        for t in data["terms"]:
            im = t.get("im", 0.0)
            c = complex(t["re"], im) if im else t["re"]
            coeffs[tuple(t["freq"])] = c
        return cls(int(data["dim"]), coeffs)


def _conj(c):
    return c.conjugate() if isinstance(c, complex) else c


def _abs2(c):
    if isinstance(c, complex):
        return c.real * c.real + c.imag * c.imag
    return c * c


def multiply(f: TrigPolynomial, g: TrigPolynomial) -> TrigPolynomial:
    """Pointwise product, i.e. convolution of coefficient maps."""
    f._check_dim(g)
    if len(f) > len(g):
        f, g = g, f
    out: dict = {}
    for u, cu in f.coeffs.items():
        for v, cv in g.coeffs.items():
            m = tuple(a + b for a, b in zip(u, v))
            out[m] = out.get(m, 0) + cu * cv
    return TrigPolynomial(f.dim, out)


# ---------------------------------------------------------------------------
# Symbols
# ---------------------------------------------------------------------------


class SpectralSymbol:
    """A function on integer frequencies used as a Fourier multiplier."""

    def __call__(self, m: tuple):
        raise NotImplementedError

    def finite_support(self) -> Optional[frozenset]:
        """The support, if the symbol is known to be finitely supported."""
        return None

    def __mul__(self, other: "SpectralSymbol") -> "SpectralSymbol":
        return ProductSymbol(self, other)

    def __add__(self, other: "SpectralSymbol") -> "SpectralSymbol":
        return SumSymbol(self, other)

    def conj(self) -> "SpectralSymbol":
        return ConjugateSymbol(self)


@dataclass(frozen=True)
class FiniteIndicator(SpectralSymbol):
    """Indicator function of a finite set of frequencies."""

    freqs: frozenset

    def __init__(self, freqs: Iterable):
        object.__setattr__(self, "freqs", frozenset(tuple(int(x) for x in m) for m in freqs))

    def __call__(self, m):
        return 1 if tuple(m) in self.freqs else 0

    def finite_support(self):
        return self.freqs


@dataclass(frozen=True)
class TableSymbol(SpectralSymbol):
    """Finitely supported symbol with arbitrary values."""

    table: Mapping

    def __init__(self, table: Mapping):
        object.__setattr__(
            self, "table", MappingProxyType({tuple(m): v for m, v in table.items() if v != 0})
        )

    def __call__(self, m):
        return self.table.get(tuple(m), 0)

    def finite_support(self):
        return frozenset(self.table)

    def __hash__(self):
        return hash(tuple(sorted(self.table.items())))


@dataclass(frozen=True)
class Constant(SpectralSymbol):
    value: object = 1

    def __call__(self, m):
        return self.value

    def finite_support(self):
        return frozenset() if self.value == 0 else None


@dataclass(frozen=True)
class AnnulusIndicator(SpectralSymbol):
    """Indicator of the open annulus ``1/s < |m| < s``."""

    s: object

    def __post_init__(self):
        if not self.s > 1:
            raise ValueError("annulus parameter must exceed 1")

    def __call__(self, m):
        return int(in_annulus(m, self.s))


@dataclass(frozen=True)
class BallIndicator(SpectralSymbol):
    """Indicator of ``|m| < s`` (``complement=True``: ``|m| >= s``)."""

    s: object
    complement: bool = False

    def __call__(self, m):
        inside = max_norm(m) < self.s
        return int(inside != self.complement)


@dataclass(frozen=True)
class RadialProfile(SpectralSymbol):
    """Piecewise-linear function of ``r = |m|``.

    ``knots`` is a sequence of ``(r, value)`` with increasing ``r``; the
    profile interpolates linearly between knots and is ``outside`` beyond
    them.  With ``Fraction`` knots the values at integer radii are exact.
    """

    knots: tuple
    outside: object = 0

    def __post_init__(self):
        knots = tuple((r, v) for r, v in self.knots)
        if any(b[0] < a[0] for a, b in zip(knots, knots[1:])):
            raise ValueError("knot radii must be nondecreasing")
        if not knots:
            raise ValueError("at least one knot required")
        object.__setattr__(self, "knots", knots)

    def __call__(self, m):
        r = max_norm(m)
        knots = self.knots
        if r < knots[0][0] or r > knots[-1][0]:
            return self.outside
        for (r0, v0), (r1, v1) in zip(knots, knots[1:]):
            if r0 <= r <= r1:
                if r == r0:
                    return v0
                if r == r1:
                    return v1
                return v0 + (v1 - v0) * (r - r0) / (r1 - r0)
        return knots[0][1]


def annulus_approximant(s, k: int) -> RadialProfile:
    """Smoothed annulus indicator: 1 on Ann(s), 0 outside Ann(s + 1/k)."""
    s = Fraction(s) if isinstance(s, (int, Fraction)) else s
    if not s > 1 or k < 1:
        raise ValueError("need s > 1 and k >= 1")
    outer = s + Fraction(1, k) if isinstance(s, Fraction) else s + 1.0 / k
    return RadialProfile(((1 / outer, 0), (1 / s, 1), (s, 1), (outer, 0)))


@dataclass(frozen=True)
class ProductSymbol(SpectralSymbol):
    left: SpectralSymbol
    right: SpectralSymbol

    def __call__(self, m):
        return self.left(m) * self.right(m)

    def finite_support(self):
        a, b = self.left.finite_support(), self.right.finite_support()
        if a is None:
            return b
        if b is None:
            return a
        return a & b


@dataclass(frozen=True)
class SumSymbol(SpectralSymbol):
    left: SpectralSymbol
    right: SpectralSymbol

    def __call__(self, m):
        return self.left(m) + self.right(m)

    def finite_support(self):
        a, b = self.left.finite_support(), self.right.finite_support()
        if a is None or b is None:
            return None
        return a | b


@dataclass(frozen=True)
class ConjugateSymbol(SpectralSymbol):
    base: SpectralSymbol

    def __call__(self, m):
        return _conj(self.base(m))

    def finite_support(self):
        return self.base.finite_support()


@dataclass(frozen=True)
class TransportedSymbol(SpectralSymbol):
    """``m -> base(T m)`` for an integer matrix ``T``."""

    base: SpectralSymbol
    matrix: tuple

    def __call__(self, m):
        return self.base(_matvec(self.matrix, m))


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------


def apply_multiplier(phi: SpectralSymbol, f: TrigPolynomial) -> TrigPolynomial:
    """``P_phi f``: multiply each coefficient ``c_m`` by ``phi(m)``."""
    return TrigPolynomial(f.dim, {m: phi(m) * c for m, c in f.coeffs.items()})


def _matvec(a, m) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, m)) for row in a)


def _as_int_matrix(g) -> tuple:
    g = tuple(tuple(int(x) for x in row) for row in g)
    if any(len(row) != len(g) for row in g):
        raise ValueError("matrix must be square")
    return g


def int_det(a) -> int:
    """Determinant of a small integer matrix by cofactor expansion."""
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    return sum(
        (-1) ** j * a[0][j] * int_det(tuple(row[:j] + row[j + 1:] for row in a[1:]))
        for j in range(n)
    )


def int_inverse(a) -> tuple:
    """Inverse of a unimodular integer matrix, via the adjugate."""
    a = _as_int_matrix(a)
    det = int_det(a)
    if det not in (1, -1):
        raise ValueError(f"matrix is not unimodular (det = {det})")
    n = len(a)
    if n == 1:
        return ((det,),)
    cof = [
        [
            (-1) ** (i + j) * int_det(tuple(row[:j] + row[j + 1:] for k, row in enumerate(a) if k != i))
            for j in range(n)
        ]
        for i in range(n)
    ]
    return tuple(tuple(cof[j][i] * det for j in range(n)) for i in range(n))


def transpose(a) -> tuple:
    return tuple(zip(*a))


def dual_matrix(g) -> tuple:
    """``rho*(g) = (g^{-1})^T``, the action of ``g`` on frequencies."""
    return transpose(int_inverse(g))


def automorphism_action(g, f: TrigPolynomial) -> TrigPolynomial:
    """``sigma(g) f = f(g^{-1} x)``; sends ``e_m`` to ``e_{rho*(g) m}``."""
    dual = dual_matrix(g)
    if len(dual) != f.dim:
        raise ValueError("matrix size does not match the torus dimension")
    return f.relabel(lambda m: _matvec(dual, m))


def conjugated_multiplier(g, phi: SpectralSymbol, f: TrigPolynomial) -> TrigPolynomial:
    """``sigma(g) P_phi sigma(g^{-1}) f``.

    Equals ``P_psi f`` with ``psi(m) = phi(rho*(g^{-1}) m) = phi(g^T m)``;
    the equality is asserted on every call.
    """
    g = _as_int_matrix(g)
    g_inv = int_inverse(g)
    result = automorphism_action(g, apply_multiplier(phi, automorphism_action(g_inv, f)))
    direct = apply_multiplier(TransportedSymbol(phi, transpose(g)), f)
    if result != direct:
        raise AssertionError("conjugation law violated")
    return result


# ---------------------------------------------------------------------------
# Sumsets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SumsetCheck:
    """Outcome of a sumset projection check.

    ``passed`` is True when the hypothesis holds and the product is fixed
    by ``P_omega``.  ``witness`` is a sumset frequency where ``omega != 1``,
    chosen where the product has a nonzero coefficient when possible.
    """

    passed: bool
    hypothesis_holds: bool
    identity_holds: bool
    witness: Optional[tuple] = None


def effective_support(phi: SpectralSymbol, f: TrigPolynomial) -> frozenset:
    """Support of ``phi`` if finite, else where ``phi`` is nonzero on supp(f)."""
    supp = phi.finite_support()
    if supp is not None:
        return supp
    return frozenset(m for m in f.coeffs if phi(m) != 0)


def sumset(a: Iterable, b: Iterable) -> frozenset:
    b = list(b)
    return frozenset(tuple(x + y for x, y in zip(u, v)) for u in a for v in b)


def sumset_projection_check(
    phi: SpectralSymbol,
    psi: SpectralSymbol,
    omega: SpectralSymbol,
    f: TrigPolynomial,
    g: TrigPolynomial,
) -> SumsetCheck:
    """Check ``P_omega(P_phi f * P_psi g) == P_phi f * P_psi g``.

    The hypothesis is that ``omega == 1`` on ``supp(phi) + supp(psi)``.
    """
    product = multiply(apply_multiplier(phi, f), apply_multiplier(psi, g))
    total = sumset(effective_support(phi, f), effective_support(psi, g))
    bad = sorted(m for m in total if omega(m) != 1)
    witness = None
    if bad:
        live = [m for m in bad if m in product.coeffs]
        witness = (live or bad)[0]
    identity = apply_multiplier(omega, product) == product
    ok = not bad
    return SumsetCheck(ok and identity, ok, identity, witness)


def sumset_corollary_check(
    s: Iterable, t: Iterable, f: TrigPolynomial, g: TrigPolynomial
) -> bool:
    """``P_{S+T}(P_S f * P_T g) == P_S f * P_T g`` for finite sets S, T."""
    s, t = FiniteIndicator(s), FiniteIndicator(t)
    product = multiply(apply_multiplier(s, f), apply_multiplier(t, g))
    st = FiniteIndicator(sumset(s.freqs, t.freqs))
    return apply_multiplier(st, product) == product


# ---------------------------------------------------------------------------
# Annuli, norms and cones
# ---------------------------------------------------------------------------


def in_annulus(m, s) -> bool:
    r = max_norm(m)
    return 1 / _exact(s) < r < s


def _exact(s):
    return Fraction(s) if isinstance(s, (int, Fraction)) else s


def annulus_truncate(s, f: TrigPolynomial) -> TrigPolynomial:
    """Keep exactly the coefficients with ``1/s < |m| < s``."""
    if not s > 1:
        raise ValueError("annulus parameter must exceed 1")
    return TrigPolynomial(f.dim, {m: c for m, c in f.coeffs.items() if in_annulus(m, s)})


def in_space_d(f: TrigPolynomial, s) -> bool:
    """Whether ``f`` is spectrally supported in ``Ann(s)``."""
    return annulus_truncate(s, f) == f


@dataclass(frozen=True)
class PMNorms:
    minus: float
    plus: float

    @property
    def pm(self) -> float:
        return self.minus + self.plus


def pm_norms(A, f: TrigPolynomial) -> PMNorms:
    """The ``(-, A)``, ``(+, A)`` and ``(+-, A)`` norms of ``f``.

    The ball keeps ``|m| < s`` and its complement ``|m| >= s``, so the
    suprema over ``s`` are reached at (or just above) the finitely many
    radii ``|m|`` in the support.  A nonzero mean makes the minus norm
    infinite.
    """
    if not A > 0:
        raise ValueError("A must be positive")
    if f.is_zero():
        return PMNorms(0.0, 0.0)
    by_radius: dict = {}
    for m, c in f.coeffs.items():
        r = max_norm(m)
        by_radius[r] = by_radius.get(r, 0) + _abs2(c)
    radii = sorted(by_radius)
    if radii[0] == 0:
        minus = math.inf
    else:
        minus, inside = 0.0, 0
        for r in radii:
            inside += by_radius[r]
            minus = max(minus, r ** (-A) * math.sqrt(inside))
    plus, outside = 0.0, sum(by_radius.values())
    for r in radii:
        if r > 0:
            plus = max(plus, r ** A * math.sqrt(outside))
        outside -= by_radius[r]
    return PMNorms(minus, plus)


CONE_1 = "cone1"
CONE_2 = "cone2"


@dataclass(frozen=True)
class ConeSpec:
    """``{v : |pi(v)| <= c and |v| >= s}`` with ``pi`` a coordinate projection."""

    c: object
    s: object
    indices: tuple
    variant: str = CONE_1

    def __post_init__(self):
        if self.c < 0 or self.s < 0:
            raise ValueError("cone parameters must be nonnegative")
        if self.variant not in (CONE_1, CONE_2):
            raise ValueError(f"unknown cone variant {self.variant!r}")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))


def cone_membership(spec: ConeSpec, m) -> bool:
    if any(i < 0 or i >= len(m) for i in spec.indices):
        raise IndexError("cone coordinate index out of range")
    proj = max((abs(m[i]) for i in spec.indices), default=0)
    return proj <= spec.c and max_norm(m) >= spec.s


def mass_on(f: TrigPolynomial, pred: Callable[[tuple], bool]) -> float:
    """``|P_U f|_2`` for the set ``U = {m : pred(m)}``."""
    return math.sqrt(sum(_abs2(c) for m, c in f.coeffs.items() if pred(m)))


def cone_mass(spec: ConeSpec, f: TrigPolynomial) -> float:
    return mass_on(f, lambda m: cone_membership(spec, m))


def lattice_annulus(dim: int, s) -> list:
    """Integer points of ``Ann(s)``."""
    bound = math.ceil(s) - 1 if float(s) == math.ceil(s) else math.floor(s)
    rng = range(-bound, bound + 1)
    pts = np.array(np.meshgrid(*[rng] * dim, indexing="ij")).reshape(dim, -1).T
    return [tuple(int(x) for x in p) for p in pts if in_annulus(p, s)]


def in_image_sum(m, duals: Sequence[Sequence], s) -> bool:
    """Whether ``m`` lies in ``sum_i T_i(Ann(s))`` for diagonal maps ``T_i``.

    ``duals`` holds the diagonals of the ``T_i`` (exact Fractions where
    possible).  All summands but the last range over the lattice points of
    ``Ann(s)``; the last summand is solved for and may be any real point.
    With a single map the test is exact membership in ``T(Ann(s))``.
    """
    if not duals:
        raise ValueError("need at least one map")
    dim = len(m)
    *head, last = duals
    pts = lattice_annulus(dim, s)

    def rest_ok(target):
        pre = tuple(Fraction(t) / d if isinstance(d, (int, Fraction)) else t / d for t, d in zip(target, last))
        r = max(abs(x) for x in pre)
        return 1 / _exact(s) < r < s

    def search(i, target):
        if i == len(head):
            return rest_ok(target)
        diag = head[i]
        for p in pts:
            image = tuple(d * x for d, x in zip(diag, p))
            if search(i + 1, tuple(t - y for t, y in zip(target, image))):
                return True
        return False

    return search(0, tuple(m))


def spectral_set_membership(m, rep, elements, s, variant: str = "X1", residue_cardinality=None) -> bool:
    """Membership of a frequency in ``X_1(a, s)`` or ``X_2(a, s)``.

    ``X_1 = Ann(s) & sum_i rho*(a^i) Ann(s)`` and
    ``X_2 = Ann(s) & sum_i rho*(a^i / a^k) Ann(s)``.  Frequencies are in the
    weight basis of V, in the order of ``rep.weights``.
    """
    from .repdata import evaluate_weight

    if not in_annulus(m, s):
        return False
    top = elements[-1]
    duals = []
    for a in elements:
        b = a / top if variant == "X2" else a
        diag = []
        for w, d in zip(rep.weights, rep.dims):
            val = evaluate_weight(w, b)
            if b.mode != "archimedean":
                val = Fraction(residue_cardinality) ** (-val)
            inv = Fraction(1) / val if isinstance(val, (int, Fraction)) else 1.0 / val
            diag.extend([inv] * d)
        duals.append(tuple(diag))
    if variant not in ("X1", "X2"):
        raise ValueError("variant must be 'X1' or 'X2'")
    return in_image_sum(m, duals, s)


def spectral_set_mass(f: TrigPolynomial, rep, elements, s, variant: str = "X1") -> float:
    return mass_on(f, lambda m: spectral_set_membership(m, rep, elements, s, variant))
