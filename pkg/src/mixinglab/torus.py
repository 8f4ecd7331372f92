"""
The lattice model ``SL(2, Z) x| Z^2`` inside ``SL(3, Z)`` acting on ``T^3``.

An element ``(A, v)`` is the integer matrix ``[[A, v], [0, 1]]`` acting by
``x -> g x mod 1``.  On functions ``(g.f)(x) = f(g^{-1} x)``, which sends the
character ``e_m`` to ``e_{rho*(g) m}`` with ``rho*(g) = (g^{-1})^T``.
Characters ``(0, 0, m3)`` are invariant; the correlation engine refuses
functions with spectral support on that line.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .specproj import TrigPolynomial

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240607


class InvariantSupportError(ValueError):
    """A function has spectral support on the invariant line ``(0, 0, m3)``."""

    def __init__(self, slot: int, witness: tuple):
        super().__init__(f"f_{slot} has invariant frequency {witness}")
        self.slot = slot
        self.witness = witness


def _mat2_mul(a, b):
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
    )


def _mat2_vec(a, v):
    return (a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1])


@dataclass(frozen=True)
class AffineLatticeElement:
    """``(A, v)`` with ``A`` in ``SL(2, Z)`` and ``v`` in ``Z^2``."""

    A: tuple
    v: tuple = (0, 0)

    def __post_init__(self):
        A = tuple(tuple(int(x) for x in row) for row in self.A)
        v = tuple(int(x) for x in self.v)
        if len(A) != 2 or any(len(r) != 2 for r in A) or len(v) != 2:
            raise ValueError("A must be 2x2 and v a 2-vector")
        if A[0][0] * A[1][1] - A[0][1] * A[1][0] != 1:
            raise ValueError(f"det A must be 1, got A = {A}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "v", v)

    @classmethod
    def identity(cls) -> "AffineLatticeElement":
        return cls(((1, 0), (0, 1)), (0, 0))

    @property
    def matrix(self) -> tuple:
        (a, b), (c, d) = self.A
        x, y = self.v
        return ((a, b, x), (c, d, y), (0, 0, 1))

    def compose(self, other: "AffineLatticeElement") -> "AffineLatticeElement":
        """``(A, v)(B, w) = (AB, Aw + v)``."""
        Aw = _mat2_vec(self.A, other.v)
        return AffineLatticeElement(_mat2_mul(self.A, other.A), (Aw[0] + self.v[0], Aw[1] + self.v[1]))

    __matmul__ = compose

    def inverse(self) -> "AffineLatticeElement":
        (a, b), (c, d) = self.A
        inv = ((d, -b), (-c, a))
        w = _mat2_vec(inv, self.v)
        return AffineLatticeElement(inv, (-w[0], -w[1]))

    def power(self, n: int) -> "AffineLatticeElement":
        base = self if n >= 0 else self.inverse()
        result, n = AffineLatticeElement.identity(), abs(n)
        while n:
            if n & 1:
                result = result.compose(base)
            base = base.compose(base)
            n >>= 1
        return result

    def to_dict(self) -> dict:
        return {"A": [list(r) for r in self.A], "v": list(self.v)}


def compose(g: AffineLatticeElement, h: AffineLatticeElement) -> AffineLatticeElement:
    return g.compose(h)


def invert(g: AffineLatticeElement) -> AffineLatticeElement:
    return g.inverse()


def frequency_action(g: AffineLatticeElement, m: Sequence[int]) -> tuple:
    """``rho*(g) m = (g^{-1})^T m``.

    With ``g^{-1} = (A^{-1}, -A^{-1} v)`` this is
    ``(A^{-T} m', m3 - (A^{-1} v) . m')`` for ``m = (m', m3)``.
    """
    (a, b), (c, d) = g.A
    m1, m2, m3 = (int(x) for x in m)
    # A^{-1} = [[d, -b], [-c, a]]
    u1 = d * g.v[0] - b * g.v[1]
    u2 = -c * g.v[0] + a * g.v[1]
    return (d * m1 - c * m2, -b * m1 + a * m2, m3 - u1 * m1 - u2 * m2)


def translate(g: AffineLatticeElement, f: TrigPolynomial) -> TrigPolynomial:
    """``g.f``, the function ``x -> f(g^{-1} x)``."""
    return f.relabel(lambda m: frequency_action(g, m))


def check_zero_mean(fs: Sequence[TrigPolynomial]) -> None:
    for i, f in enumerate(fs):
        if f.dim != 3:
            raise ValueError(f"f_{i} is not a function on T^3")
        for m in f.coeffs:
            if m[0] == 0 and m[1] == 0:
                raise InvariantSupportError(i, m)


def _convolve_all(polys: list) -> dict:
    """Coefficient map of the product, smallest supports first."""
    polys = sorted(polys, key=len)
    acc = dict(polys[0].coeffs)
    for p in polys[1:]:
        out: dict = {}
        for u, cu in acc.items():
            for v, cv in p.coeffs.items():
                m = (u[0] + v[0], u[1] + v[1], u[2] + v[2])
                out[m] = out.get(m, 0) + cu * cv
        acc = out
    return acc


def _split_balanced(polys: list) -> tuple:
    """Split into two groups with support-size products as close as possible."""
    best = None
    n = len(polys)
    logs = [math.log(max(len(p), 1)) for p in polys]
    total = sum(logs)
    for mask in range(1, 2 ** n - 1):
        left = sum(logs[i] for i in range(n) if mask >> i & 1)
        score = abs(total - 2 * left)
        if best is None or score < best[0]:
            best = (score, mask)
    mask = best[1]
    return (
        [p for i, p in enumerate(polys) if mask >> i & 1],
        [p for i, p in enumerate(polys) if not mask >> i & 1],
    )


def _complex_fsum(values) -> complex:
    values = [complex(v) for v in values]
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def exact_multicorrelation(
    fs: Sequence[TrigPolynomial],
    gs: Sequence[AffineLatticeElement],
    budget: int = 1 << 16,
) -> complex:
    """``integral f_0 (g_1.f_1) ... (g_k.f_k)`` over ``T^3``.

    Equals the sum of ``prod c_i(m_i)`` over tuples with
    ``m_0 + sum_i rho*(g_i) m_i = 0``.  When the product of support sizes
    exceeds ``budget`` the factors are split into two balanced groups that
    are convolved separately and contracted at opposite frequencies.
    """
    if len(fs) != len(gs) + 1:
        raise ValueError("need one more function than acting elements")
    check_zero_mean(fs)
    if any(f.is_zero() for f in fs):
        return 0j
    moved = [fs[0]] + [translate(g, f) for g, f in zip(gs, fs[1:])]
    if len(moved) == 1:
        return complex(moved[0].mean())
    size = math.prod(len(p) for p in moved)
    if size <= budget or len(moved) < 3:
        polys = sorted(moved, key=len)
        left, right = polys[:-1], polys[-1:]
    else:
        left, right = _split_balanced(moved)
    lmap = _convolve_all(left)
    rmap = _convolve_all(right)
    terms = []
    for m in sorted(lmap):
        other = rmap.get((-m[0], -m[1], -m[2]))
        if other is not None:
            terms.append(lmap[m] * other)
    return _complex_fsum(terms)


# ---------------------------------------------------------------------------
# Monte Carlo oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MCEstimate:
    estimate: complex
    stderr: float
    samples: int


def _evaluate_slot(f: TrigPolynomial, g_inv_matrix: Optional[np.ndarray], x: np.ndarray) -> np.ndarray:
    if g_inv_matrix is None:
        return f.evaluate(x)
    y = np.mod(x @ g_inv_matrix.T, 1.0)
    return f.evaluate(y)


def _shard(fs, inv_mats, n, seed_seq, chunk):
    rng = np.random.default_rng(seed_seq)
    count, mean, m2 = 0, 0j, 0.0
    remaining = n
    while remaining > 0:
        size = min(chunk, remaining)
        x = rng.random((size, 3))
        vals = _evaluate_slot(fs[0], None, x)
        for f, gm in zip(fs[1:], inv_mats):
            vals = vals * _evaluate_slot(f, gm, x)
        bmean = vals.mean()
        bm2 = float(np.sum(np.abs(vals - bmean) ** 2))
        count, mean, m2 = _merge(count, mean, m2, size, bmean, bm2)
        remaining -= size
    return count, mean, m2


def _merge(na, mean_a, m2_a, nb, mean_b, m2_b):
    """Welford/Chan combination of two partial summaries."""
    if na == 0:
        return nb, mean_b, m2_b
    n = na + nb
    delta = mean_b - mean_a
    mean = mean_a + delta * nb / n
    m2 = m2_a + m2_b + abs(delta) ** 2 * na * nb / n
    return n, mean, m2


def mc_multicorrelation(
    fs: Sequence[TrigPolynomial],
    gs: Sequence[AffineLatticeElement],
    n: int,
    seed: int = DEFAULT_SEED,
    shards: int = 8,
    workers: int = 1,
    chunk: int = 1 << 15,
) -> MCEstimate:
    """Monte Carlo estimate of the multiple correlation.

    Averages ``f_0(x) prod f_i(g_i^{-1} x)`` over ``n`` uniform points,
    pulling each point back through the integer matrix of ``g_i^{-1}``.
    The sample range is split into ``shards`` seeded substreams, so the
    result depends on ``seed`` and ``shards`` but not on ``workers``.
    The standard error is that of the complex mean.
    """
    if n < 2:
        raise ValueError("need at least two samples")
    if len(fs) != len(gs) + 1:
        raise ValueError("need one more function than acting elements")
    if fs[0].is_zero() or any(f.is_zero() for f in fs):
        return MCEstimate(0j, 0.0, n)
    inv_mats = [np.array(g.inverse().matrix, dtype=float) for g in gs]
    shards = max(1, min(shards, n // 2))
    sizes = [n // shards + (1 if i < n % shards else 0) for i in range(shards)]
    children = np.random.SeedSequence(seed).spawn(shards)
    jobs = [(fs, inv_mats, size, child, chunk) for size, child in zip(sizes, children)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: _shard(*job), jobs))
    else:
        parts = [_shard(*job) for job in jobs]
    count, mean, m2 = 0, 0j, 0.0
    for part in parts:
        count, mean, m2 = _merge(count, mean, m2, *part)
    var = m2 / (count - 1)
    return MCEstimate(complex(mean), math.sqrt(var / count), count)


# ---------------------------------------------------------------------------
# Cartan proxies and K-orbits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CartanProxy:
    """Singular values of ``A``; stands in for the ``D+`` part of ``g``."""

    sigma1: float
    sigma2: float

    @property
    def diagonal(self):
        from .repdata import DiagonalElement

        return DiagonalElement((self.sigma1, 1.0 / self.sigma1))


def cartan_proxy(g) -> CartanProxy:
    """Singular values of the SL(2) part via the 2x2 closed form.

    ``A^T A`` has trace ``t`` and determinant 1, so its eigenvalues are
    ``(t +- sqrt(t^2 - 4)) / 2``.  The small one is taken as the reciprocal
    of the large one to avoid cancellation.
    """
    A = g.A if isinstance(g, AffineLatticeElement) else g
    t = sum(A[i][j] ** 2 for i in range(2) for j in range(2))  # trace of A^T A, exact
    disc = t * t - 4
    big = (t + math.sqrt(disc)) / 2 if disc > 0 else 1.0
    sigma1 = math.sqrt(big)
    return CartanProxy(sigma1, 1.0 / sigma1)


# Signed permutation matrices of determinant 1: the rotations by multiples of 90 degrees.
MODEL_K = (
    ((1, 0), (0, 1)),
    ((0, -1), (1, 0)),
    ((-1, 0), (0, -1)),
    ((0, 1), (-1, 0)),
)


def orbit_dimension(f: TrigPolynomial) -> int:
    """Dimension of the span of the finite rotation orbit of ``f``."""
    if f.is_zero():
        return 0
    images = [translate(AffineLatticeElement(k), f) for k in MODEL_K]
    keys = sorted({m for p in images for m in p.coeffs})
    index = {m: i for i, m in enumerate(keys)}
    mat = np.zeros((len(images), len(keys)), dtype=complex)
    for r, p in enumerate(images):
        for m, c in p.coeffs.items():
            mat[r, index[m]] = complex(c)
    return int(np.linalg.matrix_rank(mat))


# ---------------------------------------------------------------------------
# Named functions
# ---------------------------------------------------------------------------


def _normalized(coeffs: dict) -> TrigPolynomial:
    f = TrigPolynomial(3, coeffs)
    return f.scale(1 / f.norm2())


def preset(name: str) -> TrigPolynomial:
    """Named band-limited, real-valued, zero-mean test functions of L^2 norm 1.

    ``cross1``
        ``cos 2pi x1 + cos 2pi x2``, frequencies ``(+-1, 0, 0), (0, +-1, 0)``.
    ``box<R>``
        All frequencies with ``|m|_inf <= R`` and ``(m1, m2) != 0``, with
        weight ``1 / (1 + |m|^2)``.
    ``axis1``
        ``cos 2pi x1``.
    ``wide<R>``
        Frequencies ``(m1, m2, 0)`` with ``0 < |m|_inf <= R`` and weight
        ``1 / (1 + m1^2 + m2^2)``; a smooth function truncated at band R.
    """
    if name == "cross1":
        return _normalized({m: 1 for m in [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]})
    if name == "axis1":
        return _normalized({(1, 0, 0): 1, (-1, 0, 0): 1})
    if name.startswith("box"):
        R = int(name[3:])
        coeffs = {}
        rng = range(-R, R + 1)
        for m1 in rng:
            for m2 in rng:
                if m1 == 0 and m2 == 0:
                    continue
                for m3 in rng:
                    r2 = m1 * m1 + m2 * m2 + m3 * m3
                    coeffs[(m1, m2, m3)] = Fraction(1, 1 + r2)
        return _normalized(coeffs)
    if name.startswith("wide"):
        R = int(name[4:])
        coeffs = {}
        for m1 in range(-R, R + 1):
            for m2 in range(-R, R + 1):
                if m1 or m2:
                    coeffs[(m1, m2, 0)] = 1.0 / (1 + m1 * m1 + m2 * m2)
        return _normalized(coeffs)
    raise KeyError(f"unknown preset {name!r}")


# ---------------------------------------------------------------------------
# Decay sweeps
# ---------------------------------------------------------------------------


@dataclass
class SweepConfig:
    """Bound and Monte Carlo settings for a decay sweep."""

    s: Optional[float] = None
    C: float = 1.0
    C_prime: float = 1.0
    d: Optional[Sequence[int]] = None
    mc_samples: int = 0
    seed: int = DEFAULT_SEED
    shards: int = 8
    lambda_start: int = 0
    workers: int = 1


@dataclass
class CorrelationReport:
    """One row of a decay sweep."""

    powers: tuple
    elements: tuple
    sigma1: tuple
    q_used: Fraction
    R_lambda: float
    R_rho: float
    rhs_bound: Optional[float]
    C_used: float
    exact: complex
    applicable: bool
    divergence_min: float
    s: float
    d0: int
    dk: int
    mc_estimate: Optional[complex] = None
    mc_stderr: Optional[float] = None
    functions: tuple = field(default_factory=tuple)

    @property
    def k(self) -> int:
        return len(self.powers)

    @property
    def R_factor(self) -> float:
        return self.R_lambda * self.R_rho

    @property
    def unit_bound(self) -> Optional[float]:
        """The bound with ``C = 1``."""
        if self.rhs_bound is None:
            return None
        return self.rhs_bound / self.C_used

    @property
    def ratio(self) -> Optional[float]:
        if self.rhs_bound is None:
            return None
        return abs(self.exact) / self.rhs_bound

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "powers": list(self.powers),
            "elements": [g.to_dict() for g in self.elements],
            "functions": list(self.functions),
            "sigma1_list": list(self.sigma1),
            "q_used": str(self.q_used),
            "s": self.s,
            "d0": self.d0,
            "dk": self.dk,
            "C": self.C_used,
            "R_lambda": self.R_lambda,
            "R_rho": self.R_rho,
            "R_factor": self.R_factor,
            "applicable": self.applicable,
            "divergence_min": self.divergence_min,
            "rhs_bound": self.rhs_bound,
            "exact_re": self.exact.real,
            "exact_im": self.exact.imag,
            "exact_abs": abs(self.exact),
            "mc_est_re": None if self.mc_estimate is None else self.mc_estimate.real,
            "mc_est_im": None if self.mc_estimate is None else self.mc_estimate.imag,
            "mc_stderr": self.mc_stderr,
            "ratio": self.ratio,
            "cartan": "singular-value proxy",
        }


def default_spectral_radius(fs: Sequence[TrigPolynomial]) -> int:
    """Smallest integer ``s > 1`` with every support inside ``Ann(s)``."""
    return max(2, max(f.spectral_radius() for f in fs) + 1)


def correlation_report(
    fs: Sequence[TrigPolynomial],
    base: AffineLatticeElement,
    powers: Sequence[int],
    rep,
    q,
    config: SweepConfig,
    names: Sequence[str] = (),
) -> CorrelationReport:
    """Exact correlation, optional MC check and bound for one power tuple."""
    from .bounds import BoundInputs, rhs_theorem_3_3
    from .repdata import divergence_check, order_by_highest_weight, ratio_factor

    gs = [base.power(n) for n in powers]
    exact = exact_multicorrelation(fs, gs)
    mc = None
    if config.mc_samples:
        mc = mc_multicorrelation(fs, gs, config.mc_samples, seed=config.seed, shards=config.shards)
    proxies = [cartan_proxy(g) for g in gs]
    diag = order_by_highest_weight(rep, [p.diagonal for p in proxies])
    factors = ratio_factor(rep, diag, lambda_start=config.lambda_start)
    holds, minimum = divergence_check(rep, diag, config.C_prime)
    s = config.s if config.s is not None else default_spectral_radius(fs)
    if config.d is not None:
        d0, dk = config.d[0], config.d[-1]
    else:
        d0, dk = orbit_dimension(fs[0]), orbit_dimension(fs[-1])
    bound = None
    if holds and factors.lam > 0 and factors.rho > 0:
        inputs = BoundInputs(s=s, q=q, d0=d0, dk=dk, C=config.C, C_prime=config.C_prime)
        bound = rhs_theorem_3_3(inputs, factors.lam, factors.rho)
    return CorrelationReport(
        powers=tuple(powers),
        elements=tuple(gs),
        sigma1=tuple(p.sigma1 for p in proxies),
        q_used=Fraction(q),
        R_lambda=float(factors.lam),
        R_rho=float(factors.rho),
        rhs_bound=bound,
        C_used=config.C,
        exact=exact,
        applicable=bound is not None,
        divergence_min=float(minimum),
        s=float(s),
        d0=d0,
        dk=dk,
        mc_estimate=None if mc is None else mc.estimate,
        mc_stderr=None if mc is None else mc.stderr,
        functions=tuple(names),
    )


def decay_sweep(
    fs: Sequence[TrigPolynomial],
    base: AffineLatticeElement,
    power_tuples: Sequence[Sequence[int]],
    rep,
    q,
    config: Optional[SweepConfig] = None,
    names: Sequence[str] = (),
) -> list:
    """Reports for each power tuple, sorted by power tuple.

    Rows are independent; ``config.workers > 1`` evaluates them on a
    thread pool without changing the output.
    """
    config = config or SweepConfig()
    if config.d is None:
        config = replace(config, d=(orbit_dimension(fs[0]), orbit_dimension(fs[-1])))
    if config.s is None:
        config = replace(config, s=default_spectral_radius(fs))
    if cartan_proxy(base).sigma1 <= 1 + 1e-12:
        warnings.warn("base element is not hyperbolic; no decay expected", RuntimeWarning)
    tuples = sorted(tuple(int(n) for n in p) for p in power_tuples)
    for p in tuples:
        if len(p) != len(fs) - 1:
            raise ValueError(f"power tuple {p} does not match {len(fs) - 1} acting slots")

    def row(p):
        return correlation_report(fs, base, p, rep, q, config, names)

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            return list(pool.map(row, tuples))
    return [row(p) for p in tuples]


CSV_COLUMNS = (
    "k",
    "powers",
    "sigma1_list",
    "q_used",
    "R_factor",
    "rhs_bound",
    "exact_re",
    "exact_im",
    "exact_abs",
    "mc_est_re",
    "mc_est_im",
    "mc_stderr",
    "ratio",
)


def _fmt(x) -> str:
    if x is None:
        return "NA"
    return repr(float(x))


def csv_row(report: CorrelationReport) -> list:
    return [
        str(report.k),
        ";".join(str(n) for n in report.powers),
        ";".join(repr(s) for s in report.sigma1),
        str(report.q_used),
        _fmt(report.R_factor),
        _fmt(report.rhs_bound),
        _fmt(report.exact.real),
        _fmt(report.exact.imag),
        _fmt(abs(report.exact)),
        "" if report.mc_estimate is None else _fmt(report.mc_estimate.real),
        "" if report.mc_estimate is None else _fmt(report.mc_estimate.imag),
        "" if report.mc_stderr is None else _fmt(report.mc_stderr),
        _fmt(report.ratio),
    ]
