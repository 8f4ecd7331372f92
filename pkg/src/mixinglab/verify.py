"""
Randomized property suites for the operator, lattice and splitting code.

Random coefficients and symbol values are dyadic rationals with small
numerators, so every identity checked here must hold with exact equality
in floating point.  Each suite returns a :class:`SuiteResult` whose
``failures`` carry a witness for every violated instance.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import slnreduce as sr
from .repdata import Q_EXPONENT, DiagonalElement
from .specproj import (
    AnnulusIndicator,
    Constant,
    FiniteIndicator,
    RadialProfile,
    TableSymbol,
    TrigPolynomial,
    annulus_approximant,
    apply_multiplier,
    conjugated_multiplier,
    multiply,
    sumset,
    sumset_corollary_check,
    sumset_projection_check,
    TransportedSymbol,
    transpose,
)
from .torus import AffineLatticeElement, compose, exact_multicorrelation, frequency_action, translate


@dataclass
class SuiteResult:
    name: str
    trials: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and self.trials > 0

    def fail(self, check: str, **witness):
        self.failures.append({"check": check, **{k: repr(v) for k, v in witness.items()}})

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.trials} trials, {len(self.failures)} failures"


# ---------------------------------------------------------------------------
# Random objects
# ---------------------------------------------------------------------------


def dyadic(rng: random.Random, lo: int = -8, hi: int = 8, denom: int = 8) -> float:
    return rng.randint(lo, hi) / denom


def random_coeff(rng: random.Random) -> complex:
    return complex(dyadic(rng), dyadic(rng))


def random_freq(rng: random.Random, dim: int, radius: int) -> tuple:
    return tuple(rng.randint(-radius, radius) for _ in range(dim))


def random_poly(rng: random.Random, dim: int = 3, terms: int = 6, radius: int = 3, avoid_line: bool = False) -> TrigPolynomial:
    coeffs = {}
    cap = (2 * radius + 1) ** dim - (2 * radius + 1 if avoid_line else 0)
    terms = min(terms, cap)
    while len(coeffs) < terms:
        m = random_freq(rng, dim, radius)
        if avoid_line and m[0] == 0 and m[1] == 0:
            continue
        c = random_coeff(rng)
        if c:
            coeffs[m] = c
    return TrigPolynomial(dim, coeffs)


def random_symbol(rng: random.Random, dim: int, radius: int, real: bool = False):
    kind = rng.choice(["indicator", "table", "radial", "annulus", "approx", "product"])
    if kind == "indicator":
        return FiniteIndicator(random_freq(rng, dim, radius) for _ in range(rng.randint(1, 12)))
    if kind == "table":
        table = {}
        for _ in range(rng.randint(1, 12)):
            table[random_freq(rng, dim, radius)] = dyadic(rng) if real else random_coeff(rng)
        return TableSymbol(table)
    if kind == "radial":
        # power-of-two gaps keep interpolated values dyadic
        r0 = rng.randint(0, radius)
        r1 = r0 + 2 ** rng.randint(0, 1)
        r = (r0, r1, r1 + 2 ** rng.randint(0, 2))
        return RadialProfile(tuple((Fraction(x), Fraction(rng.randint(0, 8), 8)) for x in r))
    if kind == "annulus":
        return AnnulusIndicator(Fraction(rng.randint(3, 2 * radius + 2), 2))
    if kind == "approx":
        return annulus_approximant(Fraction(rng.randint(3, 2 * radius), 2), rng.choice([1, 2, 4]))
    return random_symbol(rng, dim, radius, real) * random_symbol(rng, dim, radius, real)


def random_unimodular(rng: random.Random, dim: int, steps: int = 6) -> tuple:
    """Random integer matrix of determinant +-1 from elementary moves."""
    m = [[int(i == j) for j in range(dim)] for i in range(dim)]
    if dim == 1:
        return ((rng.choice([-1, 1]),),)
    for _ in range(steps):
        i, j = rng.sample(range(dim), 2)
        k = rng.choice([-2, -1, 1, 2])
        m[i] = [a + k * b for a, b in zip(m[i], m[j])]
    if rng.random() < 0.5:
        i, j = rng.sample(range(dim), 2)
        m[i], m[j] = m[j], m[i]
    return tuple(tuple(row) for row in m)


def random_sl2z(rng: random.Random, steps: int = 4) -> tuple:
    a = ((1, 0), (0, 1))
    for _ in range(steps):
        k = rng.choice([-2, -1, 1, 2])
        e = ((1, k), (0, 1)) if rng.random() < 0.5 else ((1, 0), (k, 1))
        a = tuple(
            tuple(sum(a[i][t] * e[t][j] for t in range(2)) for j in range(2)) for i in range(2)
        )
    return a


def random_element(rng: random.Random) -> AffineLatticeElement:
    return AffineLatticeElement(random_sl2z(rng), (rng.randint(-3, 3), rng.randint(-3, 3)))


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def operator_identity_suite(trials: int = 1000, seed: int = 1) -> SuiteResult:
    """Homomorphism, adjointness, positivity and the conjugation law."""
    rng = random.Random(seed)
    res = SuiteResult("operator identities")
    for _ in range(trials):
        dim = rng.choice([1, 2, 3])
        radius = 3
        f = random_poly(rng, dim, rng.randint(1, 10), radius)
        g = random_poly(rng, dim, rng.randint(1, 10), radius)
        phi = random_symbol(rng, dim, radius)
        psi = random_symbol(rng, dim, radius)
        res.trials += 1

        lhs = apply_multiplier(phi * psi, f)
        rhs = apply_multiplier(phi, apply_multiplier(psi, f))
        if lhs != rhs:
            res.fail("homomorphism", phi=phi, psi=psi, f=f)

        if apply_multiplier(phi, f).inner(g) != f.inner(apply_multiplier(phi.conj(), g)):
            res.fail("adjoint", phi=phi, f=f, g=g)

        upper = random_symbol(rng, dim, radius, real=True)
        upper = TableSymbol({m: abs(upper(m)) for m in f.coeffs})
        shrink = TableSymbol({m: Fraction(rng.randint(0, 4), 4) for m in f.coeffs})
        lower = upper * shrink
        big = apply_multiplier(upper, f).inner(f)
        small = apply_multiplier(lower, f).inner(f)
        if not (big.real >= small.real >= 0 and big.imag == 0 and small.imag == 0):
            res.fail("positivity", upper=upper, lower=lower, f=f)

        gm = random_unimodular(rng, dim)
        try:
            got = conjugated_multiplier(gm, phi, f)
        except AssertionError:
            res.fail("conjugation", g=gm, phi=phi, f=f)
            continue
        if got != apply_multiplier(TransportedSymbol(phi, transpose(gm)), f):
            res.fail("conjugation", g=gm, phi=phi, f=f)
    return res


def sumset_suite(trials: int = 500, seed: int = 2) -> SuiteResult:
    """The sumset projection identity, with adversarial hypothesis failures."""
    rng = random.Random(seed)
    res = SuiteResult("sumset projection")
    adversarial = 0
    for _ in range(trials):
        dim = rng.choice([1, 2, 3])
        f = random_poly(rng, dim, rng.randint(1, 8), 3)
        g = random_poly(rng, dim, rng.randint(1, 8), 3)
        S = {random_freq(rng, dim, 3) for _ in range(rng.randint(1, 8))} | set(rng.sample(f.support(), 1))
        T = {random_freq(rng, dim, 3) for _ in range(rng.randint(1, 8))} | set(rng.sample(g.support(), 1))
        phi, psi = FiniteIndicator(S), FiniteIndicator(T)
        total = sumset(S, T)
        extra = {random_freq(rng, dim, 6) for _ in range(4)}
        omega = FiniteIndicator(total | extra)
        res.trials += 1
        out = sumset_projection_check(phi, psi, omega, f, g)
        if not out.passed:
            res.fail("identity", S=S, T=T, f=f, g=g)
        if not sumset_corollary_check(S, T, f, g):
            res.fail("corollary", S=S, T=T, f=f, g=g)

        product = multiply(apply_multiplier(phi, f), apply_multiplier(psi, g))
        live = sorted(product.coeffs)
        if not live:
            continue
        hole = rng.choice(live)
        broken = FiniteIndicator(total - {hole})
        out = sumset_projection_check(phi, psi, broken, f, g)
        adversarial += 1
        if out.passed or out.hypothesis_holds or out.identity_holds or out.witness != hole:
            res.fail("adversarial", S=S, T=T, hole=hole, witness=out.witness)
    if adversarial == 0:
        res.fail("adversarial", reason="no adversarial instance generated")
    return res


def torus_suite(trials: int = 1000, seed: int = 3) -> SuiteResult:
    """Group law, dual action and unitarity of the lattice model."""
    rng = random.Random(seed)
    res = SuiteResult("lattice model")
    for t in range(trials):
        g, h = random_element(rng), random_element(rng)
        m = random_freq(rng, 3, 20)
        res.trials += 1
        gh = compose(g, h)
        prod = tuple(
            tuple(sum(g.matrix[i][k] * h.matrix[k][j] for k in range(3)) for j in range(3))
            for i in range(3)
        )
        if gh.matrix != prod:
            res.fail("matrix product", g=g, h=h)
        if compose(g.inverse(), g) != AffineLatticeElement.identity():
            res.fail("inverse", g=g)
        if frequency_action(gh, m) != frequency_action(g, frequency_action(h, m)):
            res.fail("dual action", g=g, h=h, m=m)
        line = (0, 0, m[2])
        if frequency_action(g, line) != line:
            res.fail("invariant line", g=g, m=line)
        if t % 10 == 0:
            k = rng.randint(1, 3)
            fs = [random_poly(rng, 3, rng.randint(1, 5), 2, avoid_line=True) for _ in range(k + 1)]
            gs = [random_element(rng) for _ in range(k)]
            base = exact_multicorrelation(fs, gs)
            moved = exact_multicorrelation([translate(h, fs[0])] + fs[1:], [compose(h, x) for x in gs])
            if base != moved:
                res.fail("unitarity", fs=fs, gs=gs, h=h)
    return res


def random_diagonal(rng: random.Random, n: int, mode: str):
    """Random SL(n) diagonal: exact squares, floats, or q-exponents."""
    if mode == Q_EXPONENT:
        e = [rng.randint(-9, 9) for _ in range(n - 1)]
        return DiagonalElement(tuple(e + [-sum(e)]), Q_EXPONENT)
    if mode == "exact":
        xs = [Fraction(rng.randint(1, 9), rng.randint(1, 9)) ** 2 for _ in range(n - 1)]
        return DiagonalElement(tuple(xs + [1 / math.prod(xs)]))
    xs = [math.exp(rng.uniform(-3, 3)) for _ in range(n - 1)]
    return DiagonalElement(tuple(xs + [1.0 / math.prod(xs)]))


def split_suite(trials: int = 1000, seed: int = 4) -> SuiteResult:
    """Diagonal splitting, centralization and q-exponent round trips."""
    rng = random.Random(seed)
    res = SuiteResult("diagonal splitting")
    gens_exact = [sr.WEYL_GENERATOR]
    for _ in range(trials):
        n = rng.choice([3, 4, 5])
        j, l = sorted(rng.sample(range(1, n + 1), 2))
        res.trials += 1

        a = random_diagonal(rng, n, "exact")
        sp = sr.split_diagonal(a, j, l)
        if not sp.exact or sp.product() != a:
            res.fail("exact product", a=a, j=j, l=l)
        if not sr.centralizes(sp, gens_exact):
            res.fail("exact centralization", a=a, j=j, l=l)
        if math.prod(sp.a_hat.entries) != 1 or math.prod(sp.a_prime.entries) != 1:
            res.fail("exact determinant", a=a, j=j, l=l)

        a = random_diagonal(rng, n, "float")
        sp = sr.split_diagonal(a, j, l)
        if sr.split_error(sp) > sr.SPLIT_TOL:
            res.fail("float product", a=a, j=j, l=l, err=sr.split_error(sp))
        gens = [sr.WEYL_GENERATOR, sr.rotation(rng.uniform(0, 2 * math.pi))]
        if not sr.centralizes(sp, gens, tol=sr.SPLIT_TOL * max(sp.a_prime.entries)):
            res.fail("float centralization", a=a, j=j, l=l)

        a = random_diagonal(rng, n, Q_EXPONENT)
        sp = sr.split_diagonal(a, j, l)
        if sp.product() != a or sum(sp.a_hat.entries) or sum(sp.a_prime.entries):
            res.fail("q product", a=a, j=j, l=l)
        hat, prime = sp.ideal_exponents()
        j0, l0 = j - 1, l - 1
        if (hat[j0], hat[l0], prime[j0], prime[l0]) != (sp.b, -sp.b, sp.c, sp.c):
            res.fail("q round trip", a=a, j=j, l=l)
        if any(hat[i] + prime[i] != a.entries[i] for i in range(n)):
            res.fail("q ideal product", a=a, j=j, l=l)
        odd = (a.entries[j0] + a.entries[l0]) % 2 == 1
        if odd != (sp.parity_shift != 0) or (not odd and not sr.centralizes(sp, [])):
            res.fail("q parity", a=a, j=j, l=l)
    return res


def embedding_suite(trials: int = 100, seed: int = 5) -> SuiteResult:
    rng = random.Random(seed)
    res = SuiteResult("SL(2) x| k^2 embedding")
    for _ in range(trials):
        n = rng.choice([3, 4, 5])
        j, l = sorted(rng.sample(range(1, n), 2)) if n > 3 or rng.random() < 0.5 else (1, 2)
        g, h = random_element(rng), random_element(rng)
        res.trials += 1
        lhs = sr.matmul(sr.embed_sl2_v(n, j, l, g), sr.embed_sl2_v(n, j, l, h))
        if lhs != sr.embed_sl2_v(n, j, l, compose(g, h)):
            res.fail("homomorphism", n=n, j=j, l=l, g=g, h=h)
        if g != AffineLatticeElement.identity() and sr.embed_sl2_v(n, j, l, g) == sr.embed_sl2_v(n, j, l, AffineLatticeElement.identity()):
            res.fail("injectivity", n=n, j=j, l=l, g=g)
    return res


DEFAULT_SUITES = (
    operator_identity_suite,
    sumset_suite,
    torus_suite,
    split_suite,
    embedding_suite,
)


def run_all(seed: int = 0) -> list:
    return [suite(seed=seed + i + 1) for i, suite in enumerate(DEFAULT_SUITES)]
