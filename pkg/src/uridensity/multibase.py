"""Joint mantissae in several bases.

For two bases, independence of the mantissae along a URI-set needs exactly
that the bases are multiplicatively independent, which factorisation
decides.  For three or more bases the sufficient condition is a linear
independence of ``1/ln b_i`` over the integers, which is not known to follow
from multiplicative independence (it touches Schanuel's conjecture); such
families get an ``inconclusive`` verdict and a warning, never a silent pass.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy import integrate

from .densities import DensityEstimate, DensityKind, replica_means, summarize
from .errors import DependentBasesError, ParameterError
from .mantissa import _power, as_rational, exact_mantissa, exponent_of
from .predicates import SetPredicate, leading_digit

__all__ = [
    "BaseFamily",
    "IndependenceVerdict",
    "factorize",
    "mult_independence_check",
    "joint_predicate",
    "joint_density_mc",
    "factorization_test",
    "theta",
    "nu_hat",
    "nu_hat_quadrature",
    "star_discrepancy",
    "csb_sequence_test",
]


@dataclass(frozen=True)
class BaseFamily:
    bases: tuple[int, ...]
    thresholds: tuple[Fraction, ...]

    def __init__(self, bases, thresholds):
        bases = tuple(int(b) for b in bases)
        thresholds = tuple(as_rational(t) for t in thresholds)
        if len(bases) != len(thresholds) or not bases:
            raise ParameterError("bases and thresholds must be non-empty and of equal length")
        for b, t in zip(bases, thresholds):
            if b < 2:
                raise ParameterError(f"base {b} < 2")
            if not 1 <= t < b:
                raise ParameterError(f"threshold {t} outside [1, {b})")
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "thresholds", thresholds)

    def target(self) -> float:
        """``prod_i log_{b_i} t_i``."""
        return math.prod(math.log(t) / math.log(b) for b, t in zip(self.bases, self.thresholds))


@dataclass(frozen=True)
class IndependenceVerdict:
    status: str                       # "independent" | "dependent" | "inconclusive"
    witness: tuple[int, ...] | None = None
    note: str = ""

    def describe(self, bases) -> str:
        if self.witness is None:
            return self.status
        lhs = [f"{b}^{s}" for b, s in zip(bases, self.witness) if s > 0]
        rhs = [f"{b}^{-s}" for b, s in zip(bases, self.witness) if s < 0]
        return f"dependent: {' * '.join(lhs) or '1'} = {' * '.join(rhs) or '1'}"

    def to_dict(self, bases) -> dict:
        return {
            "status": self.status,
            "witness": None if self.witness is None else list(self.witness),
            "relation": self.describe(bases),
            "note": self.note,
        }


def factorize(n: int) -> dict[int, int]:
    if n < 1:
        raise ParameterError("factorize needs n >= 1")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _exponent_matrix(bases) -> list[list[int]]:
    facs = [factorize(b) for b in bases]
    primes = sorted(set().union(*facs))
    return [[f.get(p, 0) for p in primes] for f in facs]


def _is_relation(rows, s) -> bool:
    return all(sum(si * r[j] for si, r in zip(s, rows)) == 0 for j in range(len(rows[0])))


def _rational_null_vector(rows) -> tuple[int, ...] | None:
    """Integer vector ``s != 0`` with ``sum_i s_i rows[i] = 0``, or None if rows are independent."""
    ell = len(rows)
    # eliminate on the transpose: columns = bases
    m = [[Fraction(rows[i][j]) for i in range(ell)] for j in range(len(rows[0]))]
    pivots = []
    r = 0
    for c in range(ell):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ell) if c not in pivots]
    if not free:
        return None
    fc = free[0]
    vec = [Fraction(0)] * ell
    vec[fc] = Fraction(1)
    for row_i, pc in enumerate(pivots):
        vec[pc] = -m[row_i][fc]
    den = reduce(math.lcm, (v.denominator for v in vec), 1)
    ints = [int(v * den) for v in vec]
    g = reduce(math.gcd, (abs(v) for v in ints if v), 0)
    ints = [v // g for v in ints]
    if next(v for v in ints if v) < 0:
        ints = [-v for v in ints]
    return tuple(ints)


def mult_independence_check(bases, exponent_bound: int = 6) -> IndependenceVerdict:
    """Is there ``s != 0`` with ``prod b_i**s_i = 1``?

    The rank of the prime-exponent matrix settles the question exactly; when
    a relation exists, ``|s_i| <= exponent_bound`` is searched exhaustively
    for the lowest-height witness before falling back to a null vector.
    Multiplicatively independent families of three or more bases come back
    ``inconclusive``.
    """
    bases = tuple(int(b) for b in bases)
    if exponent_bound < 1:
        raise ParameterError("exponent_bound must be >= 1")
    if any(b < 2 for b in bases) or not bases:
        raise ParameterError("bases must be integers >= 2")
    rows = _exponent_matrix(bases)
    ell = len(bases)
    null = _rational_null_vector(rows)
    if null is not None:
        best = None
        rng = range(-exponent_bound, exponent_bound + 1)
        for s in itertools.product(rng, repeat=ell):
            if not any(s) or next(v for v in s if v) < 0:
                continue
            h = max(map(abs, s))
            if (best is None or h < best[0]) and _is_relation(rows, s):
                best = (h, s)
        if best is not None:
            return IndependenceVerdict("dependent", best[1])
        return IndependenceVerdict("dependent", null, "witness exceeds exponent_bound")
    if ell <= 2:
        return IndependenceVerdict("independent")
    return IndependenceVerdict(
        "inconclusive",
        note="multiplicatively independent; linear independence of 1/ln b_i over Z "
             "is not known to follow for three or more bases (Schanuel)",
    )


def _check_family(bases, override: bool) -> None:
    for i, j in itertools.combinations(range(len(bases)), 2):
        v = mult_independence_check((bases[i], bases[j]))
        if v.status == "dependent" and not override:
            raise DependentBasesError(
                f"bases {bases[i]} and {bases[j]} are {v.describe((bases[i], bases[j]))}"
            )
    if len(bases) > 2:
        v = mult_independence_check(bases)
        warnings.warn(
            f"independence condition for bases {bases} is inconclusive ({v.describe(bases)})",
            stacklevel=3,
        )


def joint_predicate(fam: BaseFamily) -> SetPredicate:
    """``{n : M_{b_i}(n) <= t_i for all i}``, exact integer comparisons."""
    parts = [(b, t.numerator, t.denominator) for b, t in zip(fam.bases, fam.thresholds)]

    def member(n: int) -> bool:
        for b, p, q in parts:
            if n * q > p * _power(b, exponent_of(n, b)):
                return False
        return True

    name = "mantissa_le_" + "_".join(f"b{b}_{t}" for b, t in zip(fam.bases, fam.thresholds))
    return SetPredicate(name, member)


def joint_density_mc(fam: BaseFamily, n_elems: int, reps: int, seed=0,
                     override: bool = False) -> DensityEstimate:
    _check_family(fam.bases, override)
    A = joint_predicate(fam)
    means = replica_means([A], n_elems, reps, seed)[:, 0]
    return summarize(means, DensityKind.URI_MC, n_elems * reps, A.id)


def factorization_test(fam: BaseFamily, n_elems: int, reps: int, seed=0,
                       override: bool = False) -> dict:
    """Joint and marginal URI-density estimates from the same replicas.

    ``combined_se`` is ``sqrt(se_J**2 + sum_i (prod_{j != i} m_j * se_i)**2)``.
    """
    _check_family(fam.bases, override)
    preds = [joint_predicate(fam)] + [
        joint_predicate(BaseFamily([b], [t])) for b, t in zip(fam.bases, fam.thresholds)
    ]
    means = replica_means(preds, n_elems, reps, seed)
    ests = [summarize(means[:, i], DensityKind.URI_MC, n_elems * reps, p.id) for i, p in enumerate(preds)]
    joint, marg = ests[0], ests[1:]
    prod = math.prod(m.value for m in marg)
    var = joint.error_bound ** 2
    for i, m in enumerate(marg):
        others = math.prod(o.value for j, o in enumerate(marg) if j != i)
        var += (others * m.error_bound) ** 2
    return {
        "joint": joint,
        "marginals": marg,
        "product_of_marginals": prod,
        "difference": joint.value - prod,
        "combined_se": math.sqrt(var),
        "target": fam.target(),
    }

_QUAD_CUTOFF = 40.0  # exp(-40) ~ 4e-18


def theta(m_vec, bases) -> float:
    if len(m_vec) != len(bases):
        raise ParameterError("m_vec and bases differ in length")
    return math.fsum(m / math.log(b) for m, b in zip(m_vec, bases))


def nu_hat(m_vec, bases) -> complex:
    """Fourier coefficient ``1 / (1 - 2 pi i theta)`` of the law of ``(log_{b_i} U mod 1)_i``."""
    return 1.0 / complex(1.0, -2.0 * math.pi * theta(m_vec, bases))


def nu_hat_quadrature(m_vec, bases) -> complex:
    """``int_0^1 exp(-2 pi i theta ln u) du`` numerically, via ``u = exp(-s)``.

    The oscillatory integral over ``s in (0, S]`` uses QUADPACK's
    cosine/sine-weight routine; the neglected tail is below ``exp(-S)``.
    """
    w = 2.0 * math.pi * theta(m_vec, bases)
    f = lambda s: math.exp(-s)  # noqa: E731
    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=200)
    if w == 0.0:
        re, _ = integrate.quad(f, 0.0, _QUAD_CUTOFF, **opts)
        return complex(re, 0.0)
    re, _ = integrate.quad(f, 0.0, _QUAD_CUTOFF, weight="cos", wvar=w, **opts)
    im, _ = integrate.quad(f, 0.0, _QUAD_CUTOFF, weight="sin", wvar=w, **opts)
    return complex(re, im)


def star_discrepancy(points) -> float:
    """``D*_N = sup_{0<=t<=1} |#{x_i < t}/N - t|`` for points in [0, 1)."""
    x = np.sort(np.asarray(points, dtype=np.float64))
    n = x.size
    i = np.arange(1, n + 1)
    return float(max((i / n - x).max(), (x - (i - 1) / n).max()))


def csb_sequence_test(b1: int, b2: int, k_max: int) -> dict:
    """Check that ``x_k = b2**k`` is Benford in base ``b1`` and degenerate in base ``b2``."""
    v = mult_independence_check((b1, b2))
    if v.status != "independent":
        raise DependentBasesError(f"bases {b1}, {b2}: {v.describe((b1, b2))}")
    if k_max < 1:
        raise ParameterError("k_max must be >= 1")
    lead1 = leading_digit(1, b1)
    lb1 = math.log(b1)
    fracs = np.empty(k_max)
    all_one = True
    hits = 0
    x = 1
    for k in range(1, k_max + 1):
        x *= b2
        m1 = exact_mantissa(x, b1)
        # log_{b1} x mod 1 = log_{b1} M_{b1}(x)
        fracs[k - 1] = math.log(float(m1.mantissa)) / lb1
        m2 = exact_mantissa(x, b2)
        all_one = all_one and m2.value_n == m2.scale
        hits += lead1.member(x)
    fracs = np.clip(fracs, 0.0, np.nextafter(1.0, 0.0))
    return {
        "b1": b1,
        "b2": b2,
        "k_max": k_max,
        "star_discrepancy": star_discrepancy(fracs),
        "base_b2_mantissa_all_one": all_one,
        "freq_leading_1_base_b1": hits / k_max,
        "benford_leading_1_base_b1": math.log(2) / lb1,
        "verdict": v.to_dict((b1, b2)),
    }
