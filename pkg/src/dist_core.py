"""
Diffusion-maximization recursion for the value of sampled decision trees

A tree has branching factor b and depth d. Every node of level l is sampled
independently with probability q[d - l] (q is reverse-indexed: q[0] is the
deepest level). Sampled nodes reveal a reward +1 or R-, unsampled nodes keep
reward 0. J_k is the accumulated reward of the best path through a subtree
of depth k and Q_k = R + J_{k-1} the value of one action at its root.

Distributions are dense arrays over an integer lattice (value = index * unit),
so each level costs O(n d log b) and a full tree O(n d^2 log b).
"""
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np
from scipy import optimize

from src.config import (
    EXACT_MODE_MAX_DEPTH,
    FIXED_POINT_TOLERANCE,
    NORMALIZATION_TOLERANCE,
    RENORMALIZE_DEPTH_THRESHOLD,
)


class ValueKind(str, Enum):
    STATE = "J"
    ACTION = "Q"


@dataclass(frozen=True, eq=False)
class ValuePmf:
    """Probability mass of J_d or Q_d over lattice indices [min_index, max_index]

    `mass` is float64, or an object array of Fractions in exact mode.
    """

    model: object
    depth: int
    kind: ValueKind
    min_index: int
    mass: np.ndarray

    def __post_init__(self):
        mass = np.array(self.mass, dtype=object if _is_exact_array(self.mass) else np.float64)
        if mass.ndim != 1 or mass.size == 0:
            raise ValueError("PMF mass must be a non-empty 1-d array")
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "min_index", int(self.min_index))

    @property
    def exact(self):
        return self.mass.dtype == object

    @property
    def max_index(self):
        return self.min_index + self.mass.size - 1

    @property
    def indices(self):
        return np.arange(self.min_index, self.max_index + 1)

    @property
    def values(self):
        if self.exact:
            return np.array([self.model.index_value(int(i)) for i in self.indices], dtype=object)
        return self.indices * float(self.model.unit)

    def total(self):
        if self.exact:
            return sum(self.mass, Fraction(0))
        return float(np.sum(self.mass))

    def expectation(self):
        """E[J_d] (or E[Q_d]) in reward units"""
        if self.exact:
            acc = sum((int(i) * m for i, m in zip(self.indices, self.mass)), Fraction(0))
            return acc * self.model.unit
        return float(self.model.unit) * float(np.dot(self.indices, self.mass))

    def cdf(self):
        return np.cumsum(self.mass)

    def atoms(self):
        """Nonzero atoms as {lattice index: probability}"""
        return {int(i): m for i, m in zip(self.indices, self.mass) if m != 0}

    def probability(self, value):
        """P(X = value) for a reward value on the lattice"""
        index = Fraction(value) / self.model.unit
        if index.denominator != 1:
            raise ValueError(f"Value {value} is not on the lattice of unit {self.model.unit}")
        index = int(index)
        if index < self.min_index or index > self.max_index:
            return Fraction(0) if self.exact else 0.0
        return self.mass[index - self.min_index]

    def support_size(self):
        return int(np.count_nonzero(self.mass != 0))

    def renormalized(self):
        return ValuePmf(self.model, self.depth, self.kind, self.min_index, self.mass / self.total())


def _is_exact_array(values):
    if isinstance(values, np.ndarray) and values.dtype != object:
        return False
    return any(isinstance(v, Fraction) for v in np.asarray(values, dtype=object).ravel())


def _zeros(length, exact):
    if exact:
        return np.array([Fraction(0)] * length, dtype=object)
    return np.zeros(length, dtype=np.float64)


def _check_probability(name, x):
    if x != x or not 0 <= x <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")


def _check_positive_int(name, x):
    if isinstance(x, bool) or int(x) != x or x < 1:
        raise ValueError(f"{name} must be a positive integer, got {x!r}")
    return int(x)


def _check_policy_vector(q, exact=False):
    q = list(q)
    if not q:
        raise ValueError("Sampling vector q must have at least one level")
    for k, q_k in enumerate(q, start=1):
        _check_probability(f"q[{k}]", q_k)
    if exact:
        return tuple(Fraction(q_k) for q_k in q)
    return tuple(float(q_k) for q_k in q)


def _int_power(arr, b):
    """arr ** b by repeated squaring"""
    result = None
    base = arr
    while b:
        if b & 1:
            result = base if result is None else result * base
        b >>= 1
        if b:
            base = base * base
    return result


def point_mass(model, exact=False):
    """J_0: a zero-depth tree has accumulated reward 0"""
    mass = [Fraction(1)] if exact else [1.0]
    return ValuePmf(model, depth=0, kind=ValueKind.STATE, min_index=0, mass=mass)


def diffusion_step(j_pmf, q_level):
    """P(J_{d-1}) -> P(Q_d = R_d + J_{d-1})"""
    if j_pmf.kind is not ValueKind.STATE:
        raise ValueError("diffusion_step expects a state-value PMF (J)")
    _check_probability("q_level", q_level)

    model = j_pmf.model
    up, down = model.up_step, model.down_step
    if j_pmf.exact:
        q = Fraction(q_level)
        p_up, p_down, stay = q * model.p_plus, q * model.p_minus, 1 - q
    else:
        q = float(q_level)
        p_up, p_down, stay = q * float(model.p_plus), q * float(model.p_minus), 1.0 - q

    a = j_pmf.mass
    size = a.size
    out = _zeros(size + up + down, j_pmf.exact)
    out[:size] += p_down * a
    out[down:down + size] += stay * a
    out[down + up:down + up + size] += p_up * a
    return ValuePmf(model, depth=j_pmf.depth + 1, kind=ValueKind.ACTION,
                    min_index=j_pmf.min_index - down, mass=out)


def maximization_step(q_pmf, b):
    """P(Q_d) -> P(J_d), the max of b independent action values

    P(J_d = k) = F(k)^b - F(k - unit)^b with F the CDF of Q_d, accumulated
    from the most negative state upwards.
    """
    if q_pmf.kind is not ValueKind.ACTION:
        raise ValueError("maximization_step expects an action-value PMF (Q)")
    b = _check_positive_int("b", b)

    cdf = q_pmf.cdf()
    if not q_pmf.exact:
        # pin F(top) to 1: the power would multiply its rounding error by b
        cdf = cdf / cdf[-1]
    cdf_b = _int_power(cdf, b)
    out = cdf_b.copy()
    out[1:] = cdf_b[1:] - cdf_b[:-1]
    return ValuePmf(q_pmf.model, depth=q_pmf.depth, kind=ValueKind.STATE,
                    min_index=q_pmf.min_index, mass=out)


def depth_one_pmf(model, b, q1, exact=False):
    """P(J_1) for b leaves, each sampled with probability q1"""
    b = _check_positive_int("b", b)
    _check_probability("q1", q1)
    return maximization_step(diffusion_step(point_mass(model, exact), q1), b)


def value_distribution(model, b, q, exact=False, renormalize_depth_threshold=RENORMALIZE_DEPTH_THRESHOLD):
    """P(J_d) for a selective policy q (reverse-indexed, q[0] = deepest level)"""
    b = _check_positive_int("b", b)
    q = _check_policy_vector(q, exact)
    if exact and len(q) > EXACT_MODE_MAX_DEPTH:
        raise ValueError(f"Exact mode supports d <= {EXACT_MODE_MAX_DEPTH}, got d={len(q)}")
    renormalize = not exact and len(q) > renormalize_depth_threshold

    pmf = point_mass(model, exact)
    for q_level in q:
        pmf = maximization_step(diffusion_step(pmf, q_level), b)
        if renormalize or (not exact and abs(pmf.total() - 1.0) > NORMALIZATION_TOLERANCE):
            pmf = pmf.renormalized()

    if not exact:
        drift = abs(pmf.total() - 1.0)
        if drift > NORMALIZATION_TOLERANCE:
            warnings.warn(f"Probability mass drifted by {drift:.3g} at depth {len(q)} (b={b})")
    return pmf


def tree_value_selective(model, b, d, q, exact=False, renormalize_depth_threshold=RENORMALIZE_DEPTH_THRESHOLD):
    """V_{d,b,q} = E[J_d]"""
    d = _check_positive_int("d", d)
    if len(q) != d:
        raise ValueError(f"Sampling vector has {len(q)} levels, expected d={d}")
    pmf = value_distribution(model, b, q, exact=exact, renormalize_depth_threshold=renormalize_depth_threshold)
    return pmf.expectation()


def tree_value_exhaustive(model, b, d, exact=False, renormalize_depth_threshold=RENORMALIZE_DEPTH_THRESHOLD):
    """V_{d,b}: every node of the tree is sampled"""
    d = _check_positive_int("d", d)
    return tree_value_selective(model, b, d, [1] * d, exact=exact,
                                renormalize_depth_threshold=renormalize_depth_threshold)


def full_reward_trajectory(p, b, d):
    """P(J_k = k) for k = 1..d, the chance that the best path collects +1 everywhere"""
    _check_probability("p", p)
    b = _check_positive_int("b", b)
    d = _check_positive_int("d", d)

    out = []
    prob = 1 - (1 - p) ** b
    out.append(prob)
    for _ in range(d - 1):
        prob = 1 - (1 - p * prob) ** b
        out.append(prob)
    return out


def full_reward_probability(p, b, d):
    """P(J_d = d)"""
    return full_reward_trajectory(p, b, d)[-1]


def asymptotic_full_reward_prob(p, b):
    """Large-d limit of P(J_d = d): nonzero root of 1 - P = (1 - pP)^b, or 0 if pb <= 1"""
    _check_probability("p", p)
    b = _check_positive_int("b", b)
    p = float(p)
    if p * b <= 1:
        return 0.0
    if p == 1.0:
        return 1.0

    def residual(prob):
        return math.expm1(b * math.log1p(-p * prob)) + prob

    # residual < 0 below the root and >= 0 above it
    lo = 0.5
    while residual(lo) >= 0:
        lo /= 2
        # p*b rounds to just above 1: the root is below float resolution
        if lo < FIXED_POINT_TOLERANCE:
            return 0.0
    return float(optimize.bisect(residual, lo, 1.0, xtol=FIXED_POINT_TOLERANCE))


def distinct_state_count(n, s):
    """Number of distinct values i - n*j (i, j >= 0, i + j <= s) at level s"""
    n = _check_positive_int("n", n)
    if isinstance(s, bool) or int(s) != s or s < 0:
        raise ValueError(f"s must be a nonnegative integer, got {s!r}")
    s = int(s)
    if s < n:
        return (s + 1) * (s + 2) // 2
    return (n + 1) * s - n * (n - 1) // 2 + 1


def reachable_indices(model, s):
    """Lattice indices reachable after s levels of selective sampling"""
    up, down = model.up_step, model.down_step
    return {i * up - j * down for i in range(s + 1) for j in range(s + 1 - i)}
