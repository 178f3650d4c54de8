"""
Sampling allocation policies under an average capacity constraint

A policy samples every node of level l with probability q[d - l] (q[0] is the
deepest level). Its average capacity is C = sum_l q[d - l] * b**l.
"""
import math
from dataclasses import dataclass

import numpy as np

from src.config import CAPACITY_TOLERANCE


class InfeasibleCapacityError(ValueError):
    """No admissible q can meet the requested capacity"""


@dataclass(frozen=True)
class Policy:
    b: int
    q: tuple

    def __post_init__(self):
        if isinstance(self.b, bool) or int(self.b) != self.b or self.b < 1:
            raise ValueError(f"b must be a positive integer, got {self.b!r}")
        q = tuple(float(q_k) for q_k in self.q)
        if not q:
            raise ValueError("Policy needs at least one level")
        for k, q_k in enumerate(q, start=1):
            if q_k != q_k or not 0.0 <= q_k <= 1.0:
                raise ValueError(f"q[{k}] must lie in [0, 1], got {q_k!r}")
        object.__setattr__(self, "b", int(self.b))
        object.__setattr__(self, "q", q)

    @property
    def d(self):
        return len(self.q)

    def capacity(self):
        return capacity_of(self.b, self.q)

    def padded(self, d):
        """Same allocation on a deeper tree: the extra deepest levels get q = 0"""
        if d < self.d:
            raise ValueError(f"Cannot pad a depth-{self.d} policy down to depth {d}")
        return Policy(self.b, (0.0,) * (d - self.d) + self.q)


@dataclass(frozen=True)
class CapacityBudget:
    C: float
    C_r: float
    d_prime: int


def capacity_weights(b, d):
    """Weights w[k] = b**(d - k) matching the reverse-indexed q"""
    if isinstance(b, bool) or int(b) != b or b < 1:
        raise ValueError(f"b must be a positive integer, got {b!r}")
    if int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    level_sizes = []
    for level in range(1, int(d) + 1):
        size = int(b) ** level
        try:
            level_sizes.append(float(size))
        except OverflowError:
            raise OverflowError(f"b**l overflows float64 at level {level} (b={b})") from None
    return np.array(level_sizes[::-1])


def capacity_of(b, q):
    """Average number of sampled nodes, sum_l q[d - l] * b**l"""
    q = np.asarray(q, dtype=np.float64)
    weights = capacity_weights(b, q.size)
    return math.fsum(weights * q)


def homogeneous_policy(b, C):
    """Sample every node of the first d'-1 levels and spread the rest over level d'"""
    if isinstance(b, bool) or int(b) != b or b < 1:
        raise ValueError(f"b must be a positive integer, got {b!r}")
    if not C > 0:
        raise ValueError(f"Capacity must be positive, got {C!r}")
    b, C = int(b), float(C)

    if b == 1:
        d_prime = math.ceil(C)
        remainder = C - (d_prime - 1)
    else:
        remainder = C
        d_prime = 1
        # ties C_r == b**d' stay at the shallower level with q1 = 1
        while remainder > b ** d_prime:
            remainder -= b ** d_prime
            d_prime += 1

    q1 = remainder / b ** d_prime
    policy = Policy(b, (q1,) + (1.0,) * (d_prime - 1))
    return policy, CapacityBudget(C=C, C_r=remainder, d_prime=d_prime)


def floor_log(C, b):
    """floor(log_b C) computed without float rounding at exact powers"""
    k = int(math.floor(math.log(C) / math.log(b)))
    while b ** (k + 1) <= C:
        k += 1
    while k > 0 and b ** k > C:
        k -= 1
    return k


def heterogeneous_depth(b, C):
    """Number of levels considered by heterogeneous and random policies"""
    if isinstance(b, bool) or int(b) != b or b < 2:
        raise ValueError(f"heterogeneous_depth needs b >= 2, got {b!r}")
    if not C >= 1:
        raise ValueError(f"Capacity must be at least 1, got {C!r}")
    return 2 * floor_log(C, int(b)) + 3


def random_policy(b, d, C):
    """Same sampling probability at every level of a depth-d tree"""
    weights = capacity_weights(b, d)
    total = math.fsum(weights)
    if not C > 0:
        raise ValueError(f"Capacity must be positive, got {C!r}")
    if C > total * (1 + CAPACITY_TOLERANCE):
        raise InfeasibleCapacityError(
            f"Capacity {C} exceeds the {total:.0f} nodes of a tree with b={b}, d={d}")
    q_level = min(1.0, C / total)
    return Policy(b, (q_level,) * int(d))
