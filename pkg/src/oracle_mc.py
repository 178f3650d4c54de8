"""
Ground-truth tree values: seeded Monte Carlo with backwards induction, and
exact enumeration for small trees
"""
import itertools
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from src.config import (
    CAPACITY_TOLERANCE,
    DEFAULT_MC_RUNS,
    ENUMERATION_MAX_NODES,
    MC_CHUNK_NODE_BUDGET,
    MC_CHUNK_RUNS,
    MC_MAX_NODES,
)
from src.reward_model import ArbitraryReward

ALL_ONES = "all-ones"


class AllocationMode(str, Enum):
    AVERAGE_BERNOULLI = "average"  # each node sampled independently with q_level
    HARD_EXACT = "hard"            # exactly C nodes, a uniform subset per level


@dataclass(frozen=True)
class McConfig:
    runs: int
    seed: int = 0
    allocation_mode: AllocationMode = AllocationMode.AVERAGE_BERNOULLI
    threads: int = 1

    def __post_init__(self):
        if int(self.runs) != self.runs or self.runs < 1:
            raise ValueError(f"runs must be a positive integer, got {self.runs!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "allocation_mode", AllocationMode(self.allocation_mode))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    runs: int

    def agrees_with(self, exact, n_stderr=3.0):
        return abs(self.mean - exact) <= n_stderr * self.stderr


def _max_over_children(acc, b):
    """Best child value per parent for a (batch, b**l) array"""
    return acc.reshape(acc.shape[0], -1, b).max(axis=2)


def backward_induction_value(rewards):
    """Root value of a realized tree: V(s) = max over children of R(s') + V(s')

    `rewards[l - 1]` holds the b**l rewards of level l; the children of node j
    on level l are nodes j*b .. j*b + b - 1 on level l + 1.
    """
    levels = [np.asarray(level, dtype=np.float64) for level in rewards]
    if not levels:
        raise ValueError("Reward table must have at least one level")
    b = levels[0].size
    if b < 1:
        raise ValueError("Level 1 must hold at least one node")
    for level, values in enumerate(levels, start=1):
        if values.ndim != 1 or values.size != b ** level:
            raise ValueError(f"Level {level} holds {values.size} rewards, expected b**l = {b ** level}")

    acc = levels[-1][np.newaxis, :]
    for values in reversed(levels[:-1]):
        acc = values[np.newaxis, :] + _max_over_children(acc, b)
    return float(acc.max(axis=1)[0])


def draw_rewards(rng, reward, shape):
    """R+ with probability p, R- otherwise"""
    return np.where(rng.random(shape) < reward.p, reward.r_plus, reward.r_minus)


def hard_level_counts(b, q):
    """Per-level sample counts for exactly C = sum_l q[d - l] * b**l samples

    Each level gets floor(q_level * b**l) and the leftover samples go to the
    levels with the largest remainders (shallower level first on ties).
    """
    d = len(q)
    targets = [q[d - level] * b ** level for level in range(1, d + 1)]
    capacity = math.fsum(targets)
    total = round(capacity)
    if abs(capacity - total) > CAPACITY_TOLERANCE * max(1.0, capacity):
        raise ValueError(f"Hard allocation needs an integer capacity, policy implies C={capacity:.12g}")

    counts = [int(math.floor(t + CAPACITY_TOLERANCE)) for t in targets]
    leftover = total - sum(counts)
    by_remainder = sorted(range(d), key=lambda i: (-(targets[i] - counts[i]), i))
    for i in by_remainder[:max(0, leftover)]:
        counts[i] += 1
    return counts


def _exact_mask(rng, size, width, count):
    ranks = rng.random((size, width)).argsort(axis=1).argsort(axis=1)
    return ranks < count


def _chunk_generator(seed, chunk_index):
    """Counter-based substream keyed by (seed, chunk index)"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk_index,))))


def _simulate_chunk(rng, size, b, q, reward, level_counts):
    """Root values for `size` independent trees, built from the deepest level up"""
    d = len(q)
    acc = None
    for level in range(d, 0, -1):
        width = b ** level
        if level_counts is None:
            sampled = rng.random((size, width)) < q[d - level]
        else:
            sampled = _exact_mask(rng, size, width, level_counts[level - 1])
        rewards = np.where(sampled, draw_rewards(rng, reward, (size, width)), 0.0)
        acc = rewards if acc is None else rewards + _max_over_children(acc, b)
    return acc.max(axis=1)


def mc_value(p, b, d, q=None, config=None):
    """Monte-Carlo estimate of V_{d,b,q} for an arbitrary p in (0, 1)"""
    reward = ArbitraryReward.from_probability(p)
    config = config or McConfig(runs=DEFAULT_MC_RUNS)
    if isinstance(b, bool) or int(b) != b or b < 1:
        raise ValueError(f"b must be a positive integer, got {b!r}")
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    b, d = int(b), int(d)

    if q is None or (isinstance(q, str) and q == ALL_ONES):
        q = (1.0,) * d
    q = tuple(float(q_k) for q_k in q)
    if len(q) != d:
        raise ValueError(f"Sampling vector has {len(q)} levels, expected d={d}")
    if any(q_k != q_k or not 0.0 <= q_k <= 1.0 for q_k in q):
        raise ValueError("Every q level must lie in [0, 1]")

    total_nodes = sum(b ** level for level in range(1, d + 1))
    if total_nodes > MC_MAX_NODES:
        raise ValueError(f"Tree with b={b}, d={d} has {total_nodes} nodes, above the {MC_MAX_NODES} limit")

    level_counts = None
    if config.allocation_mode is AllocationMode.HARD_EXACT:
        level_counts = hard_level_counts(b, q)

    chunk_runs = max(1, min(MC_CHUNK_RUNS, MC_CHUNK_NODE_BUDGET // b ** d))
    n_chunks = math.ceil(config.runs / chunk_runs)

    def simulate(chunk_index):
        size = min(chunk_runs, config.runs - chunk_index * chunk_runs)
        rng = _chunk_generator(int(config.seed), chunk_index)
        return _simulate_chunk(rng, size, b, q, reward, level_counts)

    with ThreadPoolExecutor(max_workers=max(1, config.threads)) as executor:
        values = np.concatenate(list(executor.map(simulate, range(n_chunks))))

    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(config.runs)) if config.runs > 1 else 0.0
    return McEstimate(mean=mean, stderr=stderr, runs=int(config.runs))


def _node_outcomes(model, q_level):
    """(reward, probability) pairs for one node of a level sampled with q_level"""
    q_level = Fraction(q_level)
    outcomes = defaultdict(Fraction)
    outcomes[Fraction(0)] += 1 - q_level
    outcomes[model.r_plus] += q_level * model.p_plus
    outcomes[model.r_minus] += q_level * model.p_minus
    return [(r, w) for r, w in outcomes.items() if w != 0]


def _exact_root_value(flat, b, d):
    levels = []
    start = 0
    for level in range(1, d + 1):
        levels.append(flat[start:start + b ** level])
        start += b ** level
    acc = list(levels[-1])
    for values in reversed(levels[:-1]):
        acc = [values[j] + max(acc[j * b:(j + 1) * b]) for j in range(len(values))]
    return max(acc)


def enumerate_tree_value(model, b, d, q):
    """Exact E[J_d] by enumerating every sampling mask and reward assignment"""
    if len(q) != d:
        raise ValueError(f"Sampling vector has {len(q)} levels, expected d={d}")
    total_nodes = sum(b ** level for level in range(1, d + 1))
    if total_nodes > ENUMERATION_MAX_NODES:
        raise ValueError(f"Enumeration is limited to {ENUMERATION_MAX_NODES} nodes, tree has {total_nodes}")

    per_node = []
    for level in range(1, d + 1):
        per_node.extend([_node_outcomes(model, q[d - level])] * b ** level)

    value = Fraction(0)
    for assignment in itertools.product(*per_node):
        weight = Fraction(1)
        for _, w in assignment:
            weight *= w
        value += weight * _exact_root_value([r for r, _ in assignment], b, d)
    return value


def _max_of_independent(x, y):
    out = defaultdict(Fraction)
    for a, pa in x.items():
        for c, pc in y.items():
            out[max(a, c)] += pa * pc
    return dict(out)


def pairwise_max_value(model, b, d, q):
    """Exact E[J_d] by enumerating joint outcomes of sibling subtrees pair by pair"""
    if len(q) != d:
        raise ValueError(f"Sampling vector has {len(q)} levels, expected d={d}")
    subtree = {Fraction(0): Fraction(1)}
    for q_level in q:
        action = defaultdict(Fraction)
        for r, pr in _node_outcomes(model, q_level):
            for j, pj in subtree.items():
                action[r + j] += pr * pj
        action = dict(action)
        best = action
        for _ in range(b - 1):
            best = _max_of_independent(best, action)
        subtree = best
    return sum((value * prob for value, prob in subtree.items()), Fraction(0))
