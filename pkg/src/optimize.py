"""
Optimal breadth-depth allocations

Homogeneous policies are optimized by a scan over b. Heterogeneous policies
add a projected gradient ascent over the per-level sampling probabilities q,
which keeps q on the capacity plane sum_l q[d - l] * b**l = C and inside
the box [0, 1]^d.

With `polish` set, the ascent result is refined by a constrained SLSQP
solve and kept only when the value does not drop.
"""
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from src.config import (
    CAPACITY_TOLERANCE,
    FD_STEP,
    LEARNING_RATE,
    MAX_ITERATIONS,
    POLISH_FTOL,
    POLISH_MAX_ITERATIONS,
    PROJECTION_ROUNDS,
    RENORMALIZE_DEPTH_THRESHOLD,
    VALUE_TOLERANCE,
)
from src.dist_core import tree_value_selective
from src.policy import capacity_weights, heterogeneous_depth, homogeneous_policy


class ConvergenceError(RuntimeError):
    """Box clipping and capacity re-projection did not settle"""


@dataclass(frozen=True)
class GradientConfig:
    fd_step: float = FD_STEP
    learning_rate: float = LEARNING_RATE
    max_iterations: int = MAX_ITERATIONS
    value_tolerance: float = VALUE_TOLERANCE
    renormalize_depth_threshold: int = RENORMALIZE_DEPTH_THRESHOLD
    projection_rounds: int = PROJECTION_ROUNDS
    polish: bool = False

    def __post_init__(self):
        for name in ("fd_step", "learning_rate", "max_iterations", "value_tolerance",
                     "renormalize_depth_threshold", "projection_rounds"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"GradientConfig.{name} must be positive, got {value!r}")
        object.__setattr__(self, "max_iterations", int(self.max_iterations))


@dataclass
class OptimizationResult:
    b_star: int
    q_star: tuple
    value: float
    iterations_used: int
    converged: bool
    values_by_b: dict = field(default_factory=dict)

    @property
    def d(self):
        return len(self.q_star)


def _capacity_tolerance(C):
    return CAPACITY_TOLERANCE * max(1.0, abs(C))


def _pick_best(values_by_b):
    """argmax over b, smallest b on ties"""
    return min(values_by_b, key=lambda b: (-values_by_b[b], b))


def homogeneous_value(model, b, C):
    """(policy, budget, V) for the homogeneous policy of branching b at capacity C"""
    policy, budget = homogeneous_policy(b, C)
    # a single branch per node leaves nothing to choose: the value is 0
    if policy.b == 1:
        return policy, budget, 0.0
    return policy, budget, tree_value_selective(model, policy.b, budget.d_prime, policy.q)


def optimize_homogeneous(model, C, b_max, threads=1):
    """b* = argmax_b V(homogeneous_policy(b, C)) over b = 1..b_max"""
    if int(b_max) != b_max or b_max < 2:
        raise ValueError(f"b_max must be an integer >= 2, got {b_max!r}")
    if not C > 0:
        raise ValueError(f"Capacity must be positive, got {C!r}")

    branchings = list(range(1, int(b_max) + 1))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        evaluated = list(executor.map(lambda b: homogeneous_value(model, b, C), branchings))

    values_by_b = {b: value for b, (_, _, value) in zip(branchings, evaluated)}
    policies = {b: policy for b, (policy, _, _) in zip(branchings, evaluated)}
    b_star = _pick_best(values_by_b)
    return OptimizationResult(
        b_star=b_star,
        q_star=policies[b_star].q,
        value=values_by_b[b_star],
        iterations_used=len(branchings),
        converged=True,
        values_by_b=values_by_b,
    )


def project_gradient(g, weights):
    """Component of g lying in the capacity plane (orthogonal to weights)"""
    g = np.asarray(g, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if g.shape != weights.shape:
        raise ValueError(f"Gradient shape {g.shape} does not match weights {weights.shape}")
    norm2 = float(np.dot(weights, weights))
    if norm2 == 0.0:
        raise ValueError("Cannot project onto the plane of a zero weight vector")
    return g - (float(np.dot(weights, g)) / norm2) * weights


def clip_and_reproject(q, b, C, max_rounds=PROJECTION_ROUNDS):
    """Alternate box clipping and re-projection onto the capacity plane

    Coordinates clipped in any round stay frozen for the rest of the call and
    only the free ones absorb the capacity residual.
    """
    q = np.array(q, dtype=np.float64)
    weights = capacity_weights(b, q.size)
    tol = _capacity_tolerance(C)
    frozen = np.zeros(q.size, dtype=bool)

    for _ in range(int(max_rounds)):
        low, high = q < 0.0, q > 1.0
        residual = C - float(np.dot(weights, q))
        if not (low.any() or high.any()) and abs(residual) <= tol:
            return q

        q[low] = 0.0
        q[high] = 1.0
        frozen |= low | high
        residual = C - float(np.dot(weights, q))
        if abs(residual) <= tol:
            continue

        free = ~frozen
        if not free.any():
            raise ConvergenceError(
                f"All {q.size} levels are clipped and capacity is off by {residual:.6g}; "
                f"the budget C={C} is infeasible for b={b}")
        w_free = weights[free]
        q[free] += residual * w_free / float(np.dot(w_free, w_free))

    raise ConvergenceError(f"Clip/re-projection did not converge in {max_rounds} rounds (b={b}, C={C})")


def _check_feasible(q, b, C):
    q = np.asarray(q, dtype=np.float64)
    if np.any(q < 0.0) or np.any(q > 1.0):
        raise ValueError("Initial q must lie in [0, 1] at every level")
    capacity = float(np.dot(capacity_weights(b, q.size), q))
    if abs(capacity - C) > _capacity_tolerance(C):
        raise ValueError(f"Initial q uses capacity {capacity:.12g}, expected {C}")


def _finite_difference_gradient(value_fn, q, base_value, step):
    """Forward differences; backward where a forward step would leave [0, 1]"""
    grad = np.empty_like(q)
    for k in range(q.size):
        shifted = q.copy()
        if q[k] + step <= 1.0:
            shifted[k] += step
            grad[k] = (value_fn(shifted) - base_value) / step
        else:
            shifted[k] -= step
            grad[k] = (base_value - value_fn(shifted)) / step
    return grad


def _polish(value_fn, q, value, b, C, config):
    """SLSQP refinement of an ascent result; falls back to (q, value) if it does not help"""
    weights = capacity_weights(b, q.size)
    solution = minimize(
        lambda x: -value_fn(np.clip(x, 0.0, 1.0)),
        q,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * q.size,
        constraints=[{"type": "eq", "fun": lambda x: (float(np.dot(weights, x)) - C) / C}],
        options={"ftol": POLISH_FTOL, "maxiter": POLISH_MAX_ITERATIONS},
    )
    try:
        candidate = clip_and_reproject(np.clip(solution.x, 0.0, 1.0), b, C, max_rounds=config.projection_rounds)
    except ConvergenceError:
        return q, value
    candidate_value = value_fn(candidate)
    if candidate_value >= value:
        return candidate, candidate_value
    return q, value


def optimize_q(model, b, d, C, config=None, q0=None):
    """Projected gradient ascent of V_{d,b,q} on the capacity plane"""
    config = config or GradientConfig()
    if q0 is None:
        q0 = homogeneous_policy(b, C)[0].padded(d).q
    if len(q0) != d:
        raise ValueError(f"Initial q has {len(q0)} levels, expected d={d}")
    _check_feasible(q0, b, C)

    def value_fn(q):
        return tree_value_selective(model, b, d, q, renormalize_depth_threshold=config.renormalize_depth_threshold)

    weights = capacity_weights(b, d)
    q = np.array(q0, dtype=np.float64)
    value = value_fn(q)
    converged = False
    iterations = 0

    while iterations < config.max_iterations:
        iterations += 1
        grad = _finite_difference_gradient(value_fn, q, value, config.fd_step)
        step = config.learning_rate * project_gradient(grad, weights)
        candidate = clip_and_reproject(q + step, b, C, max_rounds=config.projection_rounds)
        candidate_value = value_fn(candidate)
        improvement = candidate_value - value
        if improvement >= 0.0:
            q, value = candidate, candidate_value
        if improvement < config.value_tolerance:
            converged = True
            break

    if not converged:
        warnings.warn(f"Gradient ascent hit the iteration cap ({config.max_iterations}) for b={b}, d={d}, C={C}")

    if config.polish:
        q, value = _polish(value_fn, q, value, b, C, config)

    return OptimizationResult(
        b_star=int(b),
        q_star=tuple(float(q_k) for q_k in q),
        value=value,
        iterations_used=iterations,
        converged=converged,
        values_by_b={int(b): value},
    )


def optimize_heterogeneous(model, C, b_max, config=None, threads=1):
    """(b*, q*) = argmax V_{d,b,q} with d = heterogeneous_depth(b, C) for each b"""
    if int(b_max) != b_max or b_max < 2:
        raise ValueError(f"b_max must be an integer >= 2, got {b_max!r}")
    config = config or GradientConfig()

    def run(b):
        return optimize_q(model, b, heterogeneous_depth(b, C), C, config)

    branchings = list(range(2, int(b_max) + 1))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        results = dict(zip(branchings, executor.map(run, branchings)))

    single = homogeneous_policy(1, C)[0]
    results[1] = OptimizationResult(b_star=1, q_star=single.q, value=0.0, iterations_used=0, converged=True)

    values_by_b = {b: results[b].value for b in sorted(results)}
    best = results[_pick_best(values_by_b)]
    return OptimizationResult(
        b_star=best.b_star,
        q_star=best.q_star,
        value=best.value,
        iterations_used=sum(r.iterations_used for r in results.values()),
        converged=all(r.converged for r in results.values()),
        values_by_b=values_by_b,
    )
