"""
Tests for allocation policies and capacity bookkeeping
"""
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.policy import (
    InfeasibleCapacityError,
    Policy,
    capacity_of,
    capacity_weights,
    floor_log,
    heterogeneous_depth,
    homogeneous_policy,
    random_policy,
)


def test_homogeneous_policy_spreads_remainder_on_last_level():
    policy, budget = homogeneous_policy(2, 100)
    assert budget.d_prime == 6
    assert budget.C_r == pytest.approx(38)
    assert policy.q == (38 / 64, 1.0, 1.0, 1.0, 1.0, 1.0)


@pytest.mark.parametrize("b, C, d_prime", [(2, 6, 2), (2, 14, 3), (3, 12, 2)])
def test_exact_level_fill_stays_on_shallower_level(b, C, d_prime):
    policy, budget = homogeneous_policy(b, C)
    assert budget.d_prime == d_prime
    assert policy.q == (1.0,) * d_prime


def test_homogeneous_policy_three_branches():
    policy, budget = homogeneous_policy(3, 10)
    assert budget.d_prime == 2
    assert policy.q[0] == pytest.approx(7 / 9)


def test_single_branch_policy():
    policy, budget = homogeneous_policy(1, 3.5)
    assert budget.d_prime == 4
    assert policy.q == (0.5, 1.0, 1.0, 1.0)
    policy, _ = homogeneous_policy(1, 3)
    assert policy.q == (1.0, 1.0, 1.0)


@pytest.mark.parametrize("C", [0, -5])
def test_homogeneous_policy_rejects_non_positive_capacity(C):
    with pytest.raises(ValueError):
        homogeneous_policy(2, C)


def test_homogeneous_capacity_is_exact_across_grid():
    for b in range(1, 51):
        for C in (1, 2.5, 7, 10, 99.9, 1000, 12345, 10**6):
            policy, _ = homogeneous_policy(b, C)
            assert capacity_of(b, policy.q) == pytest.approx(C, rel=1e-12, abs=1e-9)
            assert all(0.0 <= q_k <= 1.0 for q_k in policy.q)


@pytest.mark.parametrize("C", [10, 100, 1000, 5000])
def test_last_sampled_level_is_nonincreasing_in_b(C):
    depths = [homogeneous_policy(b, C)[1].d_prime for b in range(1, 51)]
    assert all(a >= b for a, b in zip(depths, depths[1:]))


def test_capacity_weights_are_reverse_indexed():
    np.testing.assert_array_equal(capacity_weights(2, 3), [8.0, 4.0, 2.0])
    assert capacity_of(3, (0.5, 1.0)) == pytest.approx(7.5)


def test_capacity_weights_overflow_names_level():
    with pytest.raises(OverflowError, match="level"):
        capacity_weights(10, 400)


@pytest.mark.parametrize("b, C, d", [(2, 100, 15), (2, 10, 9), (3, 10, 7), (2, 8, 9), (10, 1000, 9)])
def test_heterogeneous_depth(b, C, d):
    assert heterogeneous_depth(b, C) == d


def test_heterogeneous_depth_excludes_single_branch():
    with pytest.raises(ValueError):
        heterogeneous_depth(1, 10)


def test_floor_log_at_exact_powers():
    assert floor_log(1000, 10) == 3
    assert floor_log(999, 10) == 2
    assert floor_log(3**20, 3) == 20


@pytest.mark.parametrize("b, d, C, q", [(2, 2, 3, 0.5), (2, 3, 14, 1.0), (3, 2, 6, 0.5)])
def test_random_policy(b, d, C, q):
    policy = random_policy(b, d, C)
    assert policy.q == pytest.approx((q,) * d)
    assert policy.capacity() == pytest.approx(C, abs=1e-9)


def test_random_policy_rejects_infeasible_capacity():
    with pytest.raises(InfeasibleCapacityError, match="exceeds"):
        random_policy(2, 2, 7)
    assert issubclass(InfeasibleCapacityError, ValueError)


def test_policy_validation_and_padding():
    with pytest.raises(ValueError):
        Policy(2, (1.2,))
    with pytest.raises(ValueError):
        Policy(0, (1.0,))
    padded = Policy(2, (0.5, 1.0)).padded(4)
    assert padded.q == (0.0, 0.0, 0.5, 1.0)
    assert padded.capacity() == pytest.approx(Policy(2, (0.5, 1.0)).capacity())
