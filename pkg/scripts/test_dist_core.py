"""
Tests for the diffusion-maximization recursion
"""
import itertools
import sys
import time
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.dist_core import (
    ValueKind,
    ValuePmf,
    asymptotic_full_reward_prob,
    depth_one_pmf,
    diffusion_step,
    distinct_state_count,
    full_reward_probability,
    full_reward_trajectory,
    maximization_step,
    point_mass,
    reachable_indices,
    tree_value_exhaustive,
    tree_value_selective,
    value_distribution,
)
from src.oracle_mc import enumerate_tree_value, pairwise_max_value
from src.reward_model import make_reward_model

HALF = make_reward_model("plus", 1)


def test_depth_one_two_branches():
    pmf = depth_one_pmf(HALF, 2, 1, exact=True)
    assert pmf.probability(1) == Fraction(3, 4)
    assert pmf.probability(-1) == Fraction(1, 4)
    assert pmf.probability(0) == 0


def test_depth_one_nothing_sampled():
    pmf = depth_one_pmf(HALF, 3, 0)
    assert pmf.probability(0) == 1.0
    assert pmf.support_size() == 1


@pytest.mark.parametrize("b, q1", [(0, 1), (2, -0.1), (2, 1.5)])
def test_depth_one_rejects_invalid(b, q1):
    with pytest.raises(ValueError):
        depth_one_pmf(HALF, b, q1)


@pytest.mark.parametrize("b", range(1, 21))
def test_depth_one_closed_form(b):
    assert tree_value_exhaustive(HALF, b, 1) == pytest.approx(1 - 2.0 ** (1 - b), abs=1e-12)


def test_two_level_binary_tree():
    assert tree_value_exhaustive(HALF, 2, 2, exact=True) == Fraction(19, 16)
    assert tree_value_exhaustive(HALF, 2, 2) == pytest.approx(1.1875, abs=1e-12)


def test_steps_change_kind_and_support():
    model = make_reward_model("plus", 2)
    q_pmf = diffusion_step(point_mass(model), 0.5)
    assert q_pmf.kind is ValueKind.ACTION
    assert (q_pmf.min_index, q_pmf.max_index) == (-2, 1)
    assert q_pmf.total() == pytest.approx(1.0)
    j_pmf = maximization_step(q_pmf, 3)
    assert j_pmf.kind is ValueKind.STATE
    with pytest.raises(ValueError):
        maximization_step(j_pmf, 3)
    with pytest.raises(ValueError):
        diffusion_step(q_pmf, 0.5)


def test_large_exhaustive_tree_is_fast_and_near_diagonal():
    start = time.perf_counter()
    value = tree_value_exhaustive(HALF, 5, 20)
    assert time.perf_counter() - start < 1.0
    assert 17 <= value < 20


@pytest.mark.parametrize("family, n", [("plus", 1), ("plus", 3), ("minus", 4)])
def test_mass_is_normalized(family, n):
    model = make_reward_model(family, n)
    pmf = value_distribution(model, 3, [0.3, 1, 0.7, 1, 0.2, 1])
    assert pmf.total() == pytest.approx(1.0, abs=1e-12)
    assert np.all(pmf.mass >= 0)


def test_deep_tree_is_renormalized():
    pmf = value_distribution(HALF, 2, [1] * 60)
    assert pmf.total() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("d", range(1, 9))
def test_exhaustive_half_support_has_parity_of_depth(d):
    pmf = value_distribution(HALF, 2, [1] * d, exact=True)
    assert all((k - d) % 2 == 0 and -d <= k <= d for k in pmf.atoms())


@pytest.mark.parametrize("family, n", [("plus", 2), ("plus", 3), ("minus", 2), ("minus", 3)])
@pytest.mark.parametrize("s", range(1, 6))
def test_support_matches_distinct_state_count(family, n, s):
    model = make_reward_model(family, n)
    pmf = value_distribution(model, 2, [Fraction(1, 2)] * s, exact=True)
    assert set(pmf.atoms()) == reachable_indices(model, s)
    assert pmf.support_size() == distinct_state_count(n, s)


def test_distinct_state_count():
    assert distinct_state_count(2, 3) == 9
    assert distinct_state_count(3, 2) == 6
    assert distinct_state_count(1, 4) == 9
    with pytest.raises(ValueError):
        distinct_state_count(0, 3)


@pytest.mark.parametrize("family, n", [("plus", 1), ("plus", 2), ("minus", 3)])
def test_exact_and_float_agree(family, n):
    model = make_reward_model(family, n)
    q = [0.25, 0.5, 1, 0.75]
    exact = tree_value_selective(model, 3, 4, q, exact=True)
    assert isinstance(exact, Fraction)
    assert float(exact) == pytest.approx(tree_value_selective(model, 3, 4, q), abs=1e-12)


def test_exact_mode_depth_limit():
    with pytest.raises(ValueError):
        value_distribution(HALF, 2, [1] * 13, exact=True)


def test_selective_rejects_mismatched_depth():
    with pytest.raises(ValueError):
        tree_value_selective(HALF, 2, 3, [1, 1])


def _brute_force_grid():
    families = [("plus", 1), ("plus", 2), ("plus", 3), ("minus", 2), ("minus", 3)]
    levels = [Fraction(0), Fraction(1, 2), Fraction(1)]
    for (family, n), b, d in itertools.product(families, (1, 2, 3), (1, 2, 3)):
        for q in itertools.product(levels, repeat=d):
            yield family, n, b, d, q


def test_recursion_matches_pairwise_enumeration():
    checked = 0
    for family, n, b, d, q in _brute_force_grid():
        model = make_reward_model(family, n)
        expected = pairwise_max_value(model, b, d, q)
        assert tree_value_selective(model, b, d, q) == pytest.approx(float(expected), abs=1e-10)
        assert tree_value_selective(model, b, d, q, exact=True) == expected
        checked += 1
    assert checked == 5 * 3 * (3 + 9 + 27)


@pytest.mark.parametrize("family, n", [("plus", 1), ("plus", 2), ("minus", 2)])
@pytest.mark.parametrize("b, d", [(1, 3), (2, 1), (2, 2), (3, 1)])
def test_recursion_matches_literal_enumeration(family, n, b, d):
    model = make_reward_model(family, n)
    for q in itertools.product([Fraction(0), Fraction(1, 2), Fraction(1)], repeat=d):
        assert tree_value_selective(model, b, d, q, exact=True) == enumerate_tree_value(model, b, d, q)


def test_full_reward_recursion():
    assert full_reward_probability(0.5, 2, 1) == pytest.approx(0.75)
    trajectory = full_reward_trajectory(0.5, 2, 3)
    assert len(trajectory) == 3
    assert trajectory[1] == pytest.approx(1 - (1 - 0.5 * 0.75) ** 2)


def test_full_reward_matches_distribution():
    pmf = value_distribution(HALF, 3, [1] * 4, exact=True)
    assert float(pmf.probability(4)) == pytest.approx(full_reward_probability(0.5, 3, 4), abs=1e-12)


def test_fixed_point_known_value():
    assert asymptotic_full_reward_prob(0.9, 2) == pytest.approx(80 / 81, abs=1e-10)


def test_fixed_point_is_zero_iff_subcritical():
    for k in range(1, 21):
        p = (k - 0.5) / 20
        for b in range(1, 21):
            value = asymptotic_full_reward_prob(p, b)
            if p * b <= 1:
                assert value == 0.0
            else:
                assert value > 0.0


@pytest.mark.parametrize("p, b", [(0.9, 2), (0.5, 3), (0.3, 5), (0.7, 4)])
def test_fixed_point_matches_long_iteration(p, b):
    assert full_reward_probability(p, b, 200) == pytest.approx(asymptotic_full_reward_prob(p, b), abs=1e-6)


def test_value_grows_with_p():
    models = [make_reward_model(f, n) for f, n in [("minus", 3), ("minus", 2), ("plus", 1), ("plus", 2), ("plus", 3)]]
    for d in range(1, 13):
        values = [tree_value_exhaustive(model, 2, d) for model in models]
        assert all(lo <= hi + 1e-12 for lo, hi in zip(values, values[1:]))


@pytest.mark.parametrize("family, n", [("plus", 1), ("plus", 3), ("minus", 3)])
def test_value_bounds(family, n):
    model = make_reward_model(family, n)
    assert tree_value_selective(model, 3, 4, [0, 0, 0, 0]) == 0
    for q in ([1, 1, 1, 1], [0.2, 0.5, 1, 0.7], [0.9, 0, 0.4, 1]):
        value = tree_value_selective(model, 3, 4, q)
        assert -n * 4 <= value < 4


def test_diffusion_step_exact_atoms():
    j_pmf = depth_one_pmf(HALF, 2, 1, exact=True)
    assert j_pmf.atoms() == {-1: Fraction(1, 4), 1: Fraction(3, 4)}
    q_pmf = diffusion_step(j_pmf, 1)
    assert q_pmf.atoms() == {-2: Fraction(1, 8), 0: Fraction(1, 2), 2: Fraction(3, 8)}

    model = make_reward_model("plus", 2)
    start = ValuePmf(model, depth=1, kind=ValueKind.STATE, min_index=1, mass=[Fraction(1)])
    assert diffusion_step(start, 1).atoms() == {2: Fraction(2, 3), -1: Fraction(1, 3)}


def test_maximization_step_exact_atoms():
    q_pmf = diffusion_step(depth_one_pmf(HALF, 2, 1, exact=True), 1)
    j_pmf = maximization_step(q_pmf, 2)
    assert j_pmf.atoms() == {-2: Fraction(1, 64), 0: Fraction(24, 64), 2: Fraction(39, 64)}
    assert j_pmf.expectation() == Fraction(19, 16)


@pytest.mark.parametrize("family, n", [("plus", 1), ("plus", 2), ("minus", 3)])
def test_unsampled_level_and_single_branch_leave_atoms_unchanged(family, n):
    model = make_reward_model(family, n)
    j_pmf = value_distribution(model, 3, [Fraction(1, 2), 1], exact=True)
    assert diffusion_step(j_pmf, 0).atoms() == j_pmf.atoms()
    q_pmf = diffusion_step(j_pmf, Fraction(1, 3))
    assert maximization_step(q_pmf, 1).atoms() == q_pmf.atoms()


@pytest.mark.parametrize("family, n", [("plus", 1), ("plus", 2), ("minus", 3)])
def test_top_atom_is_reached_only_by_a_positive_draw(family, n):
    model = make_reward_model(family, n)
    j_pmf = point_mass(model, exact=True)
    for d in range(1, 6):
        q_pmf = diffusion_step(j_pmf, 1)
        assert q_pmf.probability(d) == model.p_plus * j_pmf.probability(d - 1)
        j_pmf = maximization_step(q_pmf, 2)


@pytest.mark.parametrize("family, n", [("plus", 1), ("minus", 9)])
@pytest.mark.parametrize("b", [2, 5, 20])
@pytest.mark.parametrize("d", [20, 30, 49])
def test_mass_and_value_bounds_below_renormalize_threshold(family, n, b, d):
    model = make_reward_model(family, n)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pmf = value_distribution(model, b, [1] * d)
    assert abs(pmf.total() - 1.0) <= 1e-12
    assert np.all(pmf.mass >= 0)
    value = pmf.expectation()
    assert -n * d <= value < d


@pytest.mark.parametrize("family, n", [("plus", 1), ("minus", 9)])
def test_each_step_keeps_unit_mass(family, n):
    model = make_reward_model(family, n)
    pmf = point_mass(model)
    for _ in range(49):
        pmf = diffusion_step(pmf, 1)
        assert abs(pmf.total() - 1.0) <= 1e-12
        pmf = maximization_step(pmf, 20)
        assert abs(pmf.total() - 1.0) <= 1e-12


@pytest.mark.parametrize("family, n", [("plus", 1), ("plus", 2), ("minus", 2)])
def test_recursion_matches_literal_enumeration_binary_depth_three(family, n):
    model = make_reward_model(family, n)
    for q in itertools.product([0, 1], repeat=3):
        assert tree_value_selective(model, 2, 3, q, exact=True) == enumerate_tree_value(model, 2, 3, q)


@pytest.mark.slow
def test_exhaustive_runtime_scales_quadratically():
    model = make_reward_model("plus", 4)

    def best_time(d):
        timings = []
        for _ in range(7):
            start = time.perf_counter()
            tree_value_exhaustive(model, 3, d)
            timings.append(time.perf_counter() - start)
        return min(timings)

    best_time(100)
    assert best_time(200) <= 4.5 * best_time(100)
