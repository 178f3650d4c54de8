"""
Tests for the zero-average reward families
"""
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.reward_model import (
    ArbitraryReward,
    RewardFamily,
    make_reward_model,
    zero_average_negative_reward,
)


@pytest.mark.parametrize("family, n, p, r_minus, unit", [
    ("plus", 1, Fraction(1, 2), Fraction(-1), Fraction(1)),
    ("plus", 2, Fraction(2, 3), Fraction(-2), Fraction(1)),
    ("minus", 2, Fraction(1, 3), Fraction(-1, 2), Fraction(1, 2)),
    ("minus", 99, Fraction(1, 100), Fraction(-1, 99), Fraction(1, 99)),
])
def test_family_parameters(family, n, p, r_minus, unit):
    model = make_reward_model(family, n)
    assert model.p_plus == p
    assert model.r_plus == 1
    assert model.r_minus == r_minus
    assert model.unit == unit


@pytest.mark.parametrize("family", list(RewardFamily))
@pytest.mark.parametrize("n", range(1, 12))
def test_zero_average_holds_exactly(family, n):
    model = make_reward_model(family, n)
    assert model.p_plus * model.r_plus + model.p_minus * model.r_minus == 0
    assert (model.p_plus * (n + 1)).denominator == 1
    assert (model.r_minus / model.unit).denominator == 1


def test_n_equal_one_is_the_same_model_in_both_families():
    assert make_reward_model("plus", 1) == make_reward_model("minus", 1)


@pytest.mark.parametrize("n", [0, -1, 1.5, True])
def test_rejects_invalid_n(n):
    with pytest.raises(ValueError):
        make_reward_model("plus", n)


def test_lattice_steps():
    plus = make_reward_model("plus", 3)
    minus = make_reward_model("minus", 3)
    assert (plus.up_step, plus.down_step) == (1, 3)
    assert (minus.up_step, minus.down_step) == (3, 1)
    assert minus.index_value(3) == 1


@pytest.mark.parametrize("text, expected", [
    ("plus", RewardFamily.PLUS_HEAVY),
    ("PlusHeavy", RewardFamily.PLUS_HEAVY),
    ("minus-heavy", RewardFamily.MINUS_HEAVY),
    (RewardFamily.MINUS_HEAVY, RewardFamily.MINUS_HEAVY),
])
def test_parse_family(text, expected):
    assert RewardFamily.parse(text) is expected


def test_parse_family_rejects_unknown():
    with pytest.raises(ValueError):
        RewardFamily.parse("neutral")


def test_zero_average_negative_reward():
    assert zero_average_negative_reward(0.5) == -1
    assert zero_average_negative_reward(0.75) == -3
    assert zero_average_negative_reward(0.01) == pytest.approx(-1 / 99, rel=1e-12)
    assert 0.01 + 0.99 * zero_average_negative_reward(0.01) == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("p", [0, 1, -0.2, 1.5])
def test_zero_average_negative_reward_rejects_out_of_range(p):
    with pytest.raises(ValueError):
        zero_average_negative_reward(p)


def test_arbitrary_reward():
    reward = ArbitraryReward.from_probability(0.2)
    assert reward.r_plus == 1.0
    assert reward.r_minus == pytest.approx(-0.25)
