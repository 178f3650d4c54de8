"""
Zero-average binary reward models
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction


class RewardFamily(str, Enum):
    """Rational families the exact recursion supports"""

    PLUS_HEAVY = "plus"    # p = n/(n+1), rewards {+1, -n}
    MINUS_HEAVY = "minus"  # p = 1/(n+1), rewards {+1, -1/n}

    @classmethod
    def parse(cls, text):
        """Accept 'plus', 'plus-heavy', 'PlusHeavy' and the minus equivalents"""
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "").replace("_", "")
        if key in ("plus", "plusheavy"):
            return cls.PLUS_HEAVY
        if key in ("minus", "minusheavy"):
            return cls.MINUS_HEAVY
        raise ValueError(f"Unknown reward family: {text!r} (expected 'plus' or 'minus')")


@dataclass(frozen=True)
class RewardModel:
    """Binary reward distribution on an integer lattice of width `unit`

    Probabilities and rewards are exact rationals. Lattice indices are
    integers k with reward value k * unit; a positive draw moves the index
    by `up_step`, a negative draw by `-down_step`.
    """

    family: RewardFamily
    n: int
    p_plus: Fraction
    r_plus: Fraction
    r_minus: Fraction
    unit: Fraction

    @property
    def p_minus(self):
        return 1 - self.p_plus

    @property
    def up_step(self):
        return int(self.r_plus / self.unit)

    @property
    def down_step(self):
        return int(-self.r_minus / self.unit)

    @property
    def p(self):
        return float(self.p_plus)

    def index_value(self, index):
        """Reward value of a lattice index"""
        return index * self.unit

    def label(self):
        return f"{self.family.value}{self.n}"


@dataclass(frozen=True)
class ArbitraryReward:
    """Reward descriptor for p outside the rational families (Monte Carlo only)"""

    p: float
    r_minus: float
    r_plus: float = 1.0

    @classmethod
    def from_probability(cls, p):
        return cls(p=float(p), r_minus=float(zero_average_negative_reward(p)))


def make_reward_model(family, n):
    """Build the zero-average model for a rational family"""
    family = RewardFamily.parse(family)
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"Family parameter n must be a positive integer, got {n!r}")
    n = int(n)

    # p = 1/2 is shared by both families; keep a single canonical model
    if n == 1:
        family = RewardFamily.PLUS_HEAVY

    if family is RewardFamily.PLUS_HEAVY:
        p_plus = Fraction(n, n + 1)
        r_minus = Fraction(-n)
        unit = Fraction(1)
    else:
        p_plus = Fraction(1, n + 1)
        r_minus = Fraction(-1, n)
        unit = Fraction(1, n)

    model = RewardModel(family=family, n=n, p_plus=p_plus, r_plus=Fraction(1), r_minus=r_minus, unit=unit)
    assert model.p_plus * model.r_plus + model.p_minus * model.r_minus == 0
    return model


def zero_average_negative_reward(p):
    """R- = -p/(1-p), so that p*1 + (1-p)*R- = 0"""
    if not 0 < p < 1:
        raise ValueError(f"Probability must lie in (0, 1), got {p!r}")
    return -p / (1 - p)

