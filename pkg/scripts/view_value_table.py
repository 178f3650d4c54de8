"""
Simple script to view tree values and the distribution of J_d for a reward family

Usage:
    python view_value_table.py                    # p = 1/2 (plus 1), b = 2, d = 6
    python view_value_table.py minus 4 3 8        # family, n, b, d
"""
import sys
from pathlib import Path

import pandas as pd

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import OUTPUT_DIR
from src.dist_core import full_reward_trajectory, value_distribution
from src.reward_model import make_reward_model
from src.sweep import SweepSpec, run_sweep, table_to_csv

# Get family, n, b, d from command line or use defaults
try:
    family = sys.argv[1] if len(sys.argv) > 1 else "plus"
    n = int(sys.argv[2]) if len(sys.argv) > 2 else 1
    b = int(sys.argv[3]) if len(sys.argv) > 3 else 2
    d = int(sys.argv[4]) if len(sys.argv) > 4 else 6
    model = make_reward_model(family, n)
except ValueError as e:
    print(f"Error: {e}")
    print("Usage: python view_value_table.py [plus|minus] [n] [b] [d]")
    sys.exit(1)

print(f"Reward model {model.label()}: p = {model.p_plus}, R+ = {model.r_plus}, R- = {model.r_minus}")

# Exhaustive values over a small (b, d) grid
spec = SweepSpec(mode="exhaustive", families=[(family, n)], b=[1, 2, 3, 5, b], d=list(range(1, d + 1)))
table = run_sweep(spec)
grid = table.pivot(index="b", columns="d", values="value")

print("\n" + "=" * 100)
print("EXHAUSTIVE TREE VALUE V(d, b)")
print("=" * 100)
print(grid.to_string(float_format=lambda v: f"{v:.4f}"))

# Distribution of the optimal-path reward at (b, d)
pmf = value_distribution(model, b, [1] * d, exact=d <= 12)
atoms = pd.DataFrame(
    [(float(model.index_value(i)), float(prob)) for i, prob in sorted(pmf.atoms().items())],
    columns=["J", "probability"],
)

print("\n" + "-" * 100)
print(f"DISTRIBUTION OF J_{d} (b = {b}, {'exact' if pmf.exact else 'float'} arithmetic)")
print("-" * 100)
print(atoms.to_string(index=False))
print(f"\nE[J_{d}] = {float(pmf.expectation()):.12g}   support size = {pmf.support_size()}")

print("\n" + "-" * 100)
print("FULL-REWARD PROBABILITY P(J_k = k)")
print("-" * 100)
for k, prob in enumerate(full_reward_trajectory(float(model.p_plus), b, d), start=1):
    print(f"  k = {k:>3}: {prob:.6f}")

# Save to CSV
OUTPUT_DIR.mkdir(parents=True, exist_ok=True)
csv_file = OUTPUT_DIR / f"value_table_{model.label()}.csv"
with open(csv_file, "w", encoding="utf-8", newline="\n") as f:
    f.write(table_to_csv(table))
print(f"\n\n✓ Saved to: {csv_file}")
