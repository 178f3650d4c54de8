"""
Plot a sweep CSV: value against one axis, one line per group

Usage:
    python plot_sweep.py outputs/tables/homogeneous_even.csv b C
    python plot_sweep.py outputs/tables/exhaustive_depth.csv d b
"""
import sys
from pathlib import Path

import matplotlib
matplotlib.use('Agg')  # Use non-interactive backend
import matplotlib.pyplot as plt
import pandas as pd

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import NA_SENTINEL, PLOTS_DIR

if len(sys.argv) < 4:
    print("Usage: python plot_sweep.py <sweep.csv> <x column> <group column>")
    sys.exit(1)

csv_file, x_col, group_col = Path(sys.argv[1]), sys.argv[2], sys.argv[3]
table = pd.read_csv(csv_file, na_values=[NA_SENTINEL], keep_default_na=False)
table = table[table["value"].notna()]

for col in (x_col, group_col):
    if col not in table.columns:
        print(f"Column {col!r} not in {csv_file}; available: {list(table.columns)}")
        sys.exit(1)

print(f"Loaded {len(table)} rows from {csv_file}")

fig, ax = plt.subplots(figsize=(10, 6))
groups = sorted(table[group_col].unique())
colors = plt.cm.viridis([i / max(1, len(groups) - 1) for i in range(len(groups))])

for color, key in zip(colors, groups):
    group = table[table[group_col] == key].sort_values(x_col)
    ax.plot(group[x_col], group["value"], marker='o', markersize=3, linewidth=1.5,
            color=color, label=f"{group_col} = {key}")
    # optimal points of homogeneous / heterogeneous sweeps
    if "is_optimal" in group.columns:
        best = group[group["is_optimal"].astype(str) == "True"]
        ax.scatter(best[x_col], best["value"], s=60, facecolors='none', edgecolors=color)

ax.set_xlabel(x_col, fontsize=12, fontweight='bold')
ax.set_ylabel('Value', fontsize=12, fontweight='bold')
ax.set_title(csv_file.stem, fontsize=14, fontweight='bold')
ax.grid(True, alpha=0.3, linestyle='--')
ax.legend(loc='best', fontsize=9, framealpha=0.9)
plt.tight_layout()

PLOTS_DIR.mkdir(parents=True, exist_ok=True)
output_file = PLOTS_DIR / f"{csv_file.stem}_{x_col}.png"
plt.savefig(output_file, dpi=200, bbox_inches='tight')
print(f"\n✓ Plot saved to: {output_file}")

plt.close()
