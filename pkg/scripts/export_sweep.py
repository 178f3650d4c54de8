"""
Export a sweep or loss-map config to a formatted Excel workbook

Usage:
    python export_sweep.py configs/homogeneous_even.json
    python export_sweep.py configs/loss_map.json outputs/tables/loss_map.xlsx
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import CONFIG_DIR, OUTPUT_DIR
from src.excel_formatter import format_result_table_excel
from src.sweep import load_sweep_spec, run_sweep

if len(sys.argv) < 2:
    print("Usage: python export_sweep.py <config.json> [output.xlsx]")
    sys.exit(1)

config_path = Path(sys.argv[1])
if not config_path.exists():
    config_path = CONFIG_DIR / config_path.name
try:
    spec = load_sweep_spec(config_path)
except (OSError, ValueError) as e:
    print(f"Error: cannot load {config_path}: {e}")
    sys.exit(1)

output_file = sys.argv[2] if len(sys.argv) > 2 else OUTPUT_DIR / f"{config_path.stem}.xlsx"
Path(output_file).parent.mkdir(parents=True, exist_ok=True)

print(f"Running {spec.mode} sweep from {config_path}...")
table = run_sweep(spec)
failed = int((table["error"] != "").sum())
print(f"  {len(table)} rows, {failed} failed points")

title = spec.description or f"{spec.mode} sweep"
excel_file = format_result_table_excel(table, title, output_file=output_file)

print(f"\n✓ Excel file created: {excel_file}")
print("  - Optimal rows shaded dark gray")
print("  - Failed points shown with NA values and an error message")
