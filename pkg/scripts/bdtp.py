"""
Breadth-depth tree planner command line

Usage:
    python scripts/bdtp.py value-exhaustive --family plus --n 1 --b 2 --d 10
    python scripts/bdtp.py optimize-homogeneous --family minus --n 99 --capacity 10 --b-max 40
    python scripts/bdtp.py sweep --config configs/homogeneous_even.json --out outputs/tables/homogeneous_even.csv
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
