"""
Parameter sweeps and heuristic-loss maps

Every sweep is a pandas DataFrame with one row per grid point. Rows come out
in the lexicographic order of the sorted input axes whatever the thread
count, and per-point failures land in the `error` column.
"""
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import pandas as pd

from src.config import (
    DEFAULT_B_MAX,
    DEFAULT_HEURISTICS,
    DEFAULT_MC_RUNS,
    FD_STEP,
    FLOAT_FORMAT,
    LEARNING_RATE,
    LOSS_MAP_CAPACITIES,
    LOSS_MAP_FAMILIES,
    NA_SENTINEL,
    REDUCED_MAX_ITERATIONS,
    VALUE_TOLERANCE,
)
from src.dist_core import asymptotic_full_reward_prob, tree_value_exhaustive, tree_value_selective
from src.optimize import GradientConfig, homogeneous_value, optimize_homogeneous, optimize_q
from src.oracle_mc import AllocationMode, McConfig, mc_value
from src.policy import heterogeneous_depth, homogeneous_policy, random_policy
from src.reward_model import make_reward_model

SWEEP_MODES = ("exhaustive", "selective", "homogeneous", "heterogeneous", "random", "mc")

RESULT_COLUMNS = {
    "exhaustive": ["family", "n", "p", "b", "d", "value", "error"],
    "selective": ["family", "n", "p", "b", "d", "q", "value", "error"],
    "homogeneous": ["family", "n", "p", "C", "b", "d_prime", "C_r", "q", "value", "is_optimal", "error"],
    "heterogeneous": ["family", "n", "p", "C", "b", "d", "q", "value", "iterations", "converged",
                      "is_optimal", "error"],
    "random": ["family", "n", "p", "C", "b", "d", "q", "value", "error"],
    "mc": ["p", "C", "b", "d", "q", "allocation", "runs", "seed", "value", "stderr", "error"],
    "loss-map": ["family", "n", "p", "C", "b_star", "v_opt", "heuristic_b", "value", "loss_percent", "error"],
    "optimum": ["family", "n", "p", "C", "b_star", "d", "q", "value", "iterations", "converged"],
    "fixed-point": ["p", "b", "value"],
}

NUMERIC_COLUMNS = {"n", "p", "C", "b", "d", "d_prime", "C_r", "value", "iterations", "runs", "seed",
                   "stderr", "b_star", "v_opt", "heuristic_b", "loss_percent"}

# errors a single grid point may raise without aborting the sweep
POINT_ERRORS = (ValueError, ArithmeticError, RuntimeError)


def _sorted_unique(values):
    return sorted(set(values))


def _normalize_family(entry):
    """[family, n] or {"family": ..., "n": ...} -> canonical (family, n)"""
    if isinstance(entry, dict):
        unknown = set(entry) - {"family", "n"}
        if unknown:
            raise ValueError(f"Unknown keys in family entry: {sorted(unknown)}")
        family, n = entry.get("family"), entry.get("n")
    else:
        family, n = entry
    model = make_reward_model(family, n)
    return model.family.value, model.n


@dataclass
class SweepSpec:
    """Grid definition for run_sweep / run_loss_map, mirrored by the JSON config files"""

    mode: str = "exhaustive"
    families: list = field(default_factory=list)
    capacities: list = field(default_factory=list)
    b: list = field(default_factory=list)
    d: list = field(default_factory=list)
    q: list = field(default_factory=list)
    mc_p: list = field(default_factory=list)
    b_max: int = DEFAULT_B_MAX
    heuristics: list = field(default_factory=lambda: list(DEFAULT_HEURISTICS))
    runs: int = DEFAULT_MC_RUNS
    seed: int = 0
    hard: bool = False
    fd_step: float = FD_STEP
    learning_rate: float = LEARNING_RATE
    max_iterations: int = REDUCED_MAX_ITERATIONS
    value_tolerance: float = VALUE_TOLERANCE
    polish: bool = False
    threads: int = 1
    out: str = None
    description: str = ""

    def __post_init__(self):
        if self.mode not in SWEEP_MODES + ("loss-map",):
            raise ValueError(f"Unknown sweep mode {self.mode!r}; expected one of {SWEEP_MODES + ('loss-map',)}")
        self.families = _sorted_unique(_normalize_family(entry) for entry in self.families)
        self.capacities = _sorted_unique(float(C) for C in self.capacities)
        self.b = _sorted_unique(int(b) for b in self.b)
        self.d = _sorted_unique(int(d) for d in self.d)
        self.q = sorted({tuple(float(q_k) for q_k in vector) for vector in self.q})
        self.mc_p = _sorted_unique(float(p) for p in self.mc_p)
        self.heuristics = _sorted_unique(int(h) for h in self.heuristics)
        if any(C <= 0 for C in self.capacities):
            raise ValueError("Capacities must be positive")
        if any(b < 1 for b in self.b) or any(d < 1 for d in self.d):
            raise ValueError("Branching factors and depths must be positive integers")
        if int(self.threads) < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads!r}")
        self._check_axes()

    def _check_axes(self):
        required = {
            "exhaustive": ("families", "b", "d"),
            "selective": ("families", "b", "q"),
            "homogeneous": ("families", "capacities", "b"),
            "heterogeneous": ("families", "capacities", "b"),
            "random": ("families", "capacities", "b"),
            "mc": ("b",),
            "loss-map": ("heuristics",),
        }[self.mode]
        missing = [name for name in required if not getattr(self, name)]
        if missing:
            raise ValueError(f"Sweep mode {self.mode!r} needs non-empty axes: {', '.join(missing)}")
        if self.mode == "mc":
            if not (self.mc_p or self.families):
                raise ValueError("Sweep mode 'mc' needs a p axis (mc_p or families)")
            depth_axes = [name for name in ("d", "capacities", "q") if getattr(self, name)]
            if len(depth_axes) != 1:
                raise ValueError("Sweep mode 'mc' needs exactly one of d, capacities or q")

    def gradient_config(self):
        return GradientConfig(fd_step=self.fd_step, learning_rate=self.learning_rate,
                              max_iterations=self.max_iterations, value_tolerance=self.value_tolerance,
                              polish=bool(self.polish))


def load_sweep_spec(source, **overrides):
    """SweepSpec from a JSON file path or an already-parsed dict; unknown keys are rejected"""
    if isinstance(source, dict):
        raw = dict(source)
    else:
        with open(source, encoding="utf-8") as f:
            raw = json.load(f)
    if not isinstance(raw, dict):
        raise ValueError("Sweep config must be a JSON object")
    known = {f.name for f in fields(SweepSpec)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"Unknown sweep config keys: {', '.join(unknown)}")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return SweepSpec(**raw)


def loss_vs_optimal(v_opt, v):
    """Percentage of the optimal value forfeited, 100 (V_opt - V) / V_opt"""
    if not v_opt > 0:
        raise ValueError(f"Loss is undefined for a non-positive optimal value ({v_opt!r})")
    return 100.0 * (v_opt - v) / v_opt


def format_number(x):
    return FLOAT_FORMAT % x


def format_q(q):
    """q as a compact JSON array, deepest level first"""
    return "[" + ",".join(format_number(q_k) for q_k in q) + "]"


def _family_coords(family, n):
    model = make_reward_model(family, n)
    return model, {"family": model.family.value, "n": model.n, "p": float(model.p_plus)}


def exhaustive_row(family, n, b, d):
    model, row = _family_coords(family, n)
    row.update(b=b, d=d, value=float(tree_value_exhaustive(model, b, d)))
    return row


def selective_row(family, n, b, q):
    model, row = _family_coords(family, n)
    row.update(b=b, d=len(q), q=format_q(q), value=float(tree_value_selective(model, b, len(q), q)))
    return row


def homogeneous_row(family, n, C, b):
    model, row = _family_coords(family, n)
    policy, budget, value = homogeneous_value(model, b, C)
    row.update(C=C, b=b, d_prime=budget.d_prime, C_r=budget.C_r, q=format_q(policy.q), value=float(value))
    return row


def heterogeneous_row(family, n, C, b, config):
    model, row = _family_coords(family, n)
    if b == 1:
        policy, _, value = homogeneous_value(model, 1, C)
        row.update(C=C, b=1, d=policy.d, q=format_q(policy.q), value=value, iterations=0, converged=True)
        return row
    result = optimize_q(model, b, heterogeneous_depth(b, C), C, config)
    row.update(C=C, b=b, d=result.d, q=format_q(result.q_star), value=result.value,
               iterations=result.iterations_used, converged=result.converged)
    return row


def random_row(family, n, C, b, d=None):
    """Uniform q over a depth-d tree, d = heterogeneous_depth(b, C) unless given"""
    model, row = _family_coords(family, n)
    d = heterogeneous_depth(b, C) if d is None else d
    policy = random_policy(b, d, C)
    row.update(C=C, b=b, d=d, q=format_q(policy.q), value=float(tree_value_selective(model, b, d, policy.q)))
    return row


def mc_row(p, b, runs, seed, hard=False, d=None, C=None, q=None, threads=1):
    """One Monte-Carlo point: all-ones at depth d, homogeneous at capacity C, or an explicit q"""
    if C is not None:
        q = homogeneous_policy(b, C)[0].q
    elif q is None:
        q = (1.0,) * d
    mode = AllocationMode.HARD_EXACT if hard else AllocationMode.AVERAGE_BERNOULLI
    estimate = mc_value(p, b, len(q), q, McConfig(runs=runs, seed=seed, allocation_mode=mode, threads=threads))
    return {"p": p, "C": C, "b": b, "d": len(q), "q": format_q(q), "allocation": mode.value,
            "runs": estimate.runs, "seed": seed, "value": estimate.mean, "stderr": estimate.stderr}


def optimum_row(family, n, C, result):
    """Summary of an OptimizationResult"""
    _, row = _family_coords(family, n)
    row.update(C=C, b_star=result.b_star, d=result.d, q=format_q(result.q_star), value=result.value,
               iterations=result.iterations_used, converged=result.converged)
    return row


def fixed_point_row(p, b):
    return {"p": p, "b": b, "value": asymptotic_full_reward_prob(p, b)}


def _grid_points(spec):
    """(coordinates, thunk) pairs in lexicographic order of the sorted axes"""
    points = []
    if spec.mode == "exhaustive":
        for (family, n) in spec.families:
            for b in spec.b:
                for d in spec.d:
                    points.append(({"family": family, "n": n, "b": b, "d": d},
                                   lambda f=family, k=n, b=b, d=d: exhaustive_row(f, k, b, d)))
    elif spec.mode == "selective":
        for (family, n) in spec.families:
            for b in spec.b:
                for q in spec.q:
                    points.append(({"family": family, "n": n, "b": b, "d": len(q), "q": format_q(q)},
                                   lambda f=family, k=n, b=b, q=q: selective_row(f, k, b, q)))
    elif spec.mode in ("homogeneous", "heterogeneous", "random"):
        config = spec.gradient_config()
        for (family, n) in spec.families:
            for C in spec.capacities:
                for b in spec.b:
                    coords = {"family": family, "n": n, "C": C, "b": b}
                    if spec.mode == "homogeneous":
                        thunk = lambda f=family, k=n, C=C, b=b: homogeneous_row(f, k, C, b)
                    elif spec.mode == "heterogeneous":
                        thunk = lambda f=family, k=n, C=C, b=b: heterogeneous_row(f, k, C, b, config)
                    elif spec.d:
                        for d in spec.d:
                            points.append(({**coords, "d": d},
                                           lambda f=family, k=n, C=C, b=b, d=d: random_row(f, k, C, b, d)))
                        continue
                    else:
                        thunk = lambda f=family, k=n, C=C, b=b: random_row(f, k, C, b)
                    points.append((coords, thunk))
    elif spec.mode == "mc":
        p_axis = _sorted_unique(list(spec.mc_p) + [float(make_reward_model(f, k).p_plus) for f, k in spec.families])
        for p in p_axis:
            if spec.capacities:
                inner = [{"C": C} for C in spec.capacities]
            elif spec.q:
                inner = [{"q": q} for q in spec.q]
            else:
                inner = [{"d": d} for d in spec.d]
            for extra in inner:
                for b in spec.b:
                    coords = {"p": p, "b": b, **{k: (format_q(v) if k == "q" else v) for k, v in extra.items()}}
                    points.append((coords, lambda p=p, b=b, extra=extra: mc_row(
                        p, b, spec.runs, spec.seed, spec.hard, threads=1, **extra)))
    return points


def _evaluate(coords, thunk, raise_errors):
    try:
        row = thunk()
        row.setdefault("error", "")
        return row
    except POINT_ERRORS as e:
        if raise_errors:
            raise
        warnings.warn(f"Sweep point {coords} failed: {e}")
        return {**coords, "error": f"{type(e).__name__}: {e}"}


def _flag_optimal(table):
    """is_optimal marks the best b of each (family, n, C) group, smallest b on ties"""
    table["is_optimal"] = False
    ok = table[table["error"] == ""]
    for _, group in ok.groupby(["family", "n", "C"], sort=False):
        best = group.sort_values(["value", "b"], ascending=[False, True]).index[0]
        table.loc[best, "is_optimal"] = True
    return table


def build_table(rows, kind):
    """DataFrame with the column layout of a result kind and numeric dtypes for numeric columns"""
    columns = RESULT_COLUMNS[kind]
    table = pd.DataFrame(rows).reindex(columns=columns)
    for col in columns:
        if col in NUMERIC_COLUMNS:
            table[col] = pd.to_numeric(table[col])
    if "error" in columns:
        table["error"] = table["error"].fillna("")
    return table


def run_sweep(spec, threads=None, raise_errors=False):
    """Evaluate every grid point of a SweepSpec"""
    if spec.mode == "loss-map":
        return run_loss_map(spec, threads=threads, raise_errors=raise_errors)
    threads = max(1, int(threads or spec.threads))
    points = _grid_points(spec)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        rows = list(executor.map(lambda point: _evaluate(*point, raise_errors), points))

    table = build_table(rows, spec.mode)
    if spec.mode in ("homogeneous", "heterogeneous"):
        table = _flag_optimal(table)
    return table


def _loss_map_rows(family, n, C, b_max, heuristics):
    model, coords = _family_coords(family, n)
    coords["C"] = C
    search_max = max([b_max] + list(heuristics))
    result = optimize_homogeneous(model, C, search_max)
    rows = []
    for h in heuristics:
        value = result.values_by_b[h]
        try:
            loss = loss_vs_optimal(result.value, value)
        except ValueError:
            loss = math.nan
        rows.append({**coords, "b_star": result.b_star, "v_opt": result.value, "heuristic_b": h,
                     "value": value, "loss_percent": loss, "error": ""})
    return rows


def run_loss_map(spec, threads=None, raise_errors=False):
    """Loss of fixed-b heuristics against the optimal homogeneous b over a (family, C) grid"""
    families = spec.families or _sorted_unique(_normalize_family(entry) for entry in LOSS_MAP_FAMILIES)
    capacities = spec.capacities or _sorted_unique(float(C) for C in LOSS_MAP_CAPACITIES)
    threads = max(1, int(threads or spec.threads))
    points = [(family, n, C) for (family, n) in families for C in capacities]

    def evaluate(point):
        family, n, C = point
        try:
            return _loss_map_rows(family, n, C, spec.b_max, spec.heuristics)
        except POINT_ERRORS as e:
            if raise_errors:
                raise
            warnings.warn(f"Loss-map point family={family}, n={n}, C={C} failed: {e}")
            return [{"family": family, "n": n, "C": C, "heuristic_b": h, "error": f"{type(e).__name__}: {e}"}
                    for h in spec.heuristics]

    with ThreadPoolExecutor(max_workers=threads) as executor:
        rows = [row for group in executor.map(evaluate, points) for row in group]
    return build_table(rows, "loss-map")


def table_to_csv(table):
    return table.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep=NA_SENTINEL, lineterminator="\n")


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return NA_SENTINEL
        return float(FLOAT_FORMAT % value)
    return value


def table_to_json(table):
    """Records array with the CSV field names and the same 12-digit rounding"""
    records = [{k: _json_value(v) for k, v in row.items()} for row in table.to_dict(orient="records")]
    return json.dumps(records, indent=2) + "\n"


def write_table(table, out=None, as_json=False):
    """Write CSV (or JSON) to a path, or to standard output when out is None"""
    text = table_to_json(table) if as_json else table_to_csv(table)
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    return text
