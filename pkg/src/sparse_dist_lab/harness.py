"""Seeded experiment harness: config-driven grids, CSV persistence, summaries.

A grid is the Cartesian product of sparsity values, constraint values
(epsilon or ell), and trial indices, at fixed (scheme, k, n). Each trial
draws a fresh s-sparse uniform target, runs the scheme end to end, and
records the TV error. Results stream to a CSV with a fixed header; runs are
resumable (existing (cell, trial) rows are skipped) and byte-identical
across repetitions and thread counts.

Determinism works by construction: a trial's seed is an avalanche mix of
(master_seed, cell hash, trial index), where the cell hash folds a canonical
string naming the cell. Nothing downstream of that seed depends on
scheduling. Two deliberate wrinkles, both load-bearing for the experiment
semantics:

* hr_dense and hr_sparse hash to the same cell string (family "hr"), so the
  two projection modes decode identical message batches - the projection
  comparison is paired, not independent.
* comm_hash cells hash their *effective* bit count; raising ell past the
  ceil(log2 s)+1 cap changes nothing about the protocol, so such cells are
  the same experiment and deliberately replay the same trials.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import comm_stage_sizes, ldp_risk_bound, planned_sample_size
from .comm_hash import comm_run, effective_ell
from .core import GOLDEN64, RandomStream, fold_string, make_uniform_sparse, mix64, tv_distance
from .hadamard import hadamard_dim
from .hadamard_response import hr_run
from .rappor import rappor_run

CSV_HEADER = "scheme,k,s,n,eps_or_ell,trial,tv_error,bits_per_user,seed"

SCHEMES = ("hr_dense", "hr_sparse", "rappor", "comm_hash")

_CONFIG_FIELDS = {"scheme", "k", "s_list", "n", "trials", "master_seed", "epsilon_list", "ell_list", "out"}


@dataclass(frozen=True)
class ExperimentConfig:
    """One grid: a scheme, its domain, and the lists swept over."""

    scheme: str
    k: int
    s_list: tuple[int, ...]
    n: int
    trials: int
    master_seed: int
    epsilon_list: tuple[float, ...] | None = None
    ell_list: tuple[int, ...] | None = None
    out: str | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.k < 1 or self.n < 1 or self.trials < 1:
            raise ValueError("k, n, trials must be positive")
        object.__setattr__(self, "s_list", tuple(int(s) for s in self.s_list))
        if not self.s_list or any(not 1 <= s <= self.k for s in self.s_list):
            raise ValueError("every s must satisfy 1 <= s <= k")
        wants_ell = self.scheme == "comm_hash"
        if wants_ell:
            if self.ell_list is None or self.epsilon_list is not None:
                raise ValueError("comm_hash takes ell_list (and no epsilon_list)")
            object.__setattr__(self, "ell_list", tuple(int(v) for v in self.ell_list))
            if any(v < 1 for v in self.ell_list):
                raise ValueError("ell values must be >= 1")
            if self.n % 2:
                raise ValueError("comm_hash needs an even n (the scheme splits users in half)")
        else:
            if self.epsilon_list is None or self.ell_list is not None:
                raise ValueError(f"{self.scheme} takes epsilon_list (and no ell_list)")
            object.__setattr__(self, "epsilon_list", tuple(float(v) for v in self.epsilon_list))
            if any(v <= 0 for v in self.epsilon_list):
                raise ValueError("epsilon values must be positive")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        unknown = set(raw) - _CONFIG_FIELDS
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        missing = {"scheme", "k", "s_list", "n", "trials", "master_seed"} - set(raw)
        if missing:
            raise ValueError(f"missing config fields: {sorted(missing)}")
        return cls(**raw)

    def params(self) -> tuple:
        return self.ell_list if self.scheme == "comm_hash" else self.epsilon_list


def load_configs(path: str) -> list[ExperimentConfig]:
    """Read a config file holding one grid object or a list of them."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = [raw]
    if not isinstance(raw, list) or not raw:
        raise ValueError("config must be an object or a nonempty list of objects")
    return [ExperimentConfig.from_dict(item) for item in raw]


@dataclass(frozen=True)
class Cell:
    """One grid point; ``param`` is epsilon or ell depending on the scheme."""

    scheme: str
    k: int
    s: int
    n: int
    param: float | int

    def param_str(self) -> str:
        return repr(self.param) if isinstance(self.param, float) else str(self.param)


@dataclass(frozen=True)
class TrialResult:
    scheme: str
    k: int
    s: int
    n: int
    eps_or_ell: float | int
    trial_index: int
    tv_error: float
    bits_per_user: int
    wall_time: float
    seed_used: int

    def csv_row(self) -> str:
        param = repr(self.eps_or_ell) if isinstance(self.eps_or_ell, float) else str(self.eps_or_ell)
        return (
            f"{self.scheme},{self.k},{self.s},{self.n},{param},"
            f"{self.trial_index},{self.tv_error!r},{self.bits_per_user},{self.seed_used}"
        )


def scheme_family(scheme: str) -> str:
    """Seeding family: both HR projection modes share message batches."""
    return "hr" if scheme in ("hr_dense", "hr_sparse") else scheme


def cell_hash(cell: Cell) -> int:
    """Stable 64-bit identity of a cell's experiment (not of its reporting).

    comm_hash cells fold the effective bit count: ell values above the
    sparsity cap describe the same protocol, so they are the same experiment.
    """
    family = scheme_family(cell.scheme)
    if cell.scheme == "comm_hash":
        tag = f"ell={effective_ell(int(cell.param), cell.s)}"
    else:
        tag = f"eps={cell.param!r}"
    return fold_string(f"{family}|k={cell.k}|s={cell.s}|n={cell.n}|{tag}")


def trial_seed(master_seed: int, cell: Cell, trial_index: int) -> int:
    """The 64-bit seed that fully determines one trial."""
    mixed = mix64(mix64(master_seed) ^ cell_hash(cell))
    return mix64(mixed ^ ((trial_index + 1) * GOLDEN64 & (2**64 - 1)))


def bits_per_user(scheme: str, k: int, param) -> int:
    if scheme in ("hr_dense", "hr_sparse"):
        return 1
    if scheme == "rappor":
        return k
    return int(param)


def run_trial(cell: Cell, trial_index: int, master_seed: int) -> TrialResult:
    """Run one seeded trial of a cell; pure function of its arguments."""
    seed = trial_seed(master_seed, cell, trial_index)
    stream = RandomStream(seed)
    start = time.perf_counter()
    try:
        target = make_uniform_sparse(cell.k, cell.s, stream.child(0))
        run_stream = stream.child(1)
        if cell.scheme in ("hr_dense", "hr_sparse"):
            mode = "dense" if cell.scheme == "hr_dense" else "sparse"
            estimate = hr_run(target, cell.n, float(cell.param), run_stream, mode=mode, s=cell.s)
        elif cell.scheme == "rappor":
            estimate = rappor_run(target, cell.n, float(cell.param), cell.s, run_stream)
        else:
            estimate = comm_run(target, cell.n, int(cell.param), cell.s, run_stream)
    except ValueError as err:
        raise ValueError(f"cell {cell}: {err}") from err
    elapsed = time.perf_counter() - start
    return TrialResult(
        scheme=cell.scheme,
        k=cell.k,
        s=cell.s,
        n=cell.n,
        eps_or_ell=cell.param,
        trial_index=trial_index,
        tv_error=tv_distance(estimate, target),
        bits_per_user=bits_per_user(cell.scheme, cell.k, cell.param),
        wall_time=elapsed,
        seed_used=seed,
    )


def config_cells(config: ExperimentConfig) -> list[Cell]:
    """Grid cells in canonical order: s outer, constraint value inner."""
    return [Cell(config.scheme, config.k, s, config.n, param) for s in config.s_list for param in config.params()]


def _row_key(scheme: str, k, s, n, param_str: str, trial) -> tuple:
    return (scheme, str(k), str(s), str(n), param_str, str(trial))


def existing_row_keys(path: str) -> set[tuple]:
    """Keys of rows already present in a results CSV (for resuming)."""
    keys: set[tuple] = set()
    if not os.path.exists(path):
        return keys
    with open(path, encoding="utf-8", newline="") as fh:
        for i, line in enumerate(fh):
            line = line.rstrip("\n")
            if i == 0 or not line:
                continue
            parts = line.split(",")
            keys.add(_row_key(parts[0], parts[1], parts[2], parts[3], parts[4], parts[5]))
    return keys


def run_grid(config: ExperimentConfig, out_path: str, threads: int = 1, master_seed: int | None = None) -> int:
    """Run (or resume) one config's grid, appending rows to out_path.

    Trials execute in a thread pool, but rows are written strictly in grid
    order by a single writer, so output bytes never depend on scheduling.
    Returns the number of rows written.
    """
    seed = config.master_seed if master_seed is None else master_seed
    cells = config_cells(config)
    tasks = [(cell, t) for cell in cells for t in range(config.trials)]
    done = existing_row_keys(out_path)
    todo = [
        (cell, t)
        for cell, t in tasks
        if _row_key(cell.scheme, cell.k, cell.s, cell.n, cell.param_str(), t) not in done
    ]

    fresh = not os.path.exists(out_path) or os.path.getsize(out_path) == 0
    written = 0
    with open(out_path, "a", encoding="utf-8", newline="") as fh:
        if fresh:
            fh.write(CSV_HEADER + "\n")
            fh.flush()
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            futures = [pool.submit(run_trial, cell, t, seed) for cell, t in todo]
            for future in futures:  # in submission order, regardless of completion order
                fh.write(future.result().csv_row() + "\n")
                fh.flush()
                written += 1
    return written


def read_results(path: str) -> list[dict]:
    """Parse a results CSV into row dicts (numbers parsed, param kept verbatim)."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header!r}")
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            rows.append(
                {
                    "scheme": parts[0],
                    "k": int(parts[1]),
                    "s": int(parts[2]),
                    "n": int(parts[3]),
                    "eps_or_ell": parts[4],
                    "trial": int(parts[5]),
                    "tv_error": float(parts[6]),
                    "bits_per_user": int(parts[7]),
                    "seed": int(parts[8]),
                }
            )
    if not rows:
        raise ValueError("results file holds no rows")
    return rows


def _param_sort_value(text: str) -> float:
    return float(text)


def summarize(rows: list[dict]) -> list[dict]:
    """Per-cell mean TV error, standard error, and trial count.

    A single-trial cell has stderr 0 and is flagged degenerate. Cells are
    ordered by (scheme, k, n, constraint value, s), one series per
    constraint value with s as the x axis.
    """
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        key = (row["scheme"], row["k"], row["n"], row["eps_or_ell"], row["s"])
        groups.setdefault(key, []).append(row["tv_error"])
    out = []
    for key in sorted(groups, key=lambda g: (g[0], g[1], g[2], _param_sort_value(g[3]), g[4])):
        errs = np.asarray(groups[key])
        scheme, k, n, param, s = key
        stderr = float(errs.std(ddof=1) / math.sqrt(errs.size)) if errs.size > 1 else 0.0
        out.append(
            {
                "scheme": scheme,
                "k": k,
                "n": n,
                "eps_or_ell": param,
                "s": s,
                "mean_tv_error": float(errs.mean()),
                "stderr": stderr,
                "trials": int(errs.size),
                "degenerate": errs.size < 2,
            }
        )
    return out


def write_summary(summary: list[dict], json_path: str, csv_path: str) -> None:
    """Emit the summary as JSON and as plot-ready CSV."""
    with open(json_path, "w", encoding="utf-8", newline="") as fh:
        json.dump({"cells": summary}, fh, indent=2)
        fh.write("\n")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("scheme,k,n,eps_or_ell,s,mean_tv_error,stderr,trials\n")
        for cell in summary:
            fh.write(
                f"{cell['scheme']},{cell['k']},{cell['n']},{cell['eps_or_ell']},{cell['s']},"
                f"{cell['mean_tv_error']!r},{cell['stderr']!r},{cell['trials']}\n"
            )


def plan_report(scheme: str, k: int, s: int, alpha: float, epsilon: float | None = None, ell: int | None = None) -> str:
    """Human-readable sample-size plan for one problem instance."""
    lines = []
    if scheme == "comm":
        n = planned_sample_size("comm", k, s, alpha, ell=ell)
        stage1, stage2 = comm_stage_sizes(k, s, alpha, ell)
        eff = effective_ell(ell, s)
        lines.append(f"scheme comm_hash: k={k} s={s} alpha={alpha} ell={ell}")
        lines.append(f"planned n = {n} (per half: support stage {stage1}, estimation stage {stage2})")
        if eff < ell:
            lines.append(f"effective ell = {eff} (capped from {ell}: more buckets than ~2s buy nothing)")
        else:
            lines.append(f"effective ell = {eff}")
        lines.append(f"guarantee at planned n: TV error <= {alpha} with probability >= 0.9")
    elif scheme == "ldp":
        n = planned_sample_size("ldp", k, s, alpha, epsilon=epsilon)
        lines.append(f"scheme hr (ldp): k={k} s={s} alpha={alpha} epsilon={epsilon}")
        lines.append(f"planned n = {n}")
        lines.append(f"risk bound at planned n: {ldp_risk_bound(k, s, epsilon, n):.6g} (target alpha = {alpha})")
    else:
        raise ValueError("scheme must be 'ldp' or 'comm'")
    return "\n".join(lines)


def resolve_threads(cli_threads: int | None) -> int:
    """--threads, overridden by SPARSE_DIST_LAB_THREADS when set."""
    env = os.environ.get("SPARSE_DIST_LAB_THREADS")
    if env is not None:
        return max(1, int(env))
    return max(1, cli_threads if cli_threads is not None else 1)


def hr_block_size(k: int) -> int:
    """Re-export of the HR group count for error messages and planning."""
    return hadamard_dim(k)
