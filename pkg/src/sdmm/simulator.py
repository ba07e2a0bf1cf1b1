"""Local end-to-end simulation of the schemes with stragglers and sweeps.

Every trial draws fresh inputs and noise from a seed split off the scheme
seed, so runs are reproducible down to the byte while trials stay
independent.  Workers execute on a thread pool (numpy products release the
GIL); stragglers are dropped before the compute phase.
"""

import contextlib
import csv
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .numerics import relative_error
from .schemes import DecodingResidueError, SchemeParams, decode, encode, worker_compute

POOL_SIZE_ENV = "SDMM_POOL_SIZE"

SWEEP_AXES = ("delta", "x", "s")


def worker_pool_size(n_workers: int) -> int:
    """Thread count for the worker phase; override with SDMM_POOL_SIZE."""
    env = os.environ.get(POOL_SIZE_ENV)
    if env is not None:
        size = int(env)
        if size < 1:
            raise ValueError(f"{POOL_SIZE_ENV} must be at least 1, got {env}")
        return size
    return max(1, min(n_workers, os.cpu_count() or 1))


def unit_disk_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniform draws from the closed complex unit disk, by rejection from the square."""
    total = int(np.prod(shape))
    out = np.empty(total, dtype=np.complex128)
    filled = 0
    while filled < total:
        need = total - filled
        z = rng.uniform(-1, 1, need) + 1j * rng.uniform(-1, 1, need)
        kept = z[np.abs(z) <= 1]
        out[filled : filled + kept.size] = kept
        filled += kept.size
    return out.reshape(shape)


def sample_inputs(rng: np.random.Generator, params: SchemeParams, dims):
    """One (A, B) input pair: uniform on [-1, 1] per entry, or on the unit disk."""
    t, s, r = dims
    if params.is_real:
        return rng.uniform(-1, 1, (t, s)), rng.uniform(-1, 1, (s, r))
    return unit_disk_uniform(rng, (t, s)), unit_disk_uniform(rng, (s, r))


@dataclass(frozen=True)
class RunConfig:
    """A simulation request: scheme, problem size, trial count, straggler rule.

    ``straggler_policy`` is "random" (drop ``params.stragglers`` workers per
    trial), "none" (every worker responds), or an explicit list of 1-based
    worker indices that never respond.
    """

    params: SchemeParams
    dims: tuple = (256, 256, 256)
    trials: int = 50
    straggler_policy: object = "random"


@dataclass(frozen=True)
class RunResult:
    """Per-trial relative errors plus responding sets and phase timings."""

    rel_errors: tuple
    responding: tuple
    seconds: dict

    @property
    def median(self) -> float:
        return float(np.median(self.rel_errors))

    @property
    def q05(self) -> float:
        return float(np.quantile(self.rel_errors, 0.05))

    @property
    def q95(self) -> float:
        return float(np.quantile(self.rel_errors, 0.95))


def _surviving_indices(config: RunConfig, rng: np.random.Generator) -> list:
    n = config.params.num_workers
    policy = config.straggler_policy
    if policy == "none":
        return list(range(1, n + 1))
    if policy == "random":
        dropped = set()
        if config.params.stragglers:
            dropped = set((rng.choice(n, size=config.params.stragglers, replace=False) + 1).tolist())
        return [i for i in range(1, n + 1) if i not in dropped]
    dropped = {int(i) for i in policy}
    if not dropped <= set(range(1, n + 1)):
        raise ValueError(f"straggler indices must lie in 1..{n}")
    return [i for i in range(1, n + 1) if i not in dropped]


def run_local(config: RunConfig) -> RunResult:
    """Simulate ``trials`` multiplications; errors are against a double-precision product."""
    params = config.params
    errors, responding = [], []
    seconds = {"encode": 0.0, "compute": 0.0, "decode": 0.0}
    with ThreadPoolExecutor(worker_pool_size(params.num_workers)) as pool:
        for trial in range(config.trials):
            seq = np.random.SeedSequence(params.seed, spawn_key=(trial,))
            rng = np.random.default_rng(seq)
            a, b = sample_inputs(rng, params, config.dims)
            t0 = time.perf_counter()
            shares = encode(params, a, b, rng)
            seconds["encode"] += time.perf_counter() - t0
            keep = _surviving_indices(config, rng)
            live = [s for s in shares if s.worker_index in set(keep)]
            t0 = time.perf_counter()
            responses = list(
                pool.map(
                    lambda s: worker_compute(params.scheme_id, s.a_share, s.b_share, s.worker_index),
                    live,
                )
            )
            seconds["compute"] += time.perf_counter() - t0
            t0 = time.perf_counter()
            try:
                product = decode(params, responses)
            except DecodingResidueError as err:
                # heavy calibrated noise can push roundoff past the residue
                # gate; the error charts describe exactly that regime, so keep
                # the decoded real part and let the trial report its error
                product = err.result
            seconds["decode"] += time.perf_counter() - t0
            wide = np.complex128 if np.iscomplexobj(a) else np.float64
            exact = a.astype(wide) @ b.astype(wide)
            errors.append(relative_error(product, exact))
            responding.append(tuple(r.worker_index for r in responses))
    return RunResult(tuple(errors), tuple(responding), seconds)


def sweep(config: RunConfig, axis: str, values) -> list:
    """run_local over one swept parameter; returns (value, RunResult) pairs.

    Axes: "delta" re-calibrates the leakage target, "x" the noise block count,
    "s" the straggler allowance.  Worker counts are re-derived per value, so
    leave ``n_workers`` unset on the base params.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}, expected one of {SWEEP_AXES}")
    out = []
    for value in values:
        if axis == "delta":
            p = replace(config.params, delta=float(value), sigma2=None)
        elif axis == "x":
            p = replace(config.params, x=int(value))
        else:
            p = replace(config.params, stragglers=int(value))
        out.append((value, run_local(replace(config, params=p))))
    return out


@contextlib.contextmanager
def _csv_writer(dest):
    """A csv.writer over either an open text stream or a path to create."""
    if hasattr(dest, "write"):
        yield csv.writer(dest)
    else:
        with open(dest, "w", newline="") as fh:
            yield csv.writer(fh)


def run_to_csv(result: RunResult, dest) -> None:
    """Trial-by-trial errors of a single run as CSV."""
    with _csv_writer(dest) as writer:
        writer.writerow(["trial", "rel_error"])
        for trial, err in enumerate(result.rel_errors):
            writer.writerow([trial, f"{err:.17g}"])


def sweep_trials_to_csv(pairs, dest) -> None:
    """Every sweep trial as one CSV row."""
    with _csv_writer(dest) as writer:
        writer.writerow(["sweep_value", "trial", "rel_error"])
        for value, result in pairs:
            for trial, err in enumerate(result.rel_errors):
                writer.writerow([f"{value:.17g}", trial, f"{err:.17g}"])


def sweep_summary_to_csv(pairs, dest) -> None:
    """Per-value median and 5/95 percentile rows."""
    with _csv_writer(dest) as writer:
        writer.writerow(["sweep_value", "median", "q05", "q95"])
        for value, result in pairs:
            writer.writerow(
                [
                    f"{value:.17g}",
                    f"{result.median:.17g}",
                    f"{result.q05:.17g}",
                    f"{result.q95:.17g}",
                ]
            )


def sweep_to_csv(pairs, trials_path, summary_path) -> None:
    """Sweep results as two CSVs: every trial, and per-value summary statistics."""
    sweep_trials_to_csv(pairs, trials_path)
    sweep_summary_to_csv(pairs, summary_path)
