"""Monte Carlo sampling of single-run pointer readouts.

The ensemble protocol mirrors the physical experiment: every trial prepares
the scenario's pre-selected system and Gaussian pointer, applies the impulse
coupling, post-selects, and - on acceptance - reads one pointer position.
Acceptance is a Bernoulli draw at the exact post-selection probability, and
the readout is drawn by inverse-transform sampling from the exact
conditional position distribution, so sampling error is purely statistical.

Each trial owns a private RNG stream derived from (master seed, trial
index); records are bit-reproducible per trial, independent of batch size,
execution order, or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import pointer, textout
from .errors import InputError, ZeroAcceptedError
from .scenarios import Scenario


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one trial. ``readout_q`` is present iff accepted."""

    trial_index: int
    accepted: bool
    readout_q: float | None
    rng_stream_id: int


@dataclass(frozen=True)
class EstimateReport:
    """Aggregate of a sampling run.

    ``wv_estimate`` is mean(accepted readouts) / g, the sampling estimate of
    Re(weak value); ``std_error`` is its standard error, NaN (undefined)
    when fewer than two trials were accepted.
    """

    n_total: int
    n_accepted: int
    acceptance_rate: float
    wv_estimate: float
    std_error: float


@dataclass(frozen=True)
class _TrialContext:
    probability: float
    points: np.ndarray
    cdf: np.ndarray
    g: float


def _context(scenario: Scenario) -> _TrialContext:
    state, probability = scenario.run()
    grid = scenario.grid
    mass = state.position_density() * grid.spacing
    cdf = np.cumsum(mass)
    cdf /= cdf[-1]
    return _TrialContext(
        probability=probability, points=grid.points, cdf=cdf, g=scenario.coupling.g
    )


def _check_seed(seed: int, label: str = "seed") -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool) or seed < 0:
        raise InputError(f"{label} must be a nonnegative integer, got {seed!r}")
    return int(seed)


def _draw(ctx: _TrialContext, seed: int, trial: int) -> RunRecord:
    sequence = np.random.SeedSequence([seed, trial])
    stream_id = int(sequence.generate_state(1, np.uint64)[0])
    rng = np.random.default_rng(sequence)
    accepted = bool(rng.random() < ctx.probability)
    readout = None
    if accepted:
        u = rng.random()
        readout = float(ctx.points[int(np.searchsorted(ctx.cdf, u, side="right"))])
    return RunRecord(
        trial_index=trial, accepted=accepted, readout_q=readout, rng_stream_id=stream_id
    )


def sample_run(seed: int, trial: int, scenario: Scenario) -> RunRecord:
    """Draw the single trial (seed, trial) of a scenario.

    Bit-for-bit deterministic: the same arguments always produce the same
    record, whether drawn alone or as part of a batch.
    """
    seed = _check_seed(seed)
    trial = _check_seed(trial, "trial index")
    return _draw(_context(scenario), seed, trial)


def run_records(
    seed: int, n_trials: int, scenario: Scenario, workers: int = 1
) -> list[RunRecord]:
    """Draw trials 0..n_trials-1. ``workers`` threads split the trial range
    into contiguous chunks; the result is identical for any worker count."""
    seed = _check_seed(seed)
    if not isinstance(n_trials, (int, np.integer)) or n_trials < 1:
        raise InputError(f"n_trials must be a positive integer, got {n_trials!r}")
    if not isinstance(workers, (int, np.integer)) or workers < 1:
        raise InputError(f"workers must be a positive integer, got {workers!r}")
    ctx = _context(scenario)
    n = int(n_trials)
    records: list[RunRecord | None] = [None] * n

    def fill(start: int, stop: int) -> None:
        for trial in range(start, stop):
            records[trial] = _draw(ctx, seed, trial)

    if workers == 1:
        fill(0, n)
    else:
        chunk = math.ceil(n / int(workers))
        bounds = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            for future in [pool.submit(fill, lo, hi) for lo, hi in bounds]:
                future.result()
    return records  # type: ignore[return-value]


def estimate_from_records(records: list[RunRecord], g: float) -> EstimateReport:
    """Reduce a record stream to an EstimateReport (fixed reduction order)."""
    if g == 0.0:
        raise InputError("the weak-value estimator divides by g; g = 0 is unusable")
    n_total = len(records)
    if n_total == 0:
        raise InputError("no records to aggregate")
    readouts = np.array([r.readout_q for r in records if r.accepted], dtype=float)
    n_accepted = readouts.size
    if n_accepted == 0:
        raise ZeroAcceptedError(
            f"no trials accepted out of {n_total}; conditional estimates are undefined"
        )
    wv_estimate = float(readouts.mean() / g)
    if n_accepted >= 2:
        std_error = float(readouts.std(ddof=1) / (abs(g) * math.sqrt(n_accepted)))
    else:
        std_error = float("nan")
    return EstimateReport(
        n_total=n_total,
        n_accepted=int(n_accepted),
        acceptance_rate=n_accepted / n_total,
        wv_estimate=wv_estimate,
        std_error=std_error,
    )


def estimate_weak_value(
    seed: int, n_trials: int, scenario: Scenario, workers: int = 1
) -> EstimateReport:
    """Sample n_trials runs and estimate Re(weak value) from the accepted
    readouts. Raises ZeroAcceptedError when nothing is accepted."""
    return estimate_from_records(
        run_records(seed, n_trials, scenario, workers=workers), scenario.coupling.g
    )


def write_runs(records: list[RunRecord], target, header: dict | None = None,
               delimiter: str = "\t") -> None:
    """Per-trial delimited export: trial, accepted, readout_q, rng_stream_id."""
    textout.write_table(
        target,
        ["trial", "accepted", "readout_q", "rng_stream_id"],
        [
            [r.trial_index for r in records],
            [1 if r.accepted else 0 for r in records],
            [r.readout_q for r in records],
            [r.rng_stream_id for r in records],
        ],
        header,
        delimiter,
    )


def write_report(report: EstimateReport, target, header: dict | None = None) -> None:
    """Key = value export of an EstimateReport."""
    textout.write_keyvalues(
        target,
        {
            "n_total": report.n_total,
            "n_accepted": report.n_accepted,
            "acceptance_rate": report.acceptance_rate,
            "wv_estimate": report.wv_estimate,
            "std_error": report.std_error,
        },
        header,
    )
