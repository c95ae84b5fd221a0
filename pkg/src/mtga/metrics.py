"""Cross-algorithm performance scores and run summaries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


class ReportError(ValueError):
    pass


def performance_score(results) -> np.ndarray:
    """Performance score per algorithm from ``results[k][m][l]``.

    Each task's results are z-normalized over all algorithms and repetitions
    (sample standard deviation), then summed per algorithm over tasks and
    repetitions. Lower is better. A task whose results are all identical
    contributes zero.
    """
    B = np.asarray(results, dtype=float)
    if B.ndim != 3 or min(B.shape) < 1:
        raise ValueError(f"results must have shape (algorithms, tasks, repetitions), got {B.shape}")
    if np.isnan(B).any():
        raise ValueError("results tensor has missing cells")
    k, m, l = B.shape
    flat = B.transpose(1, 0, 2).reshape(m, k * l)
    mu = flat.mean(axis=1)
    sigma = flat.std(axis=1, ddof=1) if k * l > 1 else np.zeros(m)
    # exact comparison: rounding in the mean leaves a tiny nonzero sigma for constant rows
    constant = (np.ptp(flat, axis=1) == 0) | ~(sigma > 0)
    safe = np.where(constant, 1.0, sigma)
    normalized = (B - mu[None, :, None]) / safe[None, :, None]
    normalized[:, constant, :] = 0.0
    return normalized.sum(axis=(1, 2))


@dataclass
class RunSummary:
    mean: np.ndarray
    std: np.ndarray
    count: int

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist(), "count": self.count}


def summarize_runs(traces: Sequence) -> RunSummary:
    """Mean and sample std of the final best objective per task.

    Accepts :class:`RunTrace` objects or plain per-task sequences of final
    values. A single run has std 0.
    """
    if not len(traces):
        raise ReportError("no runs to summarize")
    finals = np.array([t.final_best if hasattr(t, "final_best") else t for t in traces], dtype=float)
    finals = finals.reshape(len(traces), -1)
    std = finals.std(axis=0, ddof=1) if len(finals) > 1 else np.zeros(finals.shape[1])
    return RunSummary(finals.mean(axis=0), std, len(finals))


def normalize_to_baseline(summaries: Mapping[str, RunSummary], baseline: str) -> dict:
    """Mean and std of each algorithm divided by the baseline's, per task."""
    if baseline not in summaries:
        raise ReportError(f"baseline {baseline!r} not among {sorted(summaries)}")
    ref = summaries[baseline]
    with np.errstate(divide="ignore", invalid="ignore"):
        return {
            name: {"mean": (s.mean / ref.mean).tolist(), "std": (s.std / ref.std).tolist()}
            for name, s in summaries.items()
        }


def score_curve(traces_by_solver: Mapping[str, Sequence]) -> tuple:
    """Performance score of each solver at every generation index.

    All runs are truncated to the shortest trace. Returns ``(names, scores)``
    with ``scores`` of shape ``(generations, solvers)``.
    """
    names = list(traces_by_solver)
    length = min(len(t.best) for ts in traces_by_solver.values() for t in ts)
    out = np.empty((length, len(names)))
    for g in range(length):
        B = [[[t.best[g][m] for t in traces_by_solver[n]]
              for m in range(len(traces_by_solver[n][0].best[g]))] for n in names]
        out[g] = performance_score(B)
    return names, out
