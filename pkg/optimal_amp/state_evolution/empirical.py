"""Empirical counterparts of the state-evolution variables measured on a run."""

from __future__ import annotations

import numpy as np

from ..gamp.state import GampSummary
from .recursion import SeState


def empirical_state(trajectory: list[GampSummary], s_true, z_true=None) -> list[SeState]:
    """Per-step ``q_s = ||s_hat - s||^2 / P`` and ``q_eta = ||eta - X s||^2 / N`` with the run's smoothing.

    Summaries that kept their iterates are measured directly (``q_eta`` needs ``z_true``); the
    others use the errors recorded by the run. ``q_h`` has no empirical counterpart and is ``nan``.
    """
    s_true = np.asarray(s_true, dtype=float)
    states = []
    for summary in trajectory:
        q_s, q_eta = summary.q_s, summary.q_eta
        if summary.s_hat is not None:
            q_s = float(np.mean((summary.s_hat - s_true) ** 2))
        if summary.eta is not None and z_true is not None:
            q_eta = float(np.mean((summary.eta - np.asarray(z_true, dtype=float)) ** 2))
        states.append(
            SeState(
                q_s=q_s,
                q_eta=q_eta,
                q_h=float("nan"),
                lambda_eta=summary.lambda_eta,
                lambda_h=summary.lambda_h,
                iteration=summary.t,
            )
        )
    return states
