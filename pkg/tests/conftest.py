"""Shared fixtures.

The named preset runs are the expensive part of the suite (a few seconds
each), and several test modules inspect them, so each preset family is
integrated once per session and shared.
"""

from __future__ import annotations

import pytest

from bellsteer.experiments import run_preset


@pytest.fixture(scope="session")
def figure1_runs():
    """Constant-field runs at B = 0.1, 0.2, 0.4, keyed by label."""
    return {label: (traj, report) for label, traj, report in run_preset("figure1")}


@pytest.fixture(scope="session")
def figure2_runs():
    """Local-control Lyapunov runs at kappa = 0.5, 1, 2, keyed by label."""
    return {label: (traj, report) for label, traj, report in run_preset("figure2")}


@pytest.fixture(scope="session")
def figure3_runs():
    """Interaction-control Lyapunov runs at kappa = 0.5, 1, 2, keyed by label."""
    return {label: (traj, report) for label, traj, report in run_preset("figure3")}


@pytest.fixture(scope="session")
def lyapunov_runs(figure2_runs, figure3_runs):
    """All six Lyapunov preset runs (both paradigms), keyed by label."""
    merged = dict(figure2_runs)
    merged.update(figure3_runs)
    return merged
