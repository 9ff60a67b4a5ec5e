"""Shared model factories for the test suite."""

import numpy as np
import pytest

from tendonstat.chain import build_chain
from tendonstat.config import ModelConfig, TendonRow


def make_model(n_segments=1, beads_per_segment=4, bead_height=0.0295,
               bead_width=0.062, bead_mass=0.010, first_axis="x",
               stiffness=0.5, gravity=(0.0, 0.0, -9.81), tendons=(),
               inertia_diag=None, damping=0.0):
    """Chain model from keyword geometry, tendons as TendonRow tuples."""
    config = ModelConfig(
        n_segments=n_segments,
        beads_per_segment=beads_per_segment,
        bead_height=bead_height,
        bead_width=bead_width,
        bead_mass=bead_mass,
        first_axis=first_axis,
        gravity=np.asarray(gravity, dtype=float),
        stiffness=stiffness,
        damping=damping,
        inertia_diag=inertia_diag,
        tendons=tuple(tendons),
    )
    return build_chain(config)


def tendon_row(tid=1, segment=1, offset=(0.022, 0.0, 0.0), extensibility=0.0,
               rest_length=None):
    return TendonRow(id=tid, segment=segment, offset=np.asarray(offset, dtype=float),
                     extensibility=extensibility, rest_length=rest_length)


def antagonist_tendons(segment=1, radius=0.022, extensibility=0.0, start_id=1):
    """Four tendons at +-x and +-y offsets for one segment."""
    offsets = [(radius, 0.0, 0.0), (-radius, 0.0, 0.0),
               (0.0, radius, 0.0), (0.0, -radius, 0.0)]
    return [tendon_row(start_id + k, segment, off, extensibility) for k, off in enumerate(offsets)]


@pytest.fixture
def pendulum():
    """Single hinge about y, no tendons, gravity along -z (upright chain)."""
    return make_model(n_segments=1, beads_per_segment=1, first_axis="y")


@pytest.fixture
def small_chain():
    """Five alternating hinges, no tendons."""
    return make_model(n_segments=1, beads_per_segment=5)
