"""Forward-difference derivatives of sampled trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynsys import StateTrajectory, check_uniform_spacing
from .errors import InsufficientDataError, InvalidInputError

LEFT_ENDPOINT = "left"


@dataclass(frozen=True)
class DerivativeMatrix:
    """Row ``t`` holds the difference quotient over ``[times[t], times[t+1]]``.

    Rows are aligned to the left endpoint, so they pair with state row ``t``.
    """

    values: np.ndarray
    var_names: tuple[str, ...]
    aligned_rows: str = LEFT_ENDPOINT

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.var_names):
            raise InvalidInputError(
                f"derivative values {values.shape} do not match {len(self.var_names)} names"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("derivative matrix contains non-finite entries")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "var_names", tuple(self.var_names))

    @property
    def n_rows(self):
        return self.values.shape[0]


def derivative_name(var):
    return f"d{var}/dt"


def forward_difference(traj: StateTrajectory) -> DerivativeMatrix:
    """``(x[t+1] - x[t]) / dt`` for every state column, ``t = 0 .. T-2``."""
    if len(traj) < 2:
        raise InsufficientDataError(
            f"forward difference needs at least 2 samples, got {len(traj)}"
        )
    dt = check_uniform_spacing(traj.times)
    states = traj.states
    with np.errstate(over="raise"):
        try:
            values = (states[1:] - states[:-1]) / dt
        except FloatingPointError:
            raise InvalidInputError("forward difference overflowed") from None
    return DerivativeMatrix(values, tuple(derivative_name(v) for v in traj.var_names))
