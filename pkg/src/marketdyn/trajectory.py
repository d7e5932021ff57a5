"""Time-indexed trajectories and their CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np


def fmt(x) -> str:
    """Shortest decimal string that round-trips to the same float."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


@dataclass
class Trajectory:
    """States ``states[t]`` for ``t = 0..T`` plus per-step diagnostics.

    ``diagnostics`` maps a column name to an array with one entry per
    recorded step.  ``converged`` is ``None`` for dynamics without a
    stopping rule.
    """

    states: np.ndarray
    diagnostics: dict[str, np.ndarray] = field(default_factory=dict)
    converged: bool | None = None
    message: str = ""

    def __len__(self) -> int:
        return len(self.states)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __getitem__(self, key: str) -> np.ndarray:
        return self.diagnostics[key]

    def rows(self, state_names: list[str], lead: list[str], trail: list[str] = ()):
        header = ["t", *lead, *state_names, *trail]
        flat = self.states.reshape(len(self.states), -1)
        body = []
        for t in range(len(self.states)):
            row = [fmt(t)]
            row += [fmt(self.diagnostics[c][t]) for c in lead]
            row += [fmt(v) for v in flat[t]]
            row += [fmt(self.diagnostics[c][t]) for c in trail]
            body.append(row)
        return header, body

    def to_csv(self, state_names: list[str], lead: list[str] = (), trail: list[str] = ()) -> str:
        header, body = self.rows(list(state_names), list(lead), list(trail))
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buf.getvalue()
