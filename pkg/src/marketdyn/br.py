"""Best-response dynamics in the isoelastic duopoly.

Firm costs are ``alpha`` (output ``x``) and ``beta`` (output ``y``).  Both
firms update simultaneously:

    x <- sqrt(v y / alpha) - y,    y <- sqrt(v x / beta) - x

Linearising at the interior fixed point gives a Jacobian with purely
imaginary eigenvalues of modulus ``|r - 1| / (2 sqrt r)``, ``r = alpha/beta``.
The fixed point is a stable spiral for ``1/r0 < r < r0``, ``r0 = 3 + 2 sqrt 2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .economy import DomainError
from .trajectory import Trajectory

R0 = 3 + 2 * math.sqrt(2)

STABLE = "stable_spiral"
NEUTRAL = "neutral_center"
UNSTABLE = "unstable_spiral"


def br_step(x: float, alpha_i: float, v: float = 1.0) -> float:
    """Best output against opponent output ``x``; 0 when the interior
    formula goes negative (the opponent produces more than ``v/alpha_i``)."""
    if not x > 0:
        raise DomainError(f"best response needs positive opponent output, got {x!r}")
    return max(0.0, math.sqrt(v * x / alpha_i) - x)


def br_fixed_point(alpha: float, beta: float, v: float = 1.0) -> tuple[float, float]:
    if min(alpha, beta, v) <= 0:
        raise DomainError("alpha, beta and v must be positive")
    s = (alpha + beta) ** 2
    return v * beta / s, v * alpha / s


def eigen_modulus(r: float) -> float:
    return abs(r - 1) / (2 * math.sqrt(r))


@dataclass
class StabilityReport:
    fixed_point: tuple[float, float]
    r: float
    eigen_modulus: float
    r0: float
    stability: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["class"] = d.pop("stability")
        return d

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def classify_stability(alpha: float, beta: float, v: float = 1.0, atol: float = 1e-12) -> StabilityReport:
    if min(alpha, beta) <= 0:
        raise DomainError("alpha and beta must be positive")
    r = alpha / beta
    if abs(r - R0) <= atol or abs(r - 1 / R0) <= atol:
        cls = NEUTRAL
    elif 1 / R0 < r < R0:
        cls = STABLE
    else:
        cls = UNSTABLE
    return StabilityReport(br_fixed_point(alpha, beta, v), r, eigen_modulus(r), R0, cls)


def br_map(state, alpha: float, beta: float, v: float = 1.0) -> np.ndarray:
    """Unclamped simultaneous update; used for linearisation."""
    x, y = state
    return np.array([math.sqrt(v * y / alpha) - y, math.sqrt(v * x / beta) - x])


def simulate_br(x0: float, y0: float, alpha: float, beta: float, T: int, v: float = 1.0) -> Trajectory:
    """Simultaneous best responses for ``T`` steps.

    Records ``(x, y)``, the Euclidean distance to the fixed point and a
    per-step clamp flag.  Stops early if both outputs hit 0; the dynamics
    are undefined from there.
    """
    if not (x0 > 0 and y0 > 0):
        raise DomainError("BR start must be positive")
    fx, fy = br_fixed_point(alpha, beta, v)
    pts = [(x0, y0)]
    clamped = [False]
    x, y = x0, y0
    message = ""
    for t in range(1, T + 1):
        nx = br_step(y, alpha, v) if y > 0 else 0.0
        ny = br_step(x, beta, v) if x > 0 else 0.0
        clamped.append(nx == 0.0 or ny == 0.0)
        x, y = nx, ny
        pts.append((x, y))
        if x == 0.0 and y == 0.0:
            message = f"both outputs clamped to 0 at t={t}; orbit terminated"
            break
    pts = np.array(pts)
    dist = np.hypot(pts[:, 0] - fx, pts[:, 1] - fy)
    return Trajectory(
        states=pts,
        diagnostics={"dist": dist, "clamped": np.array(clamped)},
        message=message,
    )


def br_csv(traj: Trajectory) -> str:
    return traj.to_csv(["x", "y"], trail=["dist", "clamped"])


def distance_at(traj: Trajectory, t: int) -> float:
    """Distance to the fixed point at step ``t``.

    A terminated orbit stays at ``(0, 0)``: with ``br(0) = 0`` it is a fixed
    point of the clamped map, so steps past the end reuse the last distance.
    """
    d = traj["dist"]
    if t < len(d):
        return float(d[t])
    if not traj.message:
        raise IndexError(f"step {t} beyond a trajectory of {len(d) - 1} steps")
    return float(d[-1])
