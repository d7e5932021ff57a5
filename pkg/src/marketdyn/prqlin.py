"""Proportional Response on quasi-linear Fisher markets, seen as mirror
descent on a convex program over spendings.

The program minimises

    F(b) = -sum_ij b_ij ln v_ij + sum_i w_i + sum_j p_j ln p_j

with ``p_j = sum_i b_ij`` and ``w_i = K_i - sum_j b_ij`` eliminated, over
``b >= 0`` with row sums at most ``K``.  Its gradient is
``ln p_j - ln v_ij`` and it is 1-smooth relative to the KL divergence, so
the KL mirror step with unit step size is exact and has a closed form: the
Proportional Response update :func:`pr_step`.

Pairs with ``v_ij = 0`` are pinned to zero spending throughout.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .economy import DegenerateError, DomainError, Economy, SpendingState, check_spending
from .equilibrium import ME, foc_residual_arrays
from .trajectory import Trajectory

log = logging.getLogger(__name__)

#: spendings below this are reported as zero; the iteration never flushes them
REPORT_FLOOR = 1e-300


@dataclass(frozen=True)
class MdConfig:
    """Mirror-descent settings.

    ``gamma_md`` is the reciprocal step size.  Only ``gamma_md = 1`` is the
    Proportional Response protocol and carries the convergence guarantee;
    other values are for experimentation.
    """

    gamma_md: float = 1.0
    max_iters: int = 100_000
    tol: float = 1e-8

    def __post_init__(self):
        if not self.gamma_md > 0:
            raise DomainError("gamma_md must be positive")
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if self.max_iters < 0:
            raise DomainError("max_iters must be nonnegative")


def _spending(econ, s):
    b = s.b if isinstance(s, SpendingState) else s
    return check_spending(econ, b)


def _xlogx(x):
    return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def _objective(lnV, K, b):
    p = b.sum(axis=0)
    w = K - b.sum(axis=1)
    return float(-(b * lnV).sum() + w.sum() + _xlogx(p).sum())


def _log_valuations(econ):
    sup = econ.support
    return np.where(sup, np.log(np.where(sup, econ.V, 1.0)), 0.0)


def sh_objective(econ: Economy, s) -> float:
    """Objective ``F`` at a feasible state (or spending matrix)."""
    b = _spending(econ, s)
    if np.any((b > 0) & ~econ.support):
        raise DomainError("positive spending on a good the firm values at 0 (objective is +inf)")
    return _objective(_log_valuations(econ), econ.K, b)


def sh_gradient(econ: Economy, s) -> np.ndarray:
    """Partials ``dF/db_ij = ln p_j - ln v_ij``.

    Entries with ``v_ij = 0`` are ``+inf``.
    """
    b = _spending(econ, s)
    p = b.sum(axis=0)
    sup = econ.support
    if np.any(sup & (p <= 0)[None, :]):
        raise DomainError("gradient needs positive prices on every valued good")
    lnp = np.log(np.where(p > 0, p, 1.0))
    return np.where(sup, lnp[None, :] - _log_valuations(econ), np.inf)


def kl_divergence(z_prime, z) -> float:
    """Generalised KL divergence ``sum z' ln(z'/z) - sum z' + sum z``."""
    zp = np.asarray(z_prime, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    if zp.shape != z.shape:
        raise DomainError("KL arguments must have equal size")
    if np.any(z <= 0):
        raise DomainError("KL second argument must be strictly positive")
    if np.any(zp < 0):
        raise DomainError("KL first argument must be nonnegative")
    lead = np.where(zp > 0, zp * (np.log(np.where(zp > 0, zp, 1.0)) - np.log(z)), 0.0)
    return float(lead.sum() - zp.sum() + z.sum())


def bregman_gap(econ: Economy, b, b_prime):
    """Linearisation gap ``F(b') - F(b) - <grad F(b), b' - b>`` and
    ``KL(b' || b)``, both over the valued pairs.

    The gap equals ``KL(p' || p)`` of the induced price vectors.
    """
    b = check_spending(econ, b)
    b_prime = check_spending(econ, b_prime)
    sup = econ.support
    if np.any(b[sup] <= 0):
        raise DomainError("base point must be strictly positive on valued pairs")
    grad = sh_gradient(econ, b)
    step = np.where(sup, b_prime - b, 0.0)
    gap = sh_objective(econ, b_prime) - sh_objective(econ, b) - float((np.where(sup, grad, 0.0) * step).sum())
    return gap, kl_divergence(b_prime[sup], b[sup])


def _pr_update(V, K, b):
    p = b.sum(axis=0)
    y = np.divide(b, p, out=np.zeros_like(b), where=p > 0)
    u = V * y
    S = u.sum(axis=1)
    if np.any(S <= 0):
        i = int(np.argmin(S))
        raise DegenerateError(f"firm {i} holds no share of any good it values")
    scale = np.where(S > K, K / S, 1.0)
    return u * scale[:, None]


def _md_update(V, K, b, gamma_md):
    p = b.sum(axis=0)
    ratio = np.divide(V, p, out=np.zeros_like(b), where=p > 0)
    t = b * ratio ** (1.0 / gamma_md)
    S = t.sum(axis=1)
    if np.any(S <= 0):
        i = int(np.argmin(S))
        raise DegenerateError(f"firm {i} holds no share of any good it values")
    scale = np.where(S > K, K / S, 1.0)
    return t * scale[:, None]


def pr_step(econ: Economy, s: SpendingState) -> SpendingState:
    """One round of Proportional Response.

    Each firm gets a share ``y_ij`` of every good, values it at
    ``v_ij y_ij``, and reinvests that value good by good, scaled down to
    its budget if the total ``S_i`` exceeds ``K_i``.
    """
    b = _spending(econ, s)
    return SpendingState.from_spending(econ, _pr_update(econ.V, econ.K, b))


def md_step(econ: Economy, s, gamma_md: float = 1.0) -> np.ndarray:
    """Closed-form KL mirror step ``argmin <grad F(b), z - b> + gamma KL(z || b)``
    over the feasible set.  Equals :func:`pr_step` at ``gamma_md = 1``."""
    if not gamma_md > 0:
        raise DomainError("gamma_md must be positive")
    b = _spending(econ, s)
    return _md_update(econ.V, econ.K, b, gamma_md)


def random_start(econ: Economy, rng: np.random.Generator) -> np.ndarray:
    """Spending drawn uniformly from ``(0, K_i / m]`` per entry."""
    u = 1.0 - rng.random((econ.n, econ.m))
    return u * (econ.K / econ.m)[:, None]


def validate_start(econ: Economy, b0) -> np.ndarray:
    b0 = np.array(check_spending(econ, b0), dtype=float)
    sup = econ.support
    if np.any(b0 < 0):
        raise DomainError("start has negative spending")
    if np.any(b0[sup] <= 0):
        i, j = map(int, np.argwhere(sup & (b0 <= 0))[0])
        raise DomainError(f"start must be positive on valued pairs; b0[{i}][{j}] = {float(b0[i, j])!r}")
    spent = b0.sum(axis=1)
    if np.any(spent > econ.K * (1 + 1e-12)):
        i = int(np.argmax(spent - econ.K))
        raise DomainError(f"start is infeasible: firm {i} spends {float(spent[i])!r} > {float(econ.K[i])!r}")
    b0[~sup] = 0.0
    return b0


def run_pr(econ: Economy, b0, cfg: MdConfig = MdConfig(), keep_states: bool = True) -> Trajectory:
    """Iterate the mirror step from ``b0`` until the market-equilibrium
    residual drops to ``cfg.tol`` or ``cfg.max_iters`` steps have run.

    The trajectory records ``F`` and the residual at every step.  With
    ``keep_states=False`` only the first and last spending matrices are
    kept.
    """
    b = validate_start(econ, b0)
    V, K = econ.V, econ.K
    lnV = _log_valuations(econ)
    unit = cfg.gamma_md == 1.0

    states = [b]
    F = [_objective(lnV, K, b)]
    res = [foc_residual_arrays(V, K, b, ME)[0]]
    converged = res[0] <= cfg.tol
    t = 0
    while not converged and t < cfg.max_iters:
        b = _pr_update(V, K, b) if unit else _md_update(V, K, b, cfg.gamma_md)
        t += 1
        F.append(_objective(lnV, K, b))
        r = foc_residual_arrays(V, K, b, ME)[0]
        res.append(r)
        if keep_states:
            states.append(b)
        converged = r <= cfg.tol
    if not keep_states and t > 0:
        states.append(b)
    msg = f"residual {res[-1]:.3e} after {t} steps"
    if not converged:
        log.warning("PR did not converge: %s", msg)
    return Trajectory(
        states=np.array(states),
        diagnostics={"F": np.array(F), "residual": np.array(res)},
        converged=converged,
        message=msg,
    )


def pr_csv(traj: Trajectory, econ: Economy) -> str:
    """CSV with columns ``t, F, residual, b_i_j...``.

    Needs a trajectory run with ``keep_states=True``.
    """
    if len(traj.states) != len(traj["F"]):
        raise DomainError("trajectory was run without keep_states; no per-step spendings to write")
    names = [f"b_{i}_{j}" for i in range(econ.n) for j in range(econ.m)]
    shown = Trajectory(
        states=np.where(traj.states < REPORT_FLOOR, 0.0, traj.states),
        diagnostics=traj.diagnostics,
    )
    return shown.to_csv(names, lead=["F", "residual"])
