"""First-order certificates for Nash and market equilibria, and the bound
relating the two in large economies.

Both residuals share one pattern.  For each firm, a marginal value
``m_ij`` is computed per good.  A firm that exhausts its budget must have a
common value ``C_i >= 1`` on every good it buys and no larger value
elsewhere.  A firm with budget left over must have ``m_ij = 1`` on the goods
it buys and ``m_ij <= 1`` elsewhere.  The residual is the largest violation
of that pattern, in units of ``m``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .economy import DomainError, Economy, SpendingState, check_spending, market_share

NE = "NE"
ME = "ME"

#: relative slack below which a budget counts as exhausted
BUDGET_RTOL = 1e-8
#: spending (relative to the budget) at or above which a good is "bought"
SUPPORT_RTOL = 1e-8


def _ratio(V, p):
    pos = p > 0
    safe = np.where(pos, p, 1.0)
    return np.where(pos, V / safe, np.where(V > 0, np.inf, 0.0))


def marginal_values(V, b, p, kind: str) -> np.ndarray:
    r = _ratio(V, p)
    if kind == ME:
        return r
    if kind == NE:
        own = np.divide(b, p, out=np.zeros_like(b), where=p > 0)
        return r * (1.0 - own)
    raise ValueError(f"kind must be {NE!r} or {ME!r}")


def foc_residual_arrays(V, K, b, kind: str = ME):
    """Residual and per-firm multipliers straight from arrays.

    This is the unchecked core of :func:`foc_residual_me` and
    :func:`foc_residual_ne`, used in hot loops.
    """
    p = b.sum(axis=0)
    mv = marginal_values(V, b, p, kind)
    exhausted = (K - b.sum(axis=1)) <= BUDGET_RTOL * K
    on = b >= SUPPORT_RTOL * K[:, None]
    has_support = on.any(axis=1)

    cmax = np.where(on, mv, -np.inf).max(axis=1)
    ref = np.where(exhausted & has_support, cmax, 1.0)
    C = np.where(has_support, ref, np.nan)

    dev = np.abs(mv - ref[:, None])
    with np.errstate(invalid="ignore"):
        on_err = np.where(on, dev, 0.0).max(axis=1)
        off_err = np.maximum(np.where(on, -np.inf, mv - ref[:, None]).max(axis=1), 0.0)
    floor_err = np.where(exhausted & has_support, np.maximum(1.0 - ref, 0.0), 0.0)
    per_firm = np.nan_to_num(on_err, nan=np.inf) + off_err + floor_err
    return float(per_firm.max()), C


def foc_residual_ne(econ: Economy, s: SpendingState):
    """Violation of the Tullock-contest Nash first-order conditions.

    Marginal value is ``(v_ij / p_j) * (1 - b_ij / p_j)``.
    """
    return foc_residual_arrays(econ.V, econ.K, np.asarray(s.b, dtype=float), NE)


def foc_residual_me(econ: Economy, s: SpendingState):
    """Violation of the quasi-linear Fisher-market equilibrium conditions.

    Prices are taken as given, so the marginal value is ``v_ij / p_j``.
    """
    return foc_residual_arrays(econ.V, econ.K, np.asarray(s.b, dtype=float), ME)


def bang_per_buck(econ: Economy, p) -> np.ndarray:
    return _ratio(econ.V, np.asarray(p, dtype=float)).max(axis=1)


def largeness(econ: Economy, p) -> float:
    """``max_{i,j} K_i / p_j``; small values mean every firm is small."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        return math.inf
    return float(econ.K.max() / p.min())


def delta_prime(beta, delta: float) -> float | None:
    """Approximation factor of a market equilibrium viewed as a Nash
    equilibrium, from bang-per-buck ratios ``beta`` and largeness ``delta``.

    Returns ``None`` when the bound does not apply: ``delta >= 1``, or
    some firm has ``1 - delta < beta < 1`` (it buys nothing at the market
    equilibrium but would profit from deviating).
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    if delta >= 1:
        return None
    if np.any((beta > 1 - delta) & (beta < 1)):
        return None
    big = beta[beta > 1]
    if big.size == 0:
        return 0.0
    with np.errstate(invalid="ignore"):
        vals = (big / (1 - delta) - 1) / (big - 1) - 1
    # inf beta: the ratio tends to 1 / (1 - delta)
    vals = np.where(np.isinf(big), delta / (1 - delta), vals)
    return float(vals.max())


def delta_prime_bound(econ: Economy, s: SpendingState) -> float | None:
    return delta_prime(bang_per_buck(econ, s.p), largeness(econ, s.p))


@dataclass
class EquilibriumReport:
    kind: str
    residual: float
    per_firm_C: np.ndarray
    bang_per_buck: np.ndarray
    delta: float
    delta_prime: float | None

    def to_dict(self) -> dict:
        def num(x):
            x = float(x)
            return None if math.isnan(x) else (str(x) if math.isinf(x) else x)

        return {
            "kind": self.kind,
            "residual": num(self.residual),
            "per_firm_C": [num(c) for c in self.per_firm_C],
            "bang_per_buck": [num(c) for c in self.bang_per_buck],
            "delta": num(self.delta),
            "delta_prime": None if self.delta_prime is None else num(self.delta_prime),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def table(self) -> str:
        lines = [
            f"kind         {self.kind}",
            f"residual     {self.residual:.3e}",
            f"delta        {self.delta:.6g}",
            "delta_prime  " + ("undefined" if self.delta_prime is None else f"{self.delta_prime:.6g}"),
            "",
            f"{'firm':>4}  {'C':>12}  {'beta':>12}",
        ]
        for i, (c, bb) in enumerate(zip(self.per_firm_C, self.bang_per_buck)):
            cs = "undefined" if math.isnan(c) else f"{c:.6g}"
            lines.append(f"{i:>4}  {cs:>12}  {bb:>12.6g}")
        return "\n".join(lines)


def check_equilibrium(econ: Economy, s: SpendingState, kind: str = ME) -> EquilibriumReport:
    residual, C = (foc_residual_me if kind == ME else foc_residual_ne)(econ, s)
    return EquilibriumReport(
        kind=kind,
        residual=residual,
        per_firm_C=C,
        bang_per_buck=bang_per_buck(econ, s.p),
        delta=largeness(econ, s.p),
        delta_prime=delta_prime_bound(econ, s),
    )


def _grid_utility(v, q, pts):
    """Tullock utility of portfolios ``pts`` (rows) against others' totals ``q``."""
    tot = pts + q
    share = np.divide(pts, tot, out=np.zeros_like(pts), where=tot > 0)
    return share @ v - pts.sum(axis=1)


def best_response_oracle(econ: Economy, i: int, b, grid: int = 200):
    """Exhaustive grid search for firm ``i``'s best Tullock portfolio.

    ``b`` is the full spending matrix; row ``i`` is ignored.  The grid has
    ``grid + 1`` points per good over ``[0, K_i]``, restricted to total
    spending at most ``K_i``.  When the others spend nothing on a valued
    good, the supremum is approached but not attained as spending tends
    to 0; the oracle then returns the smallest positive grid step.

    Returns ``(best utility, argmax portfolio)``.
    """
    b = check_spending(econ, b)
    if econ.m > 3:
        raise DomainError("exhaustive oracle supports at most 3 goods")
    if grid < 100:
        raise DomainError("use at least 100 grid points per axis")
    q = np.delete(b, i, axis=0).sum(axis=0)
    v = econ.V[i]
    Ki = econ.K[i]
    h = Ki / grid
    axis = np.arange(grid + 1) * h
    cap = Ki * (1 + 1e-12)

    best, arg = -np.inf, None
    if econ.m == 1:
        pts = axis[:, None]
        u = _grid_utility(v, q, pts)
        k = int(np.argmax(u))
        return float(u[k]), pts[k].copy()
    rest = np.stack(np.meshgrid(*([axis] * (econ.m - 1)), indexing="ij"), -1).reshape(-1, econ.m - 1)
    rest_sum = rest.sum(axis=1)
    for a in axis:
        keep = rest_sum + a <= cap
        if not keep.any():
            break
        pts = np.column_stack([np.full(keep.sum(), a), rest[keep]])
        u = _grid_utility(v, q, pts)
        k = int(np.argmax(u))
        if u[k] > best:
            best, arg = float(u[k]), pts[k].copy()
    return best, arg


def improvement_ratio(econ: Economy, b, i: int, grid: int = 200) -> float | None:
    """Best unilateral gain of firm ``i`` as a fraction of its current
    Tullock utility, ``max u_i / u_i(b) - 1``.  ``None`` when the current
    utility is not positive."""
    b = check_spending(econ, b)
    y = market_share(b)
    u0 = float(econ.V[i] @ y[i] - b[i].sum())
    if u0 <= 0:
        return None
    best, _ = best_response_oracle(econ, i, b, grid)
    return max(best, u0) / u0 - 1.0
