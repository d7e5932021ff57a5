"""Market instances and the share / price / utility arithmetic shared by
every dynamics module.

Spending is the driving variable throughout: ``b[i, j]`` is the money firm
``i`` puts into good ``j``.  Matrices are dense ``(n, m)`` float arrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ISOELASTIC = "isoelastic"
POWER = "power"


class MarketError(Exception):
    """Base class for errors raised by this package."""


class ShapeError(MarketError, ValueError):
    """Array dimensions do not match the economy."""


class DomainError(MarketError, ValueError):
    """Input lies outside the domain where a quantity is defined."""


class DegenerateError(DomainError):
    """The dynamics reached a state from which the update is undefined."""


@dataclass(frozen=True)
class PriceFamily:
    kind: str = ISOELASTIC
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in (ISOELASTIC, POWER):
            raise DomainError(f"unknown price family {self.kind!r}")
        if self.kind == POWER:
            if self.gamma is None or not self.gamma > 0:
                raise DomainError("power price family needs gamma > 0")
            object.__setattr__(self, "gamma", float(self.gamma))
        elif self.gamma is not None:
            raise DomainError("isoelastic price family takes no gamma")

    def to_dict(self) -> dict:
        if self.kind == POWER:
            return {"kind": POWER, "gamma": self.gamma}
        return {"kind": ISOELASTIC}


def _frozen(a, ndim: int, name: str) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim != ndim:
        raise ShapeError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Economy:
    """An immutable market: ``n`` firms, ``m`` goods.

    ``V`` holds valuations ``v_ij >= 0`` (a row-constant ``V`` models
    Cournot competition, a general one Tullock contests), ``K`` the firm
    budgets and ``alpha`` the per-good marginal costs.
    """

    V: np.ndarray
    K: np.ndarray
    alpha: np.ndarray
    price_family: PriceFamily = field(default_factory=PriceFamily)

    def __post_init__(self):
        V = _frozen(self.V, 2, "V")
        K = _frozen(self.K, 1, "K")
        alpha = _frozen(self.alpha, 1, "alpha")
        n, m = V.shape
        if n < 1 or m < 1:
            raise ShapeError("need at least one firm and one good")
        if K.shape != (n,):
            raise ShapeError(f"K has length {K.size}, expected {n}")
        if alpha.shape != (m,):
            raise ShapeError(f"alpha has length {alpha.size}, expected {m}")
        if np.any(V < 0):
            raise DomainError("valuations must be nonnegative")
        if np.any(V.max(axis=1) <= 0):
            raise DomainError("every firm needs a good it values positively")
        if np.any(K <= 0):
            raise DomainError("budgets must be positive")
        if np.any(alpha <= 0):
            raise DomainError("marginal costs must be positive")
        pf = self.price_family
        if isinstance(pf, dict):
            pf = PriceFamily(**pf)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "price_family", pf)

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @property
    def m(self) -> int:
        return self.V.shape[1]

    @property
    def support(self) -> np.ndarray:
        """Boolean mask of the (firm, good) pairs with positive valuation."""
        return self.V > 0

    @classmethod
    def from_valuations(cls, V, K, alpha=None, price_family=None) -> "Economy":
        V = np.asarray(V, dtype=float)
        if alpha is None:
            alpha = np.ones(V.shape[1])
        return cls(V, K, alpha, price_family or PriceFamily())

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "V": self.V.tolist(),
            "K": self.K.tolist(),
            "alpha": self.alpha.tolist(),
            "price_family": self.price_family.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Economy":
        missing = [k for k in ("V", "K", "alpha") if k not in d]
        if missing:
            raise DomainError(f"economy document is missing field(s): {', '.join(missing)}")
        pf = d.get("price_family", {"kind": ISOELASTIC})
        if not isinstance(pf, dict) or "kind" not in pf:
            raise DomainError("price_family must be an object with a 'kind' field")
        try:
            econ = cls(d["V"], d["K"], d["alpha"], PriceFamily(pf["kind"], pf.get("gamma")))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, MarketError):
                raise
            raise ShapeError(f"malformed economy arrays: {exc}") from exc
        for key, actual in (("n", econ.n), ("m", econ.m)):
            if key in d and int(d[key]) != actual:
                raise ShapeError(f"field {key!r} = {d[key]} disagrees with V shape {econ.V.shape}")
        return econ

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "Economy":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "Economy":
        return cls.from_json(Path(path).read_text())


def market_share(b) -> np.ndarray:
    """Share of each good's total spending held by each firm.

    Goods nobody spends on get share 0 for every firm.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 2:
        raise ShapeError(f"spending must be a matrix, got shape {b.shape}")
    if np.any(b < 0):
        raise DomainError("spending must be nonnegative")
    p = b.sum(axis=0)
    safe = np.where(p > 0, p, 1.0)
    return np.where(p > 0, b / safe, 0.0)


def check_spending(econ: Economy, b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape != (econ.n, econ.m):
        raise ShapeError(f"spending has shape {b.shape}, expected {(econ.n, econ.m)}")
    return b


@dataclass(frozen=True)
class SpendingState:
    """A spending matrix together with the prices, shares and leftover
    budgets it induces.  Build with :meth:`from_spending`."""

    b: np.ndarray
    p: np.ndarray
    y: np.ndarray
    w: np.ndarray

    @classmethod
    def from_spending(cls, econ: Economy, b, rtol: float = 1e-12) -> "SpendingState":
        b = np.array(check_spending(econ, b), dtype=float)
        if np.any(b < 0):
            raise DomainError("spending must be nonnegative")
        spent = b.sum(axis=1)
        over = spent - econ.K
        if np.any(over > rtol * econ.K):
            i = int(np.argmax(over))
            raise DomainError(f"firm {i} spends {float(spent[i])!r} > budget {float(econ.K[i])!r}")
        p = b.sum(axis=0)
        y = market_share(b)
        w = np.maximum(econ.K - spent, 0.0)
        for arr in (b, p, y, w):
            arr.setflags(write=False)
        return cls(b, p, y, w)


def tc_utility(econ: Economy, b, i: int) -> float:
    """Expected Tullock-contest profit of firm ``i``."""
    b = check_spending(econ, b)
    y = market_share(b)
    return float(econ.V[i] @ y[i] - b[i].sum())


def fm_utility(econ: Economy, b_i, p, i: int) -> float:
    """Quasi-linear Fisher-market utility of firm ``i`` at fixed prices ``p``."""
    b_i = np.asarray(b_i, dtype=float)
    p = np.asarray(p, dtype=float)
    if b_i.shape != (econ.m,) or p.shape != (econ.m,):
        raise ShapeError("spending row and price vector must have length m")
    active = b_i > 0
    if np.any(active & (p <= 0)):
        raise DomainError("positive spending on a good with nonpositive price")
    bundle = np.divide(b_i, p, out=np.zeros_like(b_i), where=active)
    return float(econ.V[i] @ bundle - b_i.sum())


def price_at(econ: Economy, X: float, good: int = 0) -> float:
    """Price of ``good`` when aggregate output is ``X``.

    Isoelastic demand uses the good's (column-constant) valuation ``v_j``.
    """
    if not X > 0:
        raise DomainError(f"aggregate output must be positive, got {X!r}")
    pf = econ.price_family
    if pf.kind == POWER:
        return float(X ** (-pf.gamma))
    col = econ.V[:, good]
    if not np.all(col == col[0]):
        raise DomainError(f"good {good} has firm-specific valuations; isoelastic price needs a common v_j")
    return float(col[0] / X)
