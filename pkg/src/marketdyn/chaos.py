"""Gradient Ascent on one-good Cournot / Tullock competition and
floating-point Li-Yorke certificates for its symmetric reduction.

With ``n`` identical firms, cost ``alpha`` and a common start, GA stays
on the diagonal and reduces to a map of one firm's output ``x``:

* isoelastic price ``1/X``:  ``f(x) = x + eta * ((n-1)/(n^2 x) - alpha)``
* power price ``X^-gamma``:  ``f(x) = x + eta * ((n x)^-gamma (1 - gamma/n) - alpha)``

The power form is the own-partial of ``x_i X^-gamma - alpha x_i`` at the
symmetric point and reduces to the isoelastic map at ``gamma = 1``.

Both maps blow up at 0, fall to a single minimum and then rise with slope
approaching 1, so a certificate follows one recipe.  Take ``L = f(argmin)``
and ``U = f(L)``, check ``f([L, U])`` stays inside ``[L, U]``, then find a
point of period 3 in ``[argmin, U]``.  By the Li-Yorke theorem, a period-3
point of a continuous interval map implies all periods and a scrambled set.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .economy import DomainError, MarketError
from .trajectory import Trajectory

log = logging.getLogger(__name__)

CERTIFIED = "certified"
FAILED = "failed"
INCONCLUSIVE = "inconclusive"

PROBE_POINTS = 100_000
ROOT_XTOL = 1e-12


@dataclass(frozen=True)
class GaMapParams:
    """Symmetric GA map parameters; ``gamma=None`` selects isoelastic
    demand with unit revenue."""

    n: int = 2
    alpha: float = 1.0
    eta: float = 0.8
    gamma: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("GA needs at least two firms")
        if not self.alpha > 0 or not self.eta > 0:
            raise DomainError("alpha and eta must be positive")
        if self.gamma is not None and not self.gamma > 0:
            raise DomainError("gamma must be positive")

    @property
    def isoelastic(self) -> bool:
        return self.gamma is None

    def with_eta(self, eta: float) -> "GaMapParams":
        return GaMapParams(self.n, self.alpha, eta, self.gamma)


def _raw_map(params: GaMapParams, x):
    n, a, eta = params.n, params.alpha, params.eta
    if params.isoelastic:
        return x + eta * ((n - 1) / (n * n * x) - a)
    g = params.gamma
    return x + eta * ((n * x) ** (-g) * (1 - g / n) - a)


def ga_map(params: GaMapParams, x):
    """One symmetric GA step.  Works elementwise on arrays."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("GA map is defined for positive output only")
    out = _raw_map(params, x)
    return float(out) if out.ndim == 0 else out


def _safe_map(params, x):
    """Map that sends escaped (nonpositive) points to nan instead of raising."""
    x = np.asarray(x, dtype=float)
    ok = x > 0
    out = np.full_like(x, np.nan)
    out[ok] = _raw_map(params, x[ok])
    return out


def iterate(f, x, k: int):
    for _ in range(k):
        x = f(x)
    return x


def map_derivative(params: GaMapParams, x):
    x = np.asarray(x, dtype=float)
    n, eta = params.n, params.eta
    if params.isoelastic:
        return 1 - eta * (n - 1) / (n * n * x * x)
    g = params.gamma
    return 1 - eta * g * (1 - g / n) * n * (n * x) ** (-g - 1)


def fixed_point(params: GaMapParams) -> float | None:
    """Interior Nash output per firm; ``None`` if the map has none."""
    n, a = params.n, params.alpha
    if params.isoelastic:
        return (n - 1) / (n * n * a)
    c0 = 1 - params.gamma / n
    if c0 <= 0:
        return None
    return (c0 / a) ** (1 / params.gamma) / n


def argmin_map(params: GaMapParams) -> float | None:
    """Minimiser of the map, by bisection on its derivative.

    ``None`` when the map is monotone (power family with ``gamma >= n``).
    """
    if not params.isoelastic and params.gamma >= params.n:
        return None
    fp = lambda x: float(map_derivative(params, x))
    lo, hi = 1.0, 1.0
    while fp(lo) >= 0:
        lo /= 2
    while fp(hi) <= 0:
        hi *= 2
    return brentq(fp, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def closed_form_range(alpha: float) -> tuple[float, float]:
    """Step sizes ``[3/(4 alpha^2), 1/alpha^2)`` covered by the closed-form interval."""
    return 3 / (4 * alpha * alpha), 1 / (alpha * alpha)


def in_closed_form_range(alpha: float, eta: float) -> bool:
    lo, hi = closed_form_range(alpha)
    return lo <= eta < hi


def invariant_interval(alpha: float, eta: float, n: int = 2) -> tuple[float, float]:
    """Closed-form invariant interval of the two-firm isoelastic map."""
    if n != 2:
        raise DomainError("closed-form interval is derived for two firms only")
    if not in_closed_form_range(alpha, eta):
        lo, hi = closed_form_range(alpha)
        raise DomainError(f"eta = {eta!r} outside [{lo!r}, {hi!r}) where the closed form holds")
    s = math.sqrt(eta)
    q = 1 - alpha * s
    L = s * q
    U = s / (4 * q) * (5 - 12 * alpha * s + 8 * alpha * alpha * eta)
    return L, U


def sign_value(eta: float, alpha: float = 1.0) -> float:
    """``f^3(sqrt(eta)/2) - sqrt(eta)/2`` for the two-firm isoelastic map."""
    params = GaMapParams(2, alpha, eta)
    x = math.sqrt(eta) / 2
    return float(iterate(lambda z: _raw_map(params, z), x, 3) - x)


class NoPeriod3(MarketError):
    """The search found no admissible period-3 point.

    ``reason`` is ``"no-sign-change"`` or ``"trivial"`` (every root was a
    fixed point).
    """

    def __init__(self, reason: str, msg: str):
        super().__init__(msg)
        self.reason = reason


def find_period3(f, bracket, tol: float = ROOT_XTOL, exclude=(), grid: int = PROBE_POINTS) -> float:
    """A root ``p`` of ``g(x) = f(f(f(x))) - x`` in ``bracket`` that is not a
    fixed point of ``f``.

    ``f`` must accept arrays; nan marks points where it is undefined.
    ``g`` is sampled on ``grid`` intervals and every sign change is refined
    with Brent's method, so roots between two same-sign endpoints are found
    too.  Roots within ``10*tol`` of a point in ``exclude`` or with
    ``|f(p) - p| <= 10*tol`` count as fixed points and are skipped.
    """
    a, b = map(float, bracket)
    if not a < b:
        raise DomainError("bracket must satisfy a < b")
    g = lambda x: f(f(f(x))) - x
    xs = np.linspace(a, b, grid + 1)
    gs = g(xs)
    sg = np.sign(gs)
    finite = np.isfinite(gs)
    exact = np.flatnonzero(finite & (gs == 0))
    cross = np.flatnonzero(finite[:-1] & finite[1:] & (sg[:-1] * sg[1:] < 0))
    if exact.size == 0 and cross.size == 0:
        raise NoPeriod3("no-sign-change", f"f^3(x) - x keeps its sign on [{a!r}, {b!r}]")

    g1 = lambda x: float(g(np.array([x]))[0])
    candidates = [float(xs[k]) for k in exact]
    for k in cross:
        candidates.append(
            brentq(g1, xs[k], xs[k + 1], xtol=min(tol, 1e-15), rtol=4 * np.finfo(float).eps, maxiter=500)
        )
    excl = [float(e) for e in exclude if e is not None]
    for p in candidates:
        if any(abs(p - e) <= 10 * tol for e in excl):
            continue
        if abs(float(f(np.array([p]))[0]) - p) <= 10 * tol:
            continue
        return p
    raise NoPeriod3("trivial", f"all {len(candidates)} roots on [{a!r}, {b!r}] are fixed points")


def _invariance_residual(f, L, U, points):
    xs = np.linspace(L, U, points)
    fx = f(xs)
    if not np.all(np.isfinite(fx)):
        return math.inf
    return float(max(0.0, (L - fx).max(), (fx - U).max()))


@dataclass
class LiYorkeCertificate:
    params: GaMapParams
    interval: tuple[float, float] | None
    fixed_point: float | None
    period3_point: float | None
    sign_conditions: tuple[float, float] | None
    invariance_residual: float
    status: str
    source: str = "numeric"
    argmin: float | None = None
    period3_residual: float | None = None
    message: str = ""
    tol: float = 1e-9

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = asdict(self.params)
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = str(v)
        return d

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _numeric_interval(f, xhat, probe):
    L = float(f(np.array([xhat]))[0])
    if not L > 0:
        return None, math.inf, f"orbit escapes: f(argmin) = {L!r} <= 0"
    U = float(f(np.array([L]))[0])
    fU = float(f(np.array([U]))[0])
    if fU <= U:
        res = _invariance_residual(f, L, U, probe)
        if res <= 1e-12 * max(1.0, U):
            return (L, U), res, ""
    Lw, Uw = L * (1 - 1e-3), U * (1 + 1e-3)
    res = _invariance_residual(f, Lw, Uw, probe)
    if res == 0.0:
        return (Lw, Uw), res, "interval widened once"
    return None, res, "no invariant interval found from the argmin construction"


def certify_li_yorke(params: GaMapParams, tol: float = 1e-9, probe: int = PROBE_POINTS) -> LiYorkeCertificate:
    """Floating-point Li-Yorke certificate for the symmetric GA map.

    Uses the closed-form interval for two isoelastic firms in its
    range, the numeric argmin construction otherwise.  ``certified`` means
    the probe grid found ``f([L, U])`` inside ``[L, U]`` to ``tol``, and a
    root of ``f^3(x) - x`` in ``[argmin, U]`` was found with
    ``|f^3(p) - p| <= tol``, ``|p - x*| > 10 tol`` and ``f(p) != p``.
    """
    f = lambda x: _safe_map(params, x)
    x_star = fixed_point(params)
    cert = LiYorkeCertificate(params, None, x_star, None, None, math.inf, INCONCLUSIVE, tol=tol)
    if x_star is None:
        cert.status = FAILED
        cert.message = "map has no interior fixed point (gamma >= n)"
        return cert
    xhat = argmin_map(params)
    cert.argmin = xhat

    if params.isoelastic and params.n == 2 and in_closed_form_range(params.alpha, params.eta):
        interval = invariant_interval(params.alpha, params.eta)
        cert.source = "analytic"
        res = _invariance_residual(f, *interval, probe)
        note = ""
    else:
        interval, res, note = _numeric_interval(f, xhat, probe)
    cert.invariance_residual = res
    cert.message = note
    if interval is None:
        cert.status = FAILED if "escape" in note else INCONCLUSIVE
        return cert
    L, U = interval
    cert.interval = (L, U)
    if not (L < x_star < U) or res > tol:
        cert.message = "fixed point outside interval" if not (L < x_star < U) else "interval not invariant"
        return cert

    g = lambda x: float(iterate(f, np.array([x]), 3)[0] - x)
    cert.sign_conditions = (g(xhat), g(U))
    if U <= xhat:
        # f is monotone decreasing on [L, U]: only periods 1 and 2 exist there
        cert.message = "invariant interval lies on the decreasing branch"
        return cert
    try:
        p = find_period3(f, (xhat, U), exclude=(x_star,), grid=probe)
    except NoPeriod3 as exc:
        cert.status = FAILED if exc.reason == "trivial" else INCONCLUSIVE
        cert.message = str(exc)
        return cert
    cert.period3_point = p
    cert.period3_residual = abs(g(p))
    if cert.period3_residual <= tol and abs(p - x_star) > 10 * tol:
        cert.status = CERTIFIED
    else:
        cert.message = f"period-3 residual {cert.period3_residual!r} above tol"
    return cert


def _eta_scale(alpha: float, gamma: float) -> float:
    # x -> alpha^(-1/gamma) x leaves the map invariant with eta -> eta alpha^(1 + 1/gamma)
    return alpha ** (1 + 1 / gamma)


@dataclass
class EtaScan:
    etas: np.ndarray
    certified: np.ndarray
    monotone: bool = True
    windows: list = field(default_factory=list)


def scan_eta(gamma: float, alpha: float = 1.0, n: int = 2, lo: float = 1e-3, hi: float = 1e3,
             points: int = 241, probe: int = 20_000) -> EtaScan:
    """Certificate status on a geometric grid of step sizes.

    ``lo`` and ``hi`` are in units of ``alpha^-(1 + 1/gamma)``, where the
    threshold is scale free.  ``windows`` lists the certified runs as index
    pairs; more than one run means certifiability is not monotone in eta.
    """
    etas = np.geomspace(lo, hi, points) / _eta_scale(alpha, gamma)
    ok = np.array([certify_li_yorke(GaMapParams(n, alpha, float(e), gamma), probe=probe).certified for e in etas])
    windows = []
    k = 0
    while k < len(ok):
        if ok[k]:
            j = k
            while j + 1 < len(ok) and ok[j + 1]:
                j += 1
            windows.append((k, j))
            k = j + 1
        else:
            k += 1
    return EtaScan(etas, ok, len(windows) <= 1, windows)


def min_chaotic_eta(gamma: float, alpha: float = 1.0, n: int = 2, tol: float = 1e-6,
                    scan: EtaScan | None = None) -> float | None:
    """Smallest step size with a certified period-3 point, to relative ``tol``.

    A geometric scan finds the first certified step size; bisection then
    refines between it and the last uncertified one.  Returns ``None`` if
    nothing in the scan certifies.
    """
    scan = scan or scan_eta(gamma, alpha, n)
    if not scan.windows:
        return None
    if not scan.monotone:
        log.warning("certified step sizes form %d separate windows for gamma=%g; "
                    "returning the start of the first", len(scan.windows), gamma)
    k = scan.windows[0][0]
    cert_at = lambda e: certify_li_yorke(GaMapParams(n, alpha, e, gamma)).certified
    hi = float(scan.etas[k])
    if not cert_at(hi):
        # scan used a coarser probe; walk up the window until the full probe agrees
        for j in range(k + 1, scan.windows[0][1] + 1):
            if cert_at(float(scan.etas[j])):
                k, hi = j, float(scan.etas[j])
                break
        else:
            return None
    if k == 0:
        return hi
    lo = float(scan.etas[k - 1])
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if cert_at(mid):
            hi = mid
        else:
            lo = mid
    return hi


def simulate_ga(alpha, x0, eta: float, T: int, floor: float = 1e-12) -> Trajectory:
    """Full ``n``-firm GA on ``u_i = x_i / X - alpha_i x_i``.

    A coordinate the step would push to ``<= 0`` is set to ``floor``; the
    number of such events per step is recorded in ``clamped``.
    """
    alpha = np.asarray(alpha, dtype=float)
    x = np.array(x0, dtype=float)
    if x.ndim != 1 or alpha.shape not in ((), x.shape):
        raise DomainError("x0 must be a vector and alpha a scalar or matching vector")
    if np.any(x <= 0):
        raise DomainError("GA start must be positive")
    if not eta > 0 or T < 0:
        raise DomainError("need eta > 0 and T >= 0")
    xs = np.empty((T + 1, x.size))
    agg = np.empty(T + 1)
    clamped = np.zeros(T + 1, dtype=int)
    xs[0] = x
    agg[0] = x.sum()
    for t in range(1, T + 1):
        X = agg[t - 1]
        x = x + eta * ((X - x) / (X * X) - alpha)
        low = x <= 0
        if low.any():
            x[low] = floor
            clamped[t] = int(low.sum())
        xs[t] = x
        agg[t] = x.sum()
    n_clamped = int(clamped.sum())
    return Trajectory(
        states=xs,
        diagnostics={"aggregate": agg, "clamped": clamped},
        message=f"{n_clamped} clamping events" if n_clamped else "",
    )


def ga_csv(traj: Trajectory) -> str:
    names = [f"x_{i + 1}" for i in range(traj.states.shape[1])]
    return traj.to_csv(names, trail=["aggregate"])
