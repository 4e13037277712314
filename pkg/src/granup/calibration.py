"""Parameter identification from friction angles and measured data tables.

Data enters as :class:`DataSeries`; CSV files carry a header row with the two
column units (``x_unit,y_unit``) followed by one ``x,y`` pair per line.
"""
import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares

from granup.errors import CalibrationError, FitError
from granup.hardening import cohesion_kernel
from granup.yield_surface import critical_state_phi, lode_g_kernel, meridian_S

log = logging.getLogger(__name__)

N_STARTS = 8
_LSQ_TOL = dict(ftol=1e-15, xtol=1e-15, gtol=1e-15, max_nfev=4000)


@dataclass(frozen=True)
class DataSeries:
    """Ordered (x, y) pairs with declared units.

    With ``ordered`` (the default) x must be strictly increasing; shear-box
    data with repeated normal loads can be built with ``ordered=False``.
    """

    x: np.ndarray
    y: np.ndarray
    x_unit: str = ""
    y_unit: str = ""
    ordered: bool = True

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise CalibrationError("x and y must have the same length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise CalibrationError("data values must be finite")
        if self.ordered and np.any(np.diff(x) <= 0):
            raise CalibrationError("x values must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.x.size


def read_series(path, ordered=True):
    """Read a two-column CSV with a ``x_unit,y_unit`` header.

    Malformed content raises :class:`CalibrationError` naming the line.
    """
    xs, ys = [], []
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = None
        for lineno, row in enumerate(rows, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if header is None:
                if len(row) != 2:
                    raise CalibrationError(f"{path}:{lineno}: header must be 'x_unit,y_unit'")
                header = [cell.strip() for cell in row]
                continue
            if len(row) != 2:
                raise CalibrationError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                xs.append(float(row[0]))
                ys.append(float(row[1]))
            except ValueError:
                raise CalibrationError(f"{path}:{lineno}: non-numeric value") from None
    if header is None:
        raise CalibrationError(f"{path}: empty file")
    try:
        return DataSeries(np.array(xs), np.array(ys), header[0], header[1], ordered)
    except CalibrationError as exc:
        raise CalibrationError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class FitResult:
    """Fitted values, residual 2-norm and diagnostics."""

    values: dict
    residual_norm: float
    degenerate: bool = False
    nfev: int = 0
    extras: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]


# ---------------------------------------------------------------------------
# friction-angle relations
# ---------------------------------------------------------------------------


def friction_angle_from_shear(data: DataSeries):
    """Friction angle (rad) from normal load vs peak shear force.

    Coulomb-Mohr line through the origin fitted by least squares.
    """
    x, y = data.x, data.y
    if x.size < 2:
        raise FitError("at least two shear tests are needed")
    if np.ptp(x) == 0.0:
        raise FitError("all normal loads are equal; the slope is undetermined")
    slope = float(x @ y / (x @ x))
    return math.atan(slope)


def lode_ratio(beta, gamma):
    """g(0)/g(pi/3): extension over compression section size."""
    return float(lode_g_kernel(1.0, beta, gamma) / lode_g_kernel(-1.0, beta, gamma))


def mohr_coulomb_ratio(phi):
    s = math.sin(phi)
    return (3.0 - s) / (3.0 + s)


def beta_from_friction(phi, gamma):
    """Deviatoric-shape parameter beta matching the Mohr-Coulomb section ratio."""
    if not 0.0 < phi < math.pi / 2:
        raise CalibrationError("friction angle must lie in (0, pi/2)")
    if not 0.0 <= gamma < 1.0:
        raise CalibrationError("gamma must lie in [0, 1)")
    target = mohr_coulomb_ratio(phi)

    def resid(b):
        return lode_ratio(b, gamma) - target

    lo, hi = resid(0.0), resid(2.0)
    if lo == 0.0:
        return 0.0
    if hi == 0.0:
        return 2.0
    if lo * hi > 0:
        raise CalibrationError(f"no beta in [0, 2] reproduces the ratio {target:.6g} for gamma = {gamma}")
    return brentq(resid, 0.0, 2.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def mohr_coulomb_slope(phi):
    """Critical-state slope 6 sin(phi)/(3 - sin(phi)) in triaxial compression."""
    s = math.sin(phi)
    return 6.0 * s / (3.0 - s)


def M_from_friction(phi, m, alpha, gamma, beta):
    """Meridian scale M placing the compression critical state on the friction line."""
    ph = critical_state_phi(m, alpha)
    g_c = float(lode_g_kernel(-1.0, beta, gamma))
    return mohr_coulomb_slope(phi) * ph / (g_c * math.sqrt(meridian_S(ph, m, alpha)))


def jaky_k0(phi):
    """At-rest earth pressure coefficient 1 - sin(phi)."""
    if not 0.0 <= phi < math.pi / 2:
        raise CalibrationError("friction angle must lie in [0, pi/2)")
    return 1.0 - math.sin(phi)


# ---------------------------------------------------------------------------
# hardening-law fits
# ---------------------------------------------------------------------------


def cooper_eaton_curve(p_c, Lambda1, Lambda2, a1t, a2t):
    """Plastic volumetric strain of the two-exponential densification law."""
    p_c = np.asarray(p_c, dtype=float)
    return -a1t * np.exp(-Lambda1 / p_c) - a2t * np.exp(-Lambda2 / p_c)


def _best_of(candidates, what):
    ok = [r for r in candidates if r is not None and r.success]
    pool = ok or [r for r in candidates if r is not None]
    if not pool:
        raise FitError(f"{what}: every start failed")
    best = min(pool, key=lambda r: r.cost)
    return best, bool(ok)


def fit_cooper_eaton(data: DataSeries):
    """Fit (Lambda1, Lambda2, a1t, a2t) to (p_c, tr eps_p) pairs.

    Bounds keep all four positive; a1t + a2t <= 1 enters as a penalty row.
    The pair is reported with Lambda1 < Lambda2.
    """
    x, y = data.x, data.y
    if x.size < 6:
        raise FitError("the densification fit needs at least 6 points")
    if np.any(x <= 0):
        raise FitError("forming pressures must be positive")
    scale = max(float(np.max(np.abs(y))), 1e-12)
    penalty = 1e3 / scale

    def resid(v):
        l1, l2, a1, a2 = math.exp(v[0]), math.exp(v[1]), v[2], v[3]
        r = (cooper_eaton_curve(x, l1, l2, a1, a2) - y) / scale
        return np.append(r, penalty * max(0.0, a1 + a2 - 1.0))

    grid = np.geomspace(x.min(), x.max(), N_STARTS)
    lo = [-30.0, -30.0, 1e-12, 1e-12]
    hi = [30.0, 30.0, 1.0, 1.0]
    candidates = []
    for k in range(N_STARTS):
        l1 = grid[k]
        l2 = grid[min(k + 2, N_STARTS - 1)] * 2.0
        v0 = [math.log(l1), math.log(l2), min(0.5 * scale, 0.49), min(0.5 * scale, 0.49)]
        try:
            candidates.append(least_squares(resid, v0, bounds=(lo, hi), method="trf", **_LSQ_TOL))
        except (ValueError, FloatingPointError) as exc:
            log.debug("start %d failed: %s", k, exc)
            candidates.append(None)
    best, converged = _best_of(candidates, "densification fit")
    l1, l2, a1, a2 = math.exp(best.x[0]), math.exp(best.x[1]), float(best.x[2]), float(best.x[3])
    if l1 > l2:
        l1, l2, a1, a2 = l2, l1, a2, a1
    values = {"Lambda1": l1, "Lambda2": l2, "a1t": a1, "a2t": a2}
    rn = float(np.linalg.norm(cooper_eaton_curve(x, l1, l2, a1, a2) - y))
    if not converged:
        raise FitError("densification fit did not converge", best=values)
    return FitResult(values, rn, nfev=sum(r.nfev for r in candidates if r is not None))


def cohesion_curve(p_c, Gamma, cinf, pcb):
    p_c = np.asarray(p_c, dtype=float)
    return np.array([cohesion_kernel(float(v), cinf, Gamma, pcb) for v in p_c.ravel()]).reshape(p_c.shape)


def fit_bowden_tabor(x, y):
    """Closed-form least squares for c = k p^(2/3); returns (k, residual norm)."""
    w = np.asarray(x, dtype=float) ** (2.0 / 3.0)
    k = float(w @ y / (w @ w))
    return k, float(np.linalg.norm(k * w - y))


def fit_cohesion(data: DataSeries):
    """Fit (Gamma, cinf, pcb) of the saturating cohesion law to (p_c, c) pairs.

    The Bowden-Tabor fit and its residual are reported in ``extras``.
    All-zero cohesion gives cinf = 0 and a ``degenerate`` result.
    """
    x, y = data.x, data.y
    if x.size < 4:
        raise FitError("the cohesion fit needs at least 4 points")
    if np.any(x < 0):
        raise FitError("forming pressures must be non-negative")
    k, bt_rn = fit_bowden_tabor(x, y)
    extras = {"bowden_tabor_k": k, "bowden_tabor_residual": bt_rn}
    scale = float(np.max(np.abs(y)))
    if scale == 0.0:
        return FitResult({"Gamma": float("nan"), "cinf": 0.0, "pcb": float("nan")}, 0.0, True, 0, extras)

    def resid(v):
        return (cohesion_curve(x, math.exp(v[0]), v[1], v[2]) - y) / scale

    positive = x[y > 1e-12 * scale]
    i0 = int(np.searchsorted(x, positive[0])) if positive.size else 0
    pcb0 = 0.5 * (x[i0 - 1] + x[i0]) if i0 > 0 else 0.0
    span = max(float(x.max() - pcb0), 1e-12)
    lo = [-40.0, 0.0, 0.0]
    hi = [40.0, np.inf, float(x.max())]
    candidates = []
    for k_start, gam0 in enumerate(np.geomspace(0.1, 10.0, N_STARTS) / span):
        v0 = [math.log(gam0), 1.2 * scale, min(pcb0, hi[2])]
        try:
            candidates.append(least_squares(resid, v0, bounds=(lo, hi), method="trf", **_LSQ_TOL))
        except (ValueError, FloatingPointError) as exc:
            log.debug("start %d failed: %s", k_start, exc)
            candidates.append(None)
    best, converged = _best_of(candidates, "cohesion fit")
    values = {"Gamma": math.exp(best.x[0]), "cinf": float(best.x[1]), "pcb": float(best.x[2])}
    rn = float(np.linalg.norm(cohesion_curve(x, values["Gamma"], values["cinf"], values["pcb"]) - y))
    if not converged:
        raise FitError("cohesion fit did not converge", best=values)
    degenerate = values["cinf"] <= 1e-12 * scale
    return FitResult(values, rn, degenerate, sum(r.nfev for r in candidates if r is not None), extras)
