"""Post-hoc checks on planned or simulated series.

Works on anything with ``t``, ``v_R`` and a tension array (``T`` for plans,
``tension`` for simulations).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .geometry import rotation_angle

PROPORTIONAL_TOL = 1e-9
ZERO_TOL = 1e-9


@dataclass(frozen=True)
class Case1Flag:
    """Two internal-force rates proportional over a window: lam_dot[l] = ratio * lam_dot[k]."""

    lambdas: tuple
    cable: int
    ratio: float
    window: tuple  # (t_start, t_end)


@dataclass(frozen=True)
class Case2Flag:
    """Both internal-force rates feeding ``cable`` vanish at ``instants``."""

    lambdas: tuple
    cable: int
    instants: np.ndarray


@dataclass(frozen=True)
class DegenerateFlags:
    case1: list = field(default_factory=list)
    case2: list = field(default_factory=list)

    def __bool__(self):
        return bool(self.case1 or self.case2)


@dataclass(frozen=True)
class NonStopReport:
    v_min: float
    min_speed: np.ndarray
    argmin_time: np.ndarray
    min_tension: np.ndarray
    verdict: bool
    refined_min_speed: np.ndarray = None
    refined_argmin_time: np.ndarray = None
    degenerate: DegenerateFlags = field(default_factory=DegenerateFlags)
    pose_error: tuple = None


def _tension(series):
    T = getattr(series, "T", None)
    return series.tension if T is None else T


def min_speed(series, v_min, refine_with=None, degenerate=None, pose_error=None):
    """Per-carrier speed minima over the series grid.

    With ``refine_with`` (a :class:`~slingloiter.planner.ForcePlan`), each
    local grid minimum is also polished on the analytic plan.
    """
    speeds = np.linalg.norm(series.v_R, axis=2)
    if speeds.shape[0] == 0:
        raise ValueError("empty series")
    k = np.argmin(speeds, axis=0)
    cols = np.arange(speeds.shape[1])
    mins = speeds[k, cols]
    refined = refined_t = None
    if refine_with is not None:
        refined = np.empty_like(mins)
        refined_t = np.empty_like(mins)
        for i in cols:
            pts = refine_minima(refine_with, series.t, speeds[:, i], i)
            j = int(np.argmin([s for _, s in pts]))
            refined_t[i], refined[i] = pts[j]
    return NonStopReport(
        v_min=float(v_min),
        min_speed=mins,
        argmin_time=np.asarray(series.t)[k],
        min_tension=_tension(series).min(axis=0),
        verdict=bool(np.all(mins >= v_min)),
        refined_min_speed=refined,
        refined_argmin_time=refined_t,
        degenerate=degenerate if degenerate is not None else DegenerateFlags(),
        pose_error=pose_error,
    )


def local_minima(values):
    """Indices of grid points not larger than their neighbours (ends included)."""
    v = np.asarray(values)
    if v.size < 3:
        return np.array([int(np.argmin(v))])
    left = np.r_[True, v[1:] <= v[:-1]]
    right = np.r_[v[:-1] <= v[1:], True]
    idx = np.flatnonzero(left & right)
    # plateaus produce runs of indices; keep one per run
    keep = np.r_[True, np.diff(idx) > 1]
    return idx[keep]


def refine_minima(force_plan, t, speed, carrier, xatol=1e-13):
    """Polish every local grid minimum of one carrier's speed on the analytic plan.

    Returns a list of ``(time, speed)`` pairs.
    """
    t = np.asarray(t)
    out = []

    for k in local_minima(speed):
        lo = t[max(k - 1, 0)]
        hi = t[min(k + 1, t.size - 1)]
        if hi <= lo:
            out.append((float(t[k]), float(speed[k])))
            continue
        # search in the offset from t[k]: the bounded method's tolerance grows
        # with |x|, which would cap the resolution at large t
        c = float(t[k])

        def f(s, c=c):
            return float(force_plan.speeds_at(c + s)[carrier])

        res = minimize_scalar(f, bounds=(lo - c, hi - c), method="bounded",
                              options={"xatol": xatol})
        best = (c + float(res.x), float(res.fun))
        if speed[k] < best[1]:
            best = (float(t[k]), float(speed[k]))
        out.append(best)
    return out


def _sharing(pairs):
    """(k, l, cable) for every two internal-force components that load a common cable."""
    out = []
    for k in range(len(pairs)):
        for l in range(k + 1, len(pairs)):
            common = set(pairs[k]) & set(pairs[l])
            if common:
                out.append((k, l, common.pop()))
    return out


def _zero_crossings(t, x):
    """Sample-based roots of a sampled signal: exact zeros plus linear interpolation
    inside sign-change intervals. Returns (root_times, interval_indices)."""
    roots = []
    where = []
    for s in np.flatnonzero(x == 0.0):
        roots.append(t[s])
        where.append(s)
    sc = np.flatnonzero(x[:-1] * x[1:] < 0.0)
    for s in sc:
        a, b = x[s], x[s + 1]
        roots.append(t[s] - a * (t[s + 1] - t[s]) / (b - a))
        where.append(s)
    order = np.argsort(roots)
    return np.asarray(roots)[order], np.asarray(where, dtype=int)[order]


def detect_degenerate(lam_dot, pairs, t=None, traj=None, window=None,
                      ratio_tol=PROPORTIONAL_TOL, zero_tol=ZERO_TOL):
    """Flag internal-force rate patterns that stall a carrier.

    Case 1: for two components loading a common cable, the 2 x K matrix of
    their samples has second singular value below ``ratio_tol`` times the
    first. ``window`` (samples) switches to sliding, non-overlapping windows.

    Case 2: instants where both components loading a common cable vanish.
    With ``traj`` the candidate roots are solved on the analytic trajectory and
    kept when the other rate is below ``zero_tol`` there. Without it, exact
    sample zeros count, and so do sign changes of both rates inside the same or
    adjacent grid intervals.
    """
    lam_dot = np.asarray(lam_dot, dtype=float)
    K = lam_dot.shape[0]
    if K < 10:
        raise ValueError("need at least 10 samples")
    t = np.arange(K, dtype=float) if t is None else np.asarray(t, dtype=float)
    case1 = []
    case2 = []
    size = K if window is None else int(window)
    for k, l, cable in _sharing(pairs):
        for start in range(0, K - size + 1, size):
            seg = lam_dot[start:start + size, [k, l]].T
            s = np.linalg.svd(seg, compute_uv=False)
            if s[0] > 0.0 and s[1] <= ratio_tol * s[0]:
                xk, xl = seg
                nk = xk @ xk
                ratio = float(xk @ xl / nk) if nk > 0 else float("inf")
                case1.append(Case1Flag((k, l), cable, ratio, (t[start], t[start + size - 1])))
        instants = _double_zeros(t, lam_dot[:, k], lam_dot[:, l], k, l, traj, zero_tol)
        if instants.size:
            case2.append(Case2Flag((k, l), cable, instants))
    return DegenerateFlags(case1, case2)


def _double_zeros(t, xk, xl, k, l, traj, zero_tol):
    both = np.flatnonzero((np.abs(xk) <= zero_tol) & (np.abs(xl) <= zero_tol))
    found = list(t[both])
    rk, wk = _zero_crossings(t, xk)
    rl, wl = _zero_crossings(t, xl)
    if traj is not None:
        for comp, other, roots, where in ((k, l, rk, wk), (l, k, rl, wl)):
            for r, s in zip(roots, where):
                lo, hi = t[s], t[min(s + 1, t.size - 1)]
                r = _polish_root(traj, comp, lo, hi, r)
                if abs(traj(r)[1][other]) <= zero_tol:
                    found.append(r)
    else:
        wl_set = set(wl.tolist())
        for r, s in zip(rk, wk):
            if s in wl_set or (s - 1) in wl_set or (s + 1) in wl_set:
                found.append(r)
    if not found:
        return np.array([])
    found = np.sort(np.asarray(found, dtype=float))
    dt = np.min(np.diff(t)) if t.size > 1 else 1.0
    keep = np.r_[True, np.diff(found) > 0.5 * dt]
    return found[keep]


def _polish_root(traj, comp, lo, hi, guess):
    def g(s):
        return traj(s)[1][comp]

    a, b = g(lo), g(hi)
    if a == 0.0:
        return float(lo)
    if b == 0.0:
        return float(hi)
    if a * b < 0.0:
        return float(brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return float(guess)


def pose_error(series, p_target, R_target):
    """Largest position error (m) and geodesic attitude error (rad) over the series."""
    p_err = np.linalg.norm(np.asarray(series.p_L) - np.asarray(p_target), axis=-1)
    R_L = np.asarray(series.R_L)
    if R_L.ndim == 2:
        R_L = R_L[None]
    angles = [rotation_angle(R_target, R) for R in R_L]
    return float(np.max(p_err)), float(np.max(angles))
