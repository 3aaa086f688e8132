"""Hot loops: plan evaluation and the closed-loop RK4 integrator.

Every kernel exists twice: a ``*_nb`` version written as scalar loops for
numba, and a ``*_np`` version written with array operations. They compute the
same thing and are cross-checked in the test suite. ``_accel.BACKEND`` picks
which one the public modules call.

Packed parameter layouts (all float64):

* ``lam_params``: (4, m) rows = lambda0, amplitude, frequency, phase
* ``load_params``: [mass, linear friction, angular friction, gravity]
* ``cab``: (n, 5) columns = rest length, stiffness, carrier mass, kp, kd
* state vector ``x``: [p_L(3), v_L(3), w_L(3), p_R(3n), v_R(3n)], attitude kept
  separately as a 3x3 matrix.
"""

import numpy as np

from ._accel import njit

CABLE_SPRING = 0
CABLE_IDEAL = 1
CABLE_NONE = 2

DIVERGE_LIMIT = 1e6

# ---------------------------------------------------------------------------
# planning chain
# ---------------------------------------------------------------------------


def plan_np(t, f0, N, lam_params, anchors_eq, lengths):
    """Vectorized planning chain over a time grid.

    Returns lam, lam_dot (K, m); f, f_dot, q, q_dot, p_R, v_R (K, n, 3);
    T, T_dot (K, n).
    """
    t = np.asarray(t, dtype=float)
    lam0, amp, psi, phi = lam_params
    arg = np.outer(t, psi) + phi
    lam = lam0 + amp * np.cos(arg)
    lam_dot = -amp * psi * np.sin(arg)
    n = anchors_eq.shape[0]
    K = t.shape[0]
    f = (f0 + lam @ N.T).reshape(K, n, 3)
    f_dot = (lam_dot @ N.T).reshape(K, n, 3)
    T = np.linalg.norm(f, axis=2)
    q = f / T[..., None]
    T_dot = np.einsum("kij,kij->ki", q, f_dot)
    q_dot = (f_dot - q * T_dot[..., None]) / T[..., None]
    p_R = anchors_eq[None] + q * lengths[None, :, None]
    v_R = q_dot * lengths[None, :, None]
    return lam, lam_dot, f, f_dot, T, T_dot, q, q_dot, p_R, v_R


@njit(cache=True)
def plan_nb(t, f0, N, lam_params, anchors_eq, lengths):
    K = t.shape[0]
    m = N.shape[1]
    n = anchors_eq.shape[0]
    lam = np.empty((K, m))
    lam_dot = np.empty((K, m))
    f = np.empty((K, n, 3))
    f_dot = np.empty((K, n, 3))
    T = np.empty((K, n))
    T_dot = np.empty((K, n))
    q = np.empty((K, n, 3))
    q_dot = np.empty((K, n, 3))
    p_R = np.empty((K, n, 3))
    v_R = np.empty((K, n, 3))
    for k in range(K):
        for j in range(m):
            a = lam_params[2, j] * t[k] + lam_params[3, j]
            lam[k, j] = lam_params[0, j] + lam_params[1, j] * np.cos(a)
            lam_dot[k, j] = -lam_params[1, j] * lam_params[2, j] * np.sin(a)
        for i in range(n):
            for c in range(3):
                r = 3 * i + c
                acc = f0[r]
                accd = 0.0
                for j in range(m):
                    acc += N[r, j] * lam[k, j]
                    accd += N[r, j] * lam_dot[k, j]
                f[k, i, c] = acc
                f_dot[k, i, c] = accd
            tn = np.sqrt(f[k, i, 0] ** 2 + f[k, i, 1] ** 2 + f[k, i, 2] ** 2)
            T[k, i] = tn
            td = 0.0
            for c in range(3):
                q[k, i, c] = f[k, i, c] / tn
                td += q[k, i, c] * f_dot[k, i, c]
            T_dot[k, i] = td
            for c in range(3):
                q_dot[k, i, c] = (f_dot[k, i, c] - q[k, i, c] * td) / tn
                p_R[k, i, c] = anchors_eq[i, c] + q[k, i, c] * lengths[i]
                v_R[k, i, c] = q_dot[k, i, c] * lengths[i]
    return lam, lam_dot, f, f_dot, T, T_dot, q, q_dot, p_R, v_R


# ---------------------------------------------------------------------------
# closed-loop simulation, numpy reference path
# ---------------------------------------------------------------------------


def _skew_np(v):
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def _exp_np(w):
    theta = np.sqrt(w @ w)
    K = _skew_np(w)
    if theta < 1e-8:
        return np.eye(3) + K + 0.5 * (K @ K)
    return (
        np.eye(3)
        + (np.sin(theta) / theta) * K
        + ((1.0 - np.cos(theta)) / (theta * theta)) * (K @ K)
    )


def _dexpinv_np(u, a):
    ua = np.cross(u, a)
    return a - 0.5 * ua + np.cross(u, ua) / 12.0


def reference_np(t, f0, N, lam_params, anchors_eq, cab):
    """Carrier position/velocity references and planned load-side forces at t."""
    lam0, amp, psi, phi = lam_params
    arg = psi * t + phi
    lam = lam0 + amp * np.cos(arg)
    lam_dot = -amp * psi * np.sin(arg)
    n = anchors_eq.shape[0]
    f = (f0 + N @ lam).reshape(n, 3)
    f_dot = (N @ lam_dot).reshape(n, 3)
    T = np.linalg.norm(f, axis=1)
    q = f / T[:, None]
    T_dot = np.sum(q * f_dot, axis=1)
    q_dot = (f_dot - q * T_dot[:, None]) / T[:, None]
    L0 = cab[:, 0]
    Kc = cab[:, 1]
    reach = L0 + T / Kc
    p_ref = anchors_eq + q * reach[:, None]
    v_ref = q_dot * reach[:, None] + q * (T_dot / Kc)[:, None]
    return p_ref, v_ref, f


def rhs_np(t, x, R, load_params, J, J_inv, anchors, cab, f0, N, lam_params,
           anchors_eq, feedforward, cable_mode):
    """State derivative and world-frame angular rate.

    Returns (x_dot, w_world, tension) where tension is the per-cable spring
    tension (N) at this state.
    """
    mL, ct, cr, g = load_params
    n = anchors.shape[0]
    p_L = x[0:3]
    v_L = x[3:6]
    w = x[6:9]
    p_R = x[9 : 9 + 3 * n].reshape(n, 3)
    v_R = x[9 + 3 * n :].reshape(n, 3)
    e3 = np.array([0.0, 0.0, 1.0])

    p_ref, v_ref, f_plan = reference_np(t, f0, N, lam_params, anchors_eq, cab)
    anchor_w = p_L + anchors @ R.T
    if cable_mode == CABLE_SPRING:
        d = p_R - anchor_w
        dist = np.linalg.norm(d, axis=1)
        stretch = np.maximum(dist - cab[:, 0], 0.0)
        tension = cab[:, 1] * stretch
        f_load = (tension / dist)[:, None] * d
    elif cable_mode == CABLE_IDEAL:
        f_load = f_plan
        tension = np.linalg.norm(f_plan, axis=1)
    else:
        f_load = np.zeros((n, 3))
        tension = np.zeros(n)

    a_L = (-mL * g * e3 - ct * v_L + f_load.sum(axis=0)) / mL
    f_body = f_load @ R  # rows are R.T @ f_i
    torque = np.cross(anchors, f_body).sum(axis=0) - cr * w - np.cross(w, J @ w)
    w_dot = J_inv @ torque

    mR = cab[:, 2][:, None]
    u = cab[:, 3][:, None] * (p_ref - p_R) + cab[:, 4][:, None] * (v_ref - v_R)
    if feedforward:
        u = u + mR * g * e3 + f_plan
    a_R = (u - mR * g * e3 - f_load) / mR

    x_dot = np.concatenate([v_L, a_L, w_dot, v_R.ravel(), a_R.ravel()])
    return x_dot, R @ w, tension


def rk4_step_np(t, x, R, dt, *args):
    """One Runge-Kutta-Munthe-Kaas step (classical RK4 tableau)."""
    k1, a1, _ = rhs_np(t, x, R, *args)
    u2 = 0.5 * dt * a1
    k2, a2, _ = rhs_np(t + 0.5 * dt, x + 0.5 * dt * k1, _exp_np(u2) @ R, *args)
    a2 = _dexpinv_np(u2, a2)
    u3 = 0.5 * dt * a2
    k3, a3, _ = rhs_np(t + 0.5 * dt, x + 0.5 * dt * k2, _exp_np(u3) @ R, *args)
    a3 = _dexpinv_np(u3, a3)
    u4 = dt * a3
    k4, a4, _ = rhs_np(t + dt, x + dt * k3, _exp_np(u4) @ R, *args)
    a4 = _dexpinv_np(u4, a4)
    x_new = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    v = (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    R_new = _exp_np(v) @ R
    R_new = 1.5 * R_new - 0.5 * R_new @ R_new.T @ R_new
    return x_new, R_new


def run_np(x0, R0, t0, dt, nsteps, *args):
    """Integrate ``nsteps`` steps, recording every state.

    Returns (X, Rs, tension, status, last) where status is 0 on success or 1
    when a state norm exceeded DIVERGE_LIMIT at step index ``last``.
    """
    dim = x0.shape[0]
    n = args[3].shape[0]
    X = np.empty((nsteps + 1, dim))
    Rs = np.empty((nsteps + 1, 3, 3))
    tension = np.empty((nsteps + 1, n))
    x = x0.copy()
    R = R0.copy()
    for k in range(nsteps + 1):
        t = t0 + k * dt
        X[k] = x
        Rs[k] = R
        tension[k] = rhs_np(t, x, R, *args)[2]
        if not np.all(np.isfinite(x)) or np.abs(x).max() > DIVERGE_LIMIT:
            return X[: k + 1], Rs[: k + 1], tension[: k + 1], 1, k
        if k == nsteps:
            break
        x, R = rk4_step_np(t, x, R, dt, *args)
    return X, Rs, tension, 0, nsteps


# ---------------------------------------------------------------------------
# closed-loop simulation, numba path
# ---------------------------------------------------------------------------


@njit(cache=True)
def _exp_nb(w, out):
    theta = np.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    if theta < 1e-8:
        a = 1.0
        b = 0.5
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / (theta * theta)
    x, y, z = w[0], w[1], w[2]
    out[0, 0] = 1.0 - b * (y * y + z * z)
    out[0, 1] = -a * z + b * x * y
    out[0, 2] = a * y + b * x * z
    out[1, 0] = a * z + b * x * y
    out[1, 1] = 1.0 - b * (x * x + z * z)
    out[1, 2] = -a * x + b * y * z
    out[2, 0] = -a * y + b * x * z
    out[2, 1] = a * x + b * y * z
    out[2, 2] = 1.0 - b * (x * x + y * y)


@njit(cache=True)
def _cross_nb(a, b, out):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


@njit(cache=True)
def _dexpinv_nb(u, a, out):
    ua = np.empty(3)
    uua = np.empty(3)
    _cross_nb(u, a, ua)
    _cross_nb(u, ua, uua)
    for c in range(3):
        out[c] = a[c] - 0.5 * ua[c] + uua[c] / 12.0


@njit(cache=True)
def _reference_nb(t, f0, N, lam_params, anchors_eq, cab, p_ref, v_ref, f_plan):
    m = N.shape[1]
    n = anchors_eq.shape[0]
    lam = np.empty(m)
    lam_dot = np.empty(m)
    for j in range(m):
        a = lam_params[2, j] * t + lam_params[3, j]
        lam[j] = lam_params[0, j] + lam_params[1, j] * np.cos(a)
        lam_dot[j] = -lam_params[1, j] * lam_params[2, j] * np.sin(a)
    fd = np.empty(3)
    q = np.empty(3)
    for i in range(n):
        for c in range(3):
            r = 3 * i + c
            acc = f0[r]
            accd = 0.0
            for j in range(m):
                acc += N[r, j] * lam[j]
                accd += N[r, j] * lam_dot[j]
            f_plan[i, c] = acc
            fd[c] = accd
        T = np.sqrt(f_plan[i, 0] ** 2 + f_plan[i, 1] ** 2 + f_plan[i, 2] ** 2)
        T_dot = 0.0
        for c in range(3):
            q[c] = f_plan[i, c] / T
            T_dot += q[c] * fd[c]
        reach = cab[i, 0] + T / cab[i, 1]
        for c in range(3):
            q_dot = (fd[c] - q[c] * T_dot) / T
            p_ref[i, c] = anchors_eq[i, c] + q[c] * reach
            v_ref[i, c] = q_dot * reach + q[c] * T_dot / cab[i, 1]


@njit(cache=True)
def _rhs_nb(t, x, R, load_params, J, J_inv, anchors, cab, f0, N, lam_params,
            anchors_eq, feedforward, cable_mode, x_dot, w_world, tension):
    mL = load_params[0]
    ct = load_params[1]
    cr = load_params[2]
    g = load_params[3]
    n = anchors.shape[0]
    p_ref = np.empty((n, 3))
    v_ref = np.empty((n, 3))
    f_plan = np.empty((n, 3))
    _reference_nb(t, f0, N, lam_params, anchors_eq, cab, p_ref, v_ref, f_plan)

    f_sum = np.zeros(3)
    torque = np.zeros(3)
    f_i = np.empty(3)
    fb = np.empty(3)
    tq = np.empty(3)
    off = 9 + 3 * n
    for i in range(n):
        if cable_mode == 0:
            d0 = x[9 + 3 * i] - x[0]
            d1 = x[10 + 3 * i] - x[1]
            d2 = x[11 + 3 * i] - x[2]
            # anchor_world = p_L + R b_i
            d0 -= R[0, 0] * anchors[i, 0] + R[0, 1] * anchors[i, 1] + R[0, 2] * anchors[i, 2]
            d1 -= R[1, 0] * anchors[i, 0] + R[1, 1] * anchors[i, 1] + R[1, 2] * anchors[i, 2]
            d2 -= R[2, 0] * anchors[i, 0] + R[2, 1] * anchors[i, 1] + R[2, 2] * anchors[i, 2]
            dist = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
            stretch = dist - cab[i, 0]
            if stretch < 0.0:
                stretch = 0.0
            tn = cab[i, 1] * stretch
            tension[i] = tn
            f_i[0] = tn * d0 / dist
            f_i[1] = tn * d1 / dist
            f_i[2] = tn * d2 / dist
        elif cable_mode == 1:
            for c in range(3):
                f_i[c] = f_plan[i, c]
            tension[i] = np.sqrt(f_i[0] ** 2 + f_i[1] ** 2 + f_i[2] ** 2)
        else:
            for c in range(3):
                f_i[c] = 0.0
            tension[i] = 0.0
        for c in range(3):
            f_sum[c] += f_i[c]
            fb[c] = R[0, c] * f_i[0] + R[1, c] * f_i[1] + R[2, c] * f_i[2]
        _cross_nb(anchors[i], fb, tq)
        for c in range(3):
            torque[c] += tq[c]

        mR = cab[i, 2]
        for c in range(3):
            r = 3 * i + c
            u = cab[i, 3] * (p_ref[i, c] - x[9 + r]) + cab[i, 4] * (v_ref[i, c] - x[off + r])
            if feedforward:
                u += f_plan[i, c]
                if c == 2:
                    u += mR * g
            grav = mR * g if c == 2 else 0.0
            x_dot[9 + r] = x[off + r]
            x_dot[off + r] = (u - grav - f_i[c]) / mR

    for c in range(3):
        x_dot[c] = x[3 + c]
    x_dot[3] = (-ct * x[3] + f_sum[0]) / mL
    x_dot[4] = (-ct * x[4] + f_sum[1]) / mL
    x_dot[5] = (-mL * g - ct * x[5] + f_sum[2]) / mL

    w = x[6:9]
    Jw = np.empty(3)
    for r in range(3):
        Jw[r] = J[r, 0] * w[0] + J[r, 1] * w[1] + J[r, 2] * w[2]
    wJw = np.empty(3)
    _cross_nb(w, Jw, wJw)
    for c in range(3):
        torque[c] += -cr * w[c] - wJw[c]
    for r in range(3):
        x_dot[6 + r] = J_inv[r, 0] * torque[0] + J_inv[r, 1] * torque[1] + J_inv[r, 2] * torque[2]
        w_world[r] = R[r, 0] * w[0] + R[r, 1] * w[1] + R[r, 2] * w[2]


@njit(cache=True)
def _matmul3_nb(A, B, out):
    for r in range(3):
        for c in range(3):
            out[r, c] = A[r, 0] * B[0, c] + A[r, 1] * B[1, c] + A[r, 2] * B[2, c]


@njit(cache=True)
def rk4_step_nb(t, x, R, dt, load_params, J, J_inv, anchors, cab, f0, N,
                lam_params, anchors_eq, feedforward, cable_mode):
    dim = x.shape[0]
    n = anchors.shape[0]
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    a1 = np.empty(3)
    a2 = np.empty(3)
    a3 = np.empty(3)
    a4 = np.empty(3)
    araw = np.empty(3)
    u = np.empty(3)
    tension = np.empty(n)
    xs = np.empty(dim)
    E = np.empty((3, 3))
    Rs = np.empty((3, 3))

    _rhs_nb(t, x, R, load_params, J, J_inv, anchors, cab, f0, N, lam_params,
            anchors_eq, feedforward, cable_mode, k1, a1, tension)

    for c in range(3):
        u[c] = 0.5 * dt * a1[c]
    _exp_nb(u, E)
    _matmul3_nb(E, R, Rs)
    for r in range(dim):
        xs[r] = x[r] + 0.5 * dt * k1[r]
    _rhs_nb(t + 0.5 * dt, xs, Rs, load_params, J, J_inv, anchors, cab, f0, N,
            lam_params, anchors_eq, feedforward, cable_mode, k2, araw, tension)
    _dexpinv_nb(u, araw, a2)

    for c in range(3):
        u[c] = 0.5 * dt * a2[c]
    _exp_nb(u, E)
    _matmul3_nb(E, R, Rs)
    for r in range(dim):
        xs[r] = x[r] + 0.5 * dt * k2[r]
    _rhs_nb(t + 0.5 * dt, xs, Rs, load_params, J, J_inv, anchors, cab, f0, N,
            lam_params, anchors_eq, feedforward, cable_mode, k3, araw, tension)
    _dexpinv_nb(u, araw, a3)

    for c in range(3):
        u[c] = dt * a3[c]
    _exp_nb(u, E)
    _matmul3_nb(E, R, Rs)
    for r in range(dim):
        xs[r] = x[r] + dt * k3[r]
    _rhs_nb(t + dt, xs, Rs, load_params, J, J_inv, anchors, cab, f0, N,
            lam_params, anchors_eq, feedforward, cable_mode, k4, araw, tension)
    _dexpinv_nb(u, araw, a4)

    x_new = np.empty(dim)
    for r in range(dim):
        x_new[r] = x[r] + (dt / 6.0) * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r])
    for c in range(3):
        u[c] = (dt / 6.0) * (a1[c] + 2.0 * a2[c] + 2.0 * a3[c] + a4[c])
    _exp_nb(u, E)
    _matmul3_nb(E, R, Rs)
    # one Newton step of the polar decomposition
    RtR = np.empty((3, 3))
    RRtR = np.empty((3, 3))
    for r in range(3):
        for c in range(3):
            RtR[r, c] = Rs[0, r] * Rs[0, c] + Rs[1, r] * Rs[1, c] + Rs[2, r] * Rs[2, c]
    _matmul3_nb(Rs, RtR, RRtR)
    R_new = np.empty((3, 3))
    for r in range(3):
        for c in range(3):
            R_new[r, c] = 1.5 * Rs[r, c] - 0.5 * RRtR[r, c]
    return x_new, R_new


@njit(cache=True)
def run_nb(x0, R0, t0, dt, nsteps, load_params, J, J_inv, anchors, cab, f0, N,
           lam_params, anchors_eq, feedforward, cable_mode):
    dim = x0.shape[0]
    n = anchors.shape[0]
    X = np.empty((nsteps + 1, dim))
    Rs = np.empty((nsteps + 1, 3, 3))
    tension = np.empty((nsteps + 1, n))
    x_dot = np.empty(dim)
    w_world = np.empty(3)
    tn = np.empty(n)
    x = x0.copy()
    R = R0.copy()
    for k in range(nsteps + 1):
        t = t0 + k * dt
        X[k] = x
        Rs[k] = R
        _rhs_nb(t, x, R, load_params, J, J_inv, anchors, cab, f0, N, lam_params,
                anchors_eq, feedforward, cable_mode, x_dot, w_world, tn)
        tension[k] = tn
        bad = False
        for r in range(dim):
            v = x[r]
            if not np.isfinite(v) or abs(v) > DIVERGE_LIMIT:
                bad = True
        if bad:
            return X[: k + 1], Rs[: k + 1], tension[: k + 1], 1, k
        if k == nsteps:
            break
        x, R = rk4_step_nb(t, x, R, dt, load_params, J, J_inv, anchors, cab, f0,
                           N, lam_params, anchors_eq, feedforward, cable_mode)
    return X, Rs, tension, 0, nsteps


def rhs_nb(t, x, R, load_params, J, J_inv, anchors, cab, f0, N, lam_params,
           anchors_eq, feedforward, cable_mode):
    """Allocating wrapper with the same return signature as :func:`rhs_np`."""
    n = anchors.shape[0]
    x_dot = np.empty_like(x)
    w_world = np.empty(3)
    tension = np.empty(n)
    _rhs_nb(t, x, R, load_params, J, J_inv, anchors, cab, f0, N, lam_params,
            anchors_eq, feedforward, cable_mode, x_dot, w_world, tension)
    return x_dot, w_world, tension
