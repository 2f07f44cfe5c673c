# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) kernel for parametric feedback models.

Arithmetic twin of ``hpaxis._kernel_py``: same tableau, same controller, same
acceptance rules, specialized to hill/constant feedbacks so the whole step
loop runs in C.  Feedback kind codes: 0 = constant, 1 = hill.
"""

from libc.math cimport exp, fabs, fmax, fmin, isfinite, log, pow, sqrt

import numpy as np

from .errors import StepSizeUnderflow

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double A71 = 35.0 / 384.0, A73 = 500.0 / 1113.0, A74 = 125.0 / 192.0
cdef double A75 = -2187.0 / 6784.0, A76 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0
cdef double D1 = -12715105075.0 / 11282082432.0
cdef double D3 = 87487479700.0 / 32700410799.0
cdef double D4 = -10690763975.0 / 1880347072.0
cdef double D5 = 701980252875.0 / 199316789632.0
cdef double D6 = -1453857185.0 / 822651844.0
cdef double D7 = 69997945.0 / 29380423.0

cdef double SAFETY = 0.9
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 10.0
cdef double ORDER_EXP = 0.2


cdef struct Params:
    double b1, b2, b3, g1, g2
    int f1_kind
    double f1_K, f1_beta, f1_n, f1_c
    int f2_kind
    double f2_K, f2_beta, f2_n, f2_c


cdef inline double _fb(int kind, double K, double beta, double n, double c, double T) noexcept nogil:
    cdef double log_u
    if kind == 0:
        return c
    if T <= 0.0:
        return K
    log_u = log(beta) + n * log(T)
    if log_u > 700.0:
        return K * exp(-log_u)
    return K / (1.0 + exp(log_u))


cdef inline void _rhs(Params* p, double* y, double* out) noexcept nogil:
    cdef double T = y[2] if y[2] > 0.0 else 0.0
    out[0] = -p.b1 * y[0] + _fb(p.f1_kind, p.f1_K, p.f1_beta, p.f1_n, p.f1_c, T)
    out[1] = p.g1 * y[0] - p.b2 * y[1] + _fb(p.f2_kind, p.f2_K, p.f2_beta, p.f2_n, p.f2_c, T)
    out[2] = p.g2 * y[1] - p.b3 * y[2]


cdef inline double _rms3(double v0, double v1, double v2) noexcept nogil:
    return sqrt((v0 * v0 + v1 * v1 + v2 * v2) / 3.0)


def integrate_model(
    double b1, double b2, double b3, double g1, double g2,
    int f1_kind, double f1_K, double f1_beta, double f1_n, double f1_c,
    int f2_kind, double f2_K, double f2_beta, double f2_n, double f2_c,
    double[::1] x0, double t_end, double rtol, double atol,
    double max_step, double[::1] t_grid,
):
    """Mirror of ``_kernel_py.integrate_adaptive`` for parametric models."""
    cdef Params p
    p.b1, p.b2, p.b3, p.g1, p.g2 = b1, b2, b3, g1, g2
    p.f1_kind, p.f1_K, p.f1_beta, p.f1_n, p.f1_c = f1_kind, f1_K, f1_beta, f1_n, f1_c
    p.f2_kind, p.f2_K, p.f2_beta, p.f2_n, p.f2_c = f2_kind, f2_K, f2_beta, f2_n, f2_c

    cdef double y[3]
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double k5[3]
    cdef double k6[3]
    cdef double k7[3]
    cdef double ytmp[3]
    cdef double y1[3]
    cdef double ydiff[3]
    cdef double bspl[3]
    cdef double rcont4[3]
    cdef double rcont5[3]
    cdef double t = 0.0, h, t_new, err, fac, theta, theta1, sc, q0, q1, q2
    cdef double d0, d1, d2, h0, h1, dmax
    cdef int i, bad, is_last
    cdef bint last_rejected = False
    cdef Py_ssize_t gi = 0, ng = t_grid.shape[0]
    cdef long n_accepted = 0, n_rejected = 0

    for i in range(3):
        y[i] = x0[i]
    _rhs(&p, y, k1)

    # initial step size: same heuristic as the Python twin
    d0 = _rms3(y[0] / (atol + rtol * fabs(y[0])),
               y[1] / (atol + rtol * fabs(y[1])),
               y[2] / (atol + rtol * fabs(y[2])))
    d1 = _rms3(k1[0] / (atol + rtol * fabs(y[0])),
               k1[1] / (atol + rtol * fabs(y[1])),
               k1[2] / (atol + rtol * fabs(y[2])))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * (d0 / d1)
    h0 = fmin(fmin(h0, t_end), max_step)
    for i in range(3):
        ytmp[i] = y[i] + h0 * k1[i]
    _rhs(&p, ytmp, k7)
    d2 = _rms3((k7[0] - k1[0]) / (atol + rtol * fabs(y[0])),
               (k7[1] - k1[1]) / (atol + rtol * fabs(y[1])),
               (k7[2] - k1[2]) / (atol + rtol * fabs(y[2]))) / h0
    dmax = fmax(d1, d2)
    if dmax <= 1e-15:
        h1 = fmax(1e-6, h0 * 1e-3)
    else:
        h1 = pow(0.01 / dmax, ORDER_EXP)
    h = fmin(fmin(100.0 * h0, h1), fmin(max_step, t_end))

    t_steps = [0.0]
    y_steps = [(y[0], y[1], y[2])]
    t_dense = []
    y_dense = []
    while gi < ng and t_grid[gi] <= 0.0:
        gi += 1

    while t < t_end:
        # stretch near-final steps onto t_end so no micro-gap is left behind
        h = fmin(h, max_step)
        if 1.01 * h >= t_end - t:
            h = t_end - t
            is_last = 1
        else:
            is_last = 0
        if h <= 1e-14 * fmax(1.0, t) or t + h == t:
            raise StepSizeUnderflow(f"step size {h} unusable at t={t} (accepted {n_accepted})")

        for i in range(3):
            ytmp[i] = y[i] + h * (A21 * k1[i])
        _rhs(&p, ytmp, k2)
        for i in range(3):
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        _rhs(&p, ytmp, k3)
        for i in range(3):
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        _rhs(&p, ytmp, k4)
        for i in range(3):
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        _rhs(&p, ytmp, k5)
        for i in range(3):
            ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        _rhs(&p, ytmp, k6)
        for i in range(3):
            y1[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])

        bad = 0
        for i in range(3):
            if not isfinite(y1[i]) or y1[i] < -atol:
                bad = 1
        if bad:
            n_rejected += 1
            last_rejected = True
            h *= 0.5
            continue

        _rhs(&p, y1, k7)
        sc = atol + rtol * fmax(fabs(y[0]), fabs(y1[0]))
        q0 = h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0]) / sc
        sc = atol + rtol * fmax(fabs(y[1]), fabs(y1[1]))
        q1 = h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1]) / sc
        sc = atol + rtol * fmax(fabs(y[2]), fabs(y1[2]))
        q2 = h * (E1 * k1[2] + E3 * k3[2] + E4 * k4[2] + E5 * k5[2] + E6 * k6[2] + E7 * k7[2]) / sc
        err = _rms3(q0, q1, q2)

        if err > 1.0:
            n_rejected += 1
            last_rejected = True
            h *= fmax(FAC_MIN, SAFETY * pow(err, -ORDER_EXP))
            continue

        t_new = t_end if is_last else t + h
        if gi < ng and t_grid[gi] <= t_new:
            for i in range(3):
                ydiff[i] = y1[i] - y[i]
                bspl[i] = h * k1[i] - ydiff[i]
                rcont4[i] = ydiff[i] - h * k7[i] - bspl[i]
                rcont5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
            while gi < ng and t_grid[gi] <= t_new:
                theta = (t_grid[gi] - t) / h
                theta1 = 1.0 - theta
                t_dense.append(t_grid[gi])
                y_dense.append((
                    y[0] + theta * (ydiff[0] + theta1 * (bspl[0] + theta * (rcont4[0] + theta1 * rcont5[0]))),
                    y[1] + theta * (ydiff[1] + theta1 * (bspl[1] + theta * (rcont4[1] + theta1 * rcont5[1]))),
                    y[2] + theta * (ydiff[2] + theta1 * (bspl[2] + theta * (rcont4[2] + theta1 * rcont5[2]))),
                ))
                gi += 1

        t = t_new
        for i in range(3):
            y[i] = y1[i]
            k1[i] = k7[i]
        n_accepted += 1
        t_steps.append(t)
        y_steps.append((y[0], y[1], y[2]))

        if err == 0.0:
            fac = FAC_MAX
        else:
            fac = fmin(FAC_MAX, fmax(FAC_MIN, SAFETY * pow(err, -ORDER_EXP)))
        if last_rejected:
            fac = fmin(fac, 1.0)
        h *= fac
        last_rejected = False

    t_dense_arr = np.array(t_dense) if t_dense else np.empty(0)
    y_dense_arr = np.array(y_dense) if y_dense else np.empty((0, 3))
    return (
        np.array(t_steps),
        np.array(y_steps),
        t_dense_arr,
        y_dense_arr,
        int(n_accepted),
        int(n_rejected),
    )
