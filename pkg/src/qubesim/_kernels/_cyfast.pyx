# cython: boundscheck=False, wraparound=False, cdivision=False
"""Compiled integrator kernel. Mirrors pure.py statement for statement;
built with -ffp-contract=off so results stay bit-identical to the fallback."""

from libc.math cimport cos, isfinite, sin

from qubesim.errors import IntegrationError

NAME = "cython"


cdef inline int _accel(double a, double td, double ad, double v,
                       double rm, double kt, double km, double jr, double lr,
                       double mp, double lp, double jp, double dr, double dp,
                       double g, double* tdd, double* add) except -1:
    cdef double sin_a = sin(a)
    cdef double cos_a = cos(a)
    cdef double aq = 0.25 * mp * lp * lp
    cdef double bq = 0.5 * mp * lp * lr
    cdef double cq = jp + aq
    cdef double m11 = jr + mp * lr * lr + aq * sin_a * sin_a
    cdef double m12 = -bq * cos_a
    cdef double det = m11 * cq - m12 * m12
    if det <= 0.0:
        raise ArithmeticError(f"mass matrix singular (det={det!r})")
    cdef double tau = kt * (v - km * td) / rm
    cdef double sin_2a = 2.0 * sin_a * cos_a
    cdef double f_t = tau - dr * td - aq * sin_2a * td * ad - bq * sin_a * ad * ad
    cdef double f_a = -dp * ad + 0.5 * aq * sin_2a * td * td + 0.5 * mp * g * lp * sin_a
    tdd[0] = (cq * f_t - m12 * f_a) / det
    add[0] = (m11 * f_a - m12 * f_t) / det
    return 0


def accel(double a, double td, double ad, double v,
          double rm, double kt, double km, double jr, double lr,
          double mp, double lp, double jp, double dr, double dp, double g):
    """Joint accelerations (theta_ddot, alpha_ddot), alpha from upright."""
    cdef double tdd = 0.0
    cdef double add = 0.0
    _accel(a, td, ad, v, rm, kt, km, jr, lr, mp, lp, jp, dr, dp, g, &tdd, &add)
    return tdd, add


def integrate(double t, double a, double td, double ad, double v,
              double dt, int substeps,
              double rm, double kt, double km, double jr, double lr,
              double mp, double lp, double jp, double dr, double dp, double g):
    """Advance (t, a, td, ad) by dt with classical RK4, voltage held constant."""
    cdef double h = dt / substeps
    cdef double h2 = 0.5 * h
    cdef double h6 = h / 6.0
    cdef double tdd1 = 0.0, add1 = 0.0, tdd2 = 0.0, add2 = 0.0
    cdef double tdd3 = 0.0, add3 = 0.0, tdd4 = 0.0, add4 = 0.0
    cdef double a2, td2, ad2, a3, td3, ad3, a4, td4, ad4
    cdef int i
    for i in range(substeps):
        _accel(a, td, ad, v, rm, kt, km, jr, lr, mp, lp, jp, dr, dp, g, &tdd1, &add1)
        a2 = a + h2 * ad
        td2 = td + h2 * tdd1
        ad2 = ad + h2 * add1
        _accel(a2, td2, ad2, v, rm, kt, km, jr, lr, mp, lp, jp, dr, dp, g, &tdd2, &add2)
        a3 = a + h2 * ad2
        td3 = td + h2 * tdd2
        ad3 = ad + h2 * add2
        _accel(a3, td3, ad3, v, rm, kt, km, jr, lr, mp, lp, jp, dr, dp, g, &tdd3, &add3)
        a4 = a + h * ad3
        td4 = td + h * tdd3
        ad4 = ad + h * add3
        _accel(a4, td4, ad4, v, rm, kt, km, jr, lr, mp, lp, jp, dr, dp, g, &tdd4, &add4)
        t = t + h6 * (td + 2.0 * td2 + 2.0 * td3 + td4)
        a = a + h6 * (ad + 2.0 * ad2 + 2.0 * ad3 + ad4)
        td = td + h6 * (tdd1 + 2.0 * tdd2 + 2.0 * tdd3 + tdd4)
        ad = ad + h6 * (add1 + 2.0 * add2 + 2.0 * add3 + add4)
        if not (isfinite(t) and isfinite(a) and isfinite(td) and isfinite(ad)):
            raise IntegrationError(
                f"state became non-finite at substep {i} (dt={dt}, substeps={substeps})",
                substep=i,
            )
    return t, a, td, ad
