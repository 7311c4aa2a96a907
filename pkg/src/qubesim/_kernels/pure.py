"""Pure-Python integrator kernel, used when the compiled one is unavailable.

Expression order matches ``_cyfast.pyx`` statement for statement (and the
extension is built with FP contraction off), so both backends produce
bit-identical trajectories.

Parameter order, shared by every function here: rm, kt, km (motor), jr, lr
(arm inertia about pivot, arm length), mp, lp, jp (pendulum mass, length,
inertia about CoM), dr, dp (viscous dampings), g.
"""

from math import cos, isfinite, sin

from ..errors import IntegrationError

NAME = "pure"


def accel(a, td, ad, v, rm, kt, km, jr, lr, mp, lp, jp, dr, dp, g):
    """Joint accelerations (theta_ddot, alpha_ddot), alpha from upright."""
    sin_a = sin(a)
    cos_a = cos(a)
    aq = 0.25 * mp * lp * lp
    bq = 0.5 * mp * lp * lr
    cq = jp + aq
    m11 = jr + mp * lr * lr + aq * sin_a * sin_a
    m12 = -bq * cos_a
    det = m11 * cq - m12 * m12
    if det <= 0.0:
        raise ArithmeticError(f"mass matrix singular (det={det!r})")
    tau = kt * (v - km * td) / rm
    sin_2a = 2.0 * sin_a * cos_a
    f_t = tau - dr * td - aq * sin_2a * td * ad - bq * sin_a * ad * ad
    f_a = -dp * ad + 0.5 * aq * sin_2a * td * td + 0.5 * mp * g * lp * sin_a
    tdd = (cq * f_t - m12 * f_a) / det
    add = (m11 * f_a - m12 * f_t) / det
    return tdd, add


def integrate(t, a, td, ad, v, dt, substeps, rm, kt, km, jr, lr, mp, lp, jp, dr, dp, g):
    """Advance (t, a, td, ad) by dt with classical RK4, voltage held constant."""
    h = dt / substeps
    h2 = 0.5 * h
    h6 = h / 6.0
    for i in range(substeps):
        tdd1, add1 = accel(a, td, ad, v, rm, kt, km, jr, lr, mp, lp, jp, dr, dp, g)
        a2 = a + h2 * ad
        td2 = td + h2 * tdd1
        ad2 = ad + h2 * add1
        tdd2, add2 = accel(a2, td2, ad2, v, rm, kt, km, jr, lr, mp, lp, jp, dr, dp, g)
        a3 = a + h2 * ad2
        td3 = td + h2 * tdd2
        ad3 = ad + h2 * add2
        tdd3, add3 = accel(a3, td3, ad3, v, rm, kt, km, jr, lr, mp, lp, jp, dr, dp, g)
        a4 = a + h * ad3
        td4 = td + h * tdd3
        ad4 = ad + h * add3
        tdd4, add4 = accel(a4, td4, ad4, v, rm, kt, km, jr, lr, mp, lp, jp, dr, dp, g)
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
