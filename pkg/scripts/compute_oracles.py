"""Recompute the frozen regression values used in the tests with mpmath.

Every value is computed from its defining integral or gamma expression at 30
digits, independently of the package code. Run with ``python scripts/compute_oracles.py``;
the printed values are the ones pasted into tests/oracles.py.
"""

import mpmath as mp

mp.mp.dps = 30


def psi(a, b, c):
    # Euler integral of 2F1 at argument -1; also the continuation to a < -1
    r = a + b + 2
    return mp.gamma(a + 1) * mp.gamma(b + 1) / mp.gamma(r) * mp.hyp2f1(-c, a + 1, r, -1)


def map_exponent(z, alpha, rho):
    ar, arh = alpha * rho, alpha * (1 - rho)
    common = mp.gamma(alpha - z) * mp.gamma(1 + z)
    return [
        [-common / (mp.gamma(arh - z) * mp.gamma(1 - arh + z)), common / (mp.gamma(arh) * mp.gamma(1 - arh))],
        [common / (mp.gamma(ar) * mp.gamma(1 - ar)), -common / (mp.gamma(ar - z) * mp.gamma(1 - ar + z))],
    ]


def kappa_inv(lam, alpha, rho):
    ar, arh = alpha * rho, alpha * (1 - rho)
    s = lam - 1
    m = mp.matrix([[psi(s, ar - 1, arh), psi(s, ar, arh - 1)], [psi(s, arh, ar - 1), psi(s, arh - 1, ar)]])
    if alpha > 1:
        w = (alpha - 1) / (lam + alpha - 1)
        top, bottom = psi(s, ar - 1, arh - 1), psi(s, arh - 1, ar - 1)
        m -= w * mp.matrix([[top, top], [bottom, bottom]])
    return m


def gprefactor(alpha, rho):
    ar, arh = alpha * rho, alpha * (1 - rho)
    return mp.gamma(1 - ar) / mp.gamma(arh), mp.gamma(1 - arh) / mp.gamma(ar)


def u_hat_low(x, alpha, rho):
    ar, arh = alpha * rho, alpha * (1 - rho)
    g = gprefactor(alpha, rho)
    em, ep = mp.expm1(x), mp.exp(x) + 1
    return [
        [g[0] * em ** (arh - 1) * ep ** ar, g[0] * em ** arh * ep ** (ar - 1)],
        [g[1] * em ** ar * ep ** (arh - 1), g[1] * em ** (ar - 1) * ep ** arh],
    ]


def phibar(w, p, q):
    return _power_quad(lambda y: (y + 2) ** (q - 1), p, w - 1)


def _power_quad(smooth, e, top):
    """int_0^top y^(e-1) smooth(y) dy through y = s^(1/e), which removes the endpoint power."""
    return mp.quad(lambda s: smooth(s ** (1 / e)), [0, top ** e]) / e


def u11_high(x, alpha, rho):
    ar, arh = alpha * rho, alpha * (1 - rho)
    Y = mp.expm1(x)
    d = Y ** (ar - 1) * (Y + 2) ** arh - (alpha - 1) * _power_quad(lambda y: (y + 2) ** (arh - 1), ar, Y)
    return mp.exp(-(alpha - 1) * x) * d


def closest(z, x, alpha, rho):
    ar, arh = alpha * rho, alpha * (1 - rho)
    c = mp.gamma(1 - ar) / (mp.gamma(arh) * mp.gamma(1 - alpha)) * 2 ** (-alpha)
    if z > 0:
        return c * (x + z) ** ar * (x - z) ** (arh - 1) * abs(z) ** (-alpha)
    return c * (x + z) * (x - abs(z)) ** (arh - 1) * (x + abs(z)) ** (ar - 1) * abs(z) ** (-alpha)


def phi_avoid(x, alpha, rho):
    arh = alpha * (1 - rho)
    ar = alpha * rho
    c = mp.gamma(1 - ar) / (mp.gamma(arh) * mp.gamma(1 - alpha))
    return c * _power_quad(lambda t: (1 - t) ** (-alpha), arh, (x - 1) / (x + 1))


def furthest(z, x, alpha, rho):
    ar, arh = alpha * rho, alpha * (1 - rho)
    az = abs(z)
    br = abs(x + z) * (az - x) ** (ar - 1) * (az + x) ** (arh - 1) - (alpha - 1) * x ** (alpha - 1) * phibar(az / x, ar, arh)
    return (alpha - 1) / (2 * az ** alpha) * br


def laplace_u_hat(lam, alpha, rho):
    ar, arh = alpha * rho, alpha * (1 - rho)
    # power of x at 0 in each entry, removed on [0, 1] by x = s^(1/(e+1))
    expo = [[arh - 1, 0], [0, ar - 1]]
    out = mp.matrix(2, 2)
    for i in range(2):
        for j in range(2):
            f = lambda x: mp.exp(-lam * x) * u_hat_low(x, alpha, rho)[i][j]
            e = expo[i][j] + 1
            head = mp.quad(lambda s: f(s ** (1 / e)) * s ** (1 / e - 1), [0, 1]) / e
            out[i, j] = head + mp.quad(f, [1, 10, mp.inf])
    return out


def show(name, v):
    if isinstance(v, mp.matrix):
        v = [[v[i, j] for j in range(v.cols)] for i in range(v.rows)]
    if isinstance(v, list):
        print(name, "=", [[repr(float(mp.re(e))) if mp.im(e) == 0 else repr(complex(e)) for e in row] for row in v])
    else:
        print(name, "=", repr(float(v)))


if __name__ == "__main__":
    show("PSI_03_M05_05", psi(0.3, -0.5, 0.5))
    show("PSI_0_M03_02", psi(0, -0.3, 0.2))
    show("PSI_HYP_M15_05_03", psi(-1.5, 0.5, 0.3))
    show("F_Z_07_04", map_exponent(mp.mpc(0.3, 0.2), 0.7, 0.4))
    show("KINV_05_05_1", kappa_inv(1, 0.5, 0.5))
    show("KINV_15_05_1", kappa_inv(1, 1.5, 0.5))
    show("KINV_13_04_07", kappa_inv(0.7, 1.3, 0.4))
    show("KHINV_05_05_0_PP", gprefactor(0.5, 0.5)[0] * psi(-0.5, -0.75, 0.25))
    show("KHINV_07_04_1", laplace_u_hat(1, 0.7, 0.4))
    show("K_05_05_2", kappa_inv(2, 0.5, 0.5) ** -1)
    show("U11_15_05_1", u11_high(1, 1.5, 0.5))
    show("UHAT_05_03_07", u_hat_low(0.7, 0.5, 0.3))
    show("PHI_AVOID_07_05_2", phi_avoid(2, 0.7, 0.5))
    show("CLOSEST_05_05_1_05", closest(0.5, 1, 0.5, 0.5))
    show("CLOSEST_06_04_1_M03", closest(-0.3, 1, 0.6, 0.4))
    show("PHIBAR_15_04_3", phibar(3, 0.6, 0.9))
    show("FURTHEST_15_05_1_2", furthest(2, 1, 1.5, 0.5))
    show("FURTHEST_15_04_08_M10", furthest(-10, 0.8, 1.5, 0.4))
    show("STATIONARY_05_05_0", mp.sqrt(2) * mp.sqrt(mp.pi) / mp.gamma(0.25) ** 2)
    show("CAUCHY_EXIT_02_03_05", mp.sqrt(mp.mpf(0.9) / 0.5) * mp.mpf(2.2) ** -0.5 * 0.8 ** -1.5 / (2 * mp.pi))
    show("CAUCHY_JUMP_1", mp.e * (mp.e + 1) ** -0.5 * (mp.e - 1) ** -1.5)
    w = (1 - 0.2 * 0.5) / 0.3
    show("HIT_15_05_02_05", 0.5 * (0.3 / 0.75) ** 0.5 * phibar(w, 0.75, 0.75))
