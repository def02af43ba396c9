"""Independent reference implementations used as test oracles.

Everything here is written directly from the defining formulas with its own
constants; nothing is imported from the package internals so the oracles
stay independent of the code paths they check.
"""

import math

import numpy as np

C_LIGHT = 299792458.0
TWO_PI_C = 2.0 * math.pi * C_LIGHT

# Sellmeier coefficients, typed independently of the package data file.
# BBO: Eimerl et al., J. Appl. Phys. 62, 1968 (1987).
BBO_O = (2.7405, 0.0184, 0.0179, 0.0155)
BBO_E = (2.3730, 0.0128, 0.0156, 0.0044)
# 5% MgO:LiNbO3: Gayer et al., Appl. Phys. B 91, 343 (2008), room temperature.
LN_O = (5.653, 0.1185, 0.2091, 89.61, 10.85, 1.97e-2)
LN_E = (5.756, 0.0983, 0.2020, 189.32, 12.52, 1.32e-2)


def bbo_principal(pol, lam_um):
    c = BBO_O if pol == "o" else BBO_E
    x = lam_um**2
    return math.sqrt(c[0] + c[1] / (x - c[2]) - c[3] * x)


def bbo_extraordinary(theta, lam_um):
    no = bbo_principal("o", lam_um)
    ne = bbo_principal("e", lam_um)
    return 1.0 / math.sqrt(math.cos(theta) ** 2 / no**2 + math.sin(theta) ** 2 / ne**2)


def ln_principal(pol, lam_um):
    c = LN_O if pol == "o" else LN_E
    x = lam_um**2
    return math.sqrt(c[0] + c[1] / (x - c[2] ** 2) + c[3] / (x - c[4] ** 2) - c[5] * x)


def pdc_mismatch(omega_i, omega_s, theta):
    """Type-I BBO phase mismatch from the defining wavevectors."""
    omega_p = omega_i + omega_s
    k_p = bbo_extraordinary(theta, TWO_PI_C / omega_p * 1e6) * omega_p / C_LIGHT
    k_i = bbo_principal("o", TWO_PI_C / omega_i * 1e6) * omega_i / C_LIGHT
    k_s = bbo_principal("o", TWO_PI_C / omega_s * 1e6) * omega_s / C_LIGHT
    return k_p - k_i - k_s


def sfg_mismatch(omega, Omega):
    """Normal-incidence ee->e mismatch in MgO:LiNbO3."""
    def kappa(w):
        return ln_principal("e", TWO_PI_C / w * 1e6) * w / C_LIGHT

    return kappa(Omega) - kappa(omega) - kappa(Omega - omega)


def pump_amplitude(omega, center_nm, duration_fs):
    omega0 = TWO_PI_C / (center_nm * 1e-9)
    sigma = 2.0 * math.sqrt(math.log(2.0)) / (duration_fs * 1e-15)
    return np.exp(-((np.asarray(omega) - omega0) ** 2) / (2.0 * sigma**2))


def jsa_matrix(omegas, length_m, theta, center_nm, duration_fs):
    """Quadrature-scaled, symmetrized, Frobenius-normalized JSA."""
    omegas = np.asarray(omegas, dtype=float)
    n = omegas.size
    out = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            dk = pdc_mismatch(omegas[i], omegas[j], theta)
            x = 0.5 * dk * length_m
            sinc = 1.0 if x == 0.0 else math.sin(x) / x
            fp = float(pump_amplitude(omegas[i] + omegas[j], center_nm, duration_fs))
            out[i, j] = fp * sinc * complex(math.cos(x), math.sin(x))
    out *= (omegas[-1] - omegas[0]) / (n - 1)
    out = 0.5 * (out + out.T)
    return out / np.linalg.norm(out)


def plane_wave_riemann(u, d_eff, beta=1.0, n=100_000):
    """Midpoint Riemann sum of beta * int_0^D exp(-i u z) dz."""
    z = (np.arange(n) + 0.5) * (d_eff / n)
    return beta * np.sum(np.exp(-1j * u * z)) * (d_eff / n)


def focused_riemann(u, d_eff, z0, b, beta=1.0, n=1_000_000):
    """Midpoint Riemann sum of the Gouy-factor kernel integral."""
    z = (np.arange(n) + 0.5) * (d_eff / n)
    f = np.exp(-1j * u * z) / (1.0 + 2j * (z - z0) / b)
    return beta * np.sum(f) * (d_eff / n)


def intermodal_direct(decomp, kernel, index):
    """Loop-based inter-modal integral on the shared lattice."""
    grid = decomp.grid
    n = grid.n_points
    p = int(kernel.sum_grid.p_indices[index])
    m = decomp.modes.shape[1]
    out = np.zeros((m, m), dtype=complex)
    for i in range(max(0, p - n + 1), min(n - 1, p) + 1):
        j = p - i
        w = kernel.values[i, index] * grid.delta
        for a in range(m):
            for bm in range(m):
                out[a, bm] += w * decomp.modes[i, a] * decomp.modes[j, bm]
    return out


def wick_spectrum(decomp, kernel):
    """Fourth-moment SFG photon number from the pair correlators.

    Uses <a^dag a> and <aa> built directly from the mode expansion and the
    three Gaussian-state pairings of <a^dag a^dag a a>; never touches the
    inter-modal integrals.
    """
    grid = decomp.grid
    n = grid.n_points
    modes, s, c = decomp.modes, decomp.s, decomp.c
    number = (modes * s**2) @ modes.conj().T  # [i, j] = <a^dag(j) a(i)>
    anom = (modes * (s * c)) @ modes.T  # [i, j] = <a(i) a(j)>
    out = np.empty(kernel.sum_grid.n_points)
    for k, p in enumerate(kernel.sum_grid.p_indices):
        i0, i1 = max(0, int(p) - n + 1), min(n - 1, int(p))
        total = 0.0 + 0.0j
        for i in range(i0, i1 + 1):
            w1 = (kernel.values[i, k] * grid.delta).conjugate()
            for j in range(i0, i1 + 1):
                w2 = kernel.values[j, k] * grid.delta
                t1 = number[j, i] * number[p - j, p - i]
                t2 = number[p - j, i] * number[j, p - i]
                t3 = anom[i, p - i].conjugate() * anom[j, p - j]
                total += w1 * w2 * (t1 + t2 + t3)
        out[k] = total.real
    return out


def mehler_jsa(mu, n_points=384, span=12.5):
    """Double-Gaussian kernel whose Schmidt weights are (1-mu)*mu^n."""
    rho = math.sqrt(mu)
    x = np.linspace(-span, span, n_points)
    xx, yy = x[:, None], x[None, :]
    f = np.exp(
        -(xx**2 + yy**2) * (1 + rho**2) / (2 * (1 - rho**2))
        + 2 * xx * yy * rho / (1 - rho**2)
    )
    return f / np.linalg.norm(f)
