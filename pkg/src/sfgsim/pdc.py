"""Parametric down-conversion: joint spectral amplitude and Schmidt modes.

The two-photon amplitude of collinear type-I PDC from a
transform-limited Gaussian pump is discretized on a uniform angular-frequency
grid, factorized into Schmidt modes (Takagi factorization of the complex
symmetric matrix), and equipped with per-mode parametric gains
G_n = G_1 * sigma_n / sigma_1, S_n = sinh(G_n), C_n = cosh(G_n).

Mode vectors are stored as unit vectors (sum_i |phi_n,i|^2 = 1); the grid
step is carried explicitly by integral operations downstream.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from . import dispersion
from .errors import AllModesVacuum, ConvergenceFailure, NotSymmetric


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform angular-frequency grid omega_min ... omega_max, rad/s."""

    n_points: int
    omega_min: float
    omega_max: float

    def __post_init__(self):
        if self.n_points < 8:
            raise ValueError(f"n_points must be >= 8, got {self.n_points}")
        if not 0.0 < self.omega_min < self.omega_max:
            raise ValueError("need 0 < omega_min < omega_max")

    @classmethod
    def from_wavelength_bounds_nm(cls, n_points, lambda_min_nm, lambda_max_nm):
        """Grid covering [lambda_min, lambda_max]; omega_max maps to lambda_min."""
        w_min = dispersion.TWO_PI_C / (lambda_max_nm * 1e-9)
        w_max = dispersion.TWO_PI_C / (lambda_min_nm * 1e-9)
        return cls(n_points, w_min, w_max)

    @property
    def delta(self):
        return (self.omega_max - self.omega_min) / (self.n_points - 1)

    @property
    def omegas(self):
        return np.linspace(self.omega_min, self.omega_max, self.n_points)

    @property
    def wavelengths_nm(self):
        return dispersion.TWO_PI_C / self.omegas * 1e9

    def same_as(self, other):
        return (
            self.n_points == other.n_points
            and self.omega_min == other.omega_min
            and self.omega_max == other.omega_max
        )


@dataclass(frozen=True)
class PumpPulse:
    """Transform-limited Gaussian pump pulse (zero spectral phase)."""

    central_wavelength_nm: float
    fwhm_duration_fs: float

    def __post_init__(self):
        if self.fwhm_duration_fs <= 0.0:
            raise ValueError("pulse duration must be positive")

    @property
    def omega0(self):
        return dispersion.TWO_PI_C / (self.central_wavelength_nm * 1e-9)

    @property
    def sigma_amplitude(self):
        """Std of the spectral amplitude Gaussian, rad/s."""
        # intensity FWHM (rad/s) = 4 ln2 / T for a transform-limited Gaussian
        return 2.0 * math.sqrt(math.log(2.0)) / (self.fwhm_duration_fs * 1e-15)

    @property
    def spectral_fwhm_omega(self):
        """FWHM of the spectral intensity in rad/s."""
        return 4.0 * math.log(2.0) / (self.fwhm_duration_fs * 1e-15)


def pump_amplitude(pulse, omega):
    """Pump spectral amplitude, unit peak, zero phase."""
    detuning = np.asarray(omega, dtype=float) - pulse.omega0
    return np.exp(-(detuning**2) / (2.0 * pulse.sigma_amplitude**2))


@dataclass(frozen=True, eq=False)
class JointSpectralAmplitude:
    """Quadrature-scaled, Frobenius-normalized discretization of the JSA."""

    grid: FrequencyGrid
    values: np.ndarray  # complex, (n, n), exactly symmetric


def _sinc(x):
    # sin(x)/x with sinc(0) = 1; np.sinc is the normalized variant
    return np.sinc(np.asarray(x) / np.pi)


def build_jsa(grid, pulse, crystal_length_mm, theta, material="BBO"):
    """Discretize f_p(w_i+w_s) * sinc(dk L/2) * exp(i dk L/2) on the grid.

    The matrix is scaled by the grid step, exactly symmetrized and
    normalized to unit Frobenius norm.
    """
    length = crystal_length_mm * 1e-3
    w = grid.omegas
    sum_matrix = w[:, None] + w[None, :]
    dk = dispersion.pdc_mismatch(w[:, None], w[None, :], theta, material)
    phase_arg = 0.5 * dk * length
    values = pump_amplitude(pulse, sum_matrix) * _sinc(phase_arg) * np.exp(1j * phase_arg)
    values *= grid.delta
    values = 0.5 * (values + values.T)  # bitwise symmetric
    norm = np.linalg.norm(values)
    if norm == 0.0:
        raise ValueError("JSA is identically zero on this grid")
    values /= norm
    return JointSpectralAmplitude(grid=grid, values=values)


def takagi_factorize(matrix, symmetry_tol=1e-12, cluster_rel_gap=1e-5, check_tol=1e-10):
    """Takagi factorization F = U diag(sigma) U^T of a complex symmetric matrix.

    SVD-based: per-singular-value phase correction, with a secondary
    symmetric square-root correction on clusters of singular values whose
    local relative gap is below ``cluster_rel_gap``.  The cluster threshold
    must stay well above eps/check_tol: within a near-degenerate pair the
    two SVD factors pick independently perturbed bases (mismatch ~ eps/gap),
    and only the cluster correction cancels that.  Returns (U, sigma) with
    sigma sorted descending.  Raises NotSymmetric on asymmetric input and
    ConvergenceFailure if the reconstruction residual or the unitarity
    defect of U exceeds ``check_tol``.
    """
    F = np.asarray(matrix, dtype=complex)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {F.shape}")
    scale = np.max(np.abs(F)) if F.size else 0.0
    asym = np.max(np.abs(F - F.T)) if F.size else 0.0
    if asym > symmetry_tol * max(scale, 1.0):
        raise NotSymmetric(f"symmetry defect {asym:.3e} exceeds tolerance")

    n = F.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=complex), np.zeros(0)
    if scale == 0.0:
        return np.eye(n, dtype=complex), np.zeros(n)

    v, sigma, wh = np.linalg.svd(F)
    w = wh.conj().T  # F = v @ diag(sigma) @ w.conj().T

    # cluster consecutive singular values whose local relative gap is below
    # cluster_rel_gap; values below 1e-14*sigma_1 form one null cluster
    null_floor = 1e-14 * sigma[0]
    clusters = []
    start = 0
    for k in range(1, n):
        both_null = sigma[k - 1] <= null_floor
        gap_small = sigma[k - 1] - sigma[k] < cluster_rel_gap * sigma[k - 1]
        if not (both_null or gap_small):
            clusters.append(slice(start, k))
            start = k
    clusters.append(slice(start, n))

    q_blocks = []
    for cl in clusters:
        if sigma[cl][0] <= null_floor:
            # null space: any unitary works for reconstruction; keep identity
            q_blocks.append(np.eye(cl.stop - cl.start, dtype=complex))
            continue
        z = v[:, cl].T @ w[:, cl]
        if cl.stop - cl.start == 1:
            zz = complex(z[0, 0])
            q_blocks.append(np.array([[np.sqrt(zz / abs(zz))]], dtype=complex))
            continue
        # secondary correction: principal square root of the (symmetric,
        # unitary) cluster block, re-unitarized through its polar factor
        z = 0.5 * (z + z.T)
        q = scipy.linalg.sqrtm(z)
        uq, _, vhq = np.linalg.svd(q)
        q_blocks.append(uq @ vhq)
    q = scipy.linalg.block_diag(*q_blocks)
    u = v @ q.conj()

    recon = (u * sigma[None, :]) @ u.T
    residual = np.linalg.norm(recon - F) / np.linalg.norm(F)
    unitarity = np.max(np.abs(u.conj().T @ u - np.eye(n)))
    if residual > check_tol or unitarity > check_tol:
        raise ConvergenceFailure(
            f"Takagi verification failed: residual {residual:.3e}, "
            f"unitarity defect {unitarity:.3e} (tolerance {check_tol:.1e})"
        )
    return u, sigma


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """Schmidt modes with eigenvalues and per-mode parametric gains.

    ``modes[:, n]`` is the nth mode as a unit vector on ``grid``;
    ``eigenvalue_sum_total`` records sum(lambda) before truncation.
    """

    grid: FrequencyGrid
    modes: np.ndarray  # complex, (n_points, n_modes)
    eigenvalues: np.ndarray  # descending, truncated
    gains: np.ndarray  # G_n
    s: np.ndarray  # sinh(G_n)
    c: np.ndarray  # cosh(G_n)
    eigenvalue_sum_total: float

    @property
    def truncation_count(self):
        return self.modes.shape[1]


def schmidt_decompose(jsa, gamma1, eps_rel=1e-4, max_modes=128):
    """Takagi-factorize a JSA and attach per-mode gains.

    Retains modes with lambda_n >= eps_rel * lambda_1, at most ``max_modes``.
    ``gamma1`` is the parametric gain of the first Schmidt mode.
    """
    u, sigma = takagi_factorize(jsa.values)
    return decomposition_from_takagi(jsa.grid, u, sigma, gamma1, eps_rel, max_modes)


def decomposition_from_takagi(grid, u, sigma, gamma1, eps_rel=1e-4, max_modes=128):
    """Attach gains to an existing Takagi factorization.

    Lets a gain sweep reuse one factorization: the mode set depends only on
    the JSA, the gains only rescale with gamma1.
    """
    if gamma1 < 0.0:
        raise ValueError("gamma1 must be nonnegative")
    lam = sigma**2
    total = float(lam.sum())
    if sigma[0] == 0.0:
        raise ValueError("JSA has no nonzero singular values")
    keep = int(np.searchsorted(-lam, -eps_rel * lam[0], side="right"))
    keep = max(1, min(keep, max_modes, lam.size))
    gains = gamma1 * sigma[:keep] / sigma[0]
    return SchmidtDecomposition(
        grid=grid,
        modes=u[:, :keep],
        eigenvalues=lam[:keep],
        gains=gains,
        s=np.sinh(gains),
        c=np.cosh(gains),
        eigenvalue_sum_total=total,
    )


def pdc_spectrum(decomp):
    """Photon-number spectral density sum_n S_n^2 |phi_n(w)|^2 (arb. units)."""
    return (np.abs(decomp.modes) ** 2) @ (decomp.s**2)


def schmidt_number(decomp):
    """Effective mode number K = [sum_n (S_n^2 / sum_m S_m^2)^2]^-1."""
    weights = decomp.s**2
    total = weights.sum()
    if total == 0.0:
        raise AllModesVacuum("all retained modes have zero gain")
    return float(total**2 / np.sum(weights**2))


def with_modes(decomp, modes):
    """Copy of a decomposition with replaced mode vectors."""
    return replace(decomp, modes=modes)


def export_decomposition(decomp, path):
    """Text dump: eigenvalues, gains, then mode vectors as re/im columns."""
    g = decomp.grid
    m = decomp.truncation_count
    with open(path, "w") as fh:
        fh.write("# schmidt decomposition export\n")
        fh.write(f"# n_points={g.n_points} omega_min={g.omega_min!r} omega_max={g.omega_max!r}\n")
        fh.write(f"# n_modes={m} eigenvalue_sum_total={decomp.eigenvalue_sum_total!r}\n")
        fh.write("# lambda: " + " ".join(repr(x) for x in decomp.eigenvalues) + "\n")
        fh.write("# gamma: " + " ".join(repr(x) for x in decomp.gains) + "\n")
        fh.write("# columns: omega_rad_s" + "".join(f" re_phi{n} im_phi{n}" for n in range(m)) + "\n")
        for i, w in enumerate(g.omegas):
            row = [repr(w)]
            for nmode in range(m):
                z = decomp.modes[i, nmode]
                row.append(repr(z.real))
                row.append(repr(z.imag))
            fh.write(" ".join(row) + "\n")
