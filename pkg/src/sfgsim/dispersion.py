"""Refractive-index models and wavevector-mismatch functions.

Sellmeier coefficient sets live in ``data/materials.json``; each set carries
its literature citation and a validity window in um.  Evaluating an index
outside the window raises :class:`~sfgsim.errors.OutOfWindow` rather than
returning an extrapolated number.

Unit conventions used throughout the package:

* vacuum wavelengths in um unless a ``_nm`` suffix says otherwise,
* angular frequencies in rad/s,
* wavevectors in 1/m,
* angles in rad.
"""

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.optimize import brentq

from .errors import NonPositiveFrequency, OutOfWindow

C_LIGHT = 299792458.0  # m/s
TWO_PI_C = 2.0 * math.pi * C_LIGHT  # m * rad/s


def omega_from_wavelength_um(wavelength_um):
    """Angular frequency (rad/s) of a vacuum wavelength in um."""
    return TWO_PI_C / (np.asarray(wavelength_um) * 1e-6)


def wavelength_um_from_omega(omega):
    """Vacuum wavelength (um) of an angular frequency in rad/s."""
    return TWO_PI_C / np.asarray(omega) * 1e6


@dataclass(frozen=True)
class SellmeierSet:
    """One published n^2(lambda) fit; ``form`` selects the polynomial shape."""

    form: str
    coefficients: tuple

    def n_squared(self, wavelength_um):
        x = np.asarray(wavelength_um, dtype=float) ** 2
        c = self.coefficients
        if self.form == "pole1":
            # n^2 = c0 + c1/(x - c2) - c3*x
            return c[0] + c[1] / (x - c[2]) - c[3] * x
        if self.form == "pole2":
            # n^2 = c0 + c1/(x - c2^2) + c3/(x - c4^2) - c5*x
            return c[0] + c[1] / (x - c[2] ** 2) + c[3] / (x - c[4] ** 2) - c[5] * x
        raise ValueError(f"unknown Sellmeier form '{self.form}'")


@dataclass(frozen=True)
class Material:
    """Uniaxial crystal with ordinary/extraordinary Sellmeier sets."""

    name: str
    sellmeier_o: SellmeierSet
    sellmeier_e: SellmeierSet
    transparency_window: tuple  # (min_um, max_um)
    citation: str

    def check_window(self, wavelength_um):
        wl = np.asarray(wavelength_um, dtype=float)
        lo, hi = self.transparency_window
        if np.any(wl < lo) or np.any(wl > hi):
            bad = wl[(wl < lo) | (wl > hi)]
            raise OutOfWindow(self.name, float(np.ravel(bad)[0]), self.transparency_window)


def _load_materials():
    text = resources.files("sfgsim").joinpath("data/materials.json").read_text()
    table = {}
    for name, entry in json.loads(text).items():
        table[name] = Material(
            name=name,
            sellmeier_o=SellmeierSet(
                entry["ordinary"]["form"], tuple(entry["ordinary"]["coefficients"])
            ),
            sellmeier_e=SellmeierSet(
                entry["extraordinary"]["form"], tuple(entry["extraordinary"]["coefficients"])
            ),
            transparency_window=tuple(entry["window_um"]),
            citation=entry["citation"],
        )
    return table


MATERIALS = _load_materials()


def get_material(name):
    try:
        return MATERIALS[name]
    except KeyError:
        raise KeyError(f"unknown material '{name}'; available: {sorted(MATERIALS)}") from None


@dataclass(frozen=True)
class CrystalAxes:
    """Propagation geometry: optic-axis angle and external incidence angle."""

    theta: float  # optic axis w.r.t. propagation direction, rad
    alpha: float = 0.0  # external angle of incidence, rad

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi / 2:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")


def refractive_index(material, polarization, wavelength_um, theta=math.pi / 2):
    """Refractive index of a uniaxial crystal.

    ``polarization`` is ``"ordinary"`` or ``"extraordinary"``; the latter is
    the extraordinary-at-theta index from the uniaxial index ellipse,

        n(theta) = [cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2]^(-1/2),

    which reduces to the principal n_e at theta = pi/2.
    """
    if isinstance(material, str):
        material = get_material(material)
    material.check_window(wavelength_um)
    if polarization in ("ordinary", "o"):
        return np.sqrt(material.sellmeier_o.n_squared(wavelength_um))
    if polarization in ("extraordinary", "e"):
        no2 = material.sellmeier_o.n_squared(wavelength_um)
        ne2 = material.sellmeier_e.n_squared(wavelength_um)
        return 1.0 / np.sqrt(np.cos(theta) ** 2 / no2 + np.sin(theta) ** 2 / ne2)
    raise ValueError(f"polarization must be 'ordinary' or 'extraordinary', got {polarization!r}")


def wavevector(material, polarization, omega, theta=math.pi / 2):
    """Wavevector magnitude n(omega)*omega/c in 1/m."""
    omega = np.asarray(omega, dtype=float)
    wl_um = wavelength_um_from_omega(omega)
    n = refractive_index(material, polarization, wl_um, theta)
    return n * omega / C_LIGHT


def pdc_mismatch(omega_i, omega_s, theta, material="BBO"):
    """Collinear type-I phase mismatch k_p(w_i+w_s) - k_s(w_s) - k_i(w_i).

    Pump is extraordinary-at-theta, signal and idler ordinary.  Symmetric
    under exchange of the two arguments (bitwise: the ordinary wavevectors
    are summed before subtraction).
    """
    omega_i = np.asarray(omega_i, dtype=float)
    omega_s = np.asarray(omega_s, dtype=float)
    if np.any(omega_i <= 0.0) or np.any(omega_s <= 0.0):
        raise NonPositiveFrequency("pdc_mismatch requires positive frequencies")
    k_p = wavevector(material, "e", omega_i + omega_s, theta)
    k_i = wavevector(material, "o", omega_i)
    k_s = wavevector(material, "o", omega_s)
    return k_p - (k_i + k_s)


def internal_angle(alpha, material="LiNbO3_MgO", reference_um=0.8):
    """Internal propagation angle from Snell's law.

    Uses the principal extraordinary index at ``reference_um`` (the
    degenerate sum wavelength for SFG runs).
    """
    if alpha == 0.0:
        return 0.0
    n_ref = float(refractive_index(material, "e", reference_um, math.pi / 2))
    return math.asin(math.sin(alpha) / n_ref)


def resolve_axes(axes, material="LiNbO3_MgO", reference_um=0.8):
    """Map external incidence onto (theta_eff, alpha_internal, path_scale).

    The internal ray is tilted by alpha_internal in the plane containing the
    optic axis, so the axis-to-propagation angle becomes theta - alpha_int,
    and the geometric path through a facet-to-facet length D grows by
    1/cos(alpha_int).
    """
    a_int = internal_angle(axes.alpha, material, reference_um)
    theta_eff = axes.theta - a_int
    return theta_eff, a_int, 1.0 / math.cos(a_int)


def sfg_mismatch(omega, Omega, axes, material="LiNbO3_MgO", snell_reference_um=None):
    """SFG wavevector mismatch kappa(W) - kappa(w) - kappa(W-w), all extraordinary.

    ``axes.theta`` is the optic-axis angle at normal incidence (pi/2 for a
    crystal with its axis parallel to the facet); a nonzero ``axes.alpha``
    tilts the internal ray via Snell's law.  Exactly symmetric under
    w -> W - w because the two input wavevectors are summed first.
    """
    omega = np.asarray(omega, dtype=float)
    Omega = np.asarray(Omega, dtype=float)
    partner = Omega - omega
    if np.any(omega <= 0.0) or np.any(partner <= 0.0):
        raise NonPositiveFrequency("sfg_mismatch requires 0 < omega < Omega")
    if snell_reference_um is None:
        snell_reference_um = 0.8 if axes.alpha == 0.0 else None
        if snell_reference_um is None:
            raise ValueError("snell_reference_um required when alpha != 0")
    theta_eff, _, _ = resolve_axes(axes, material, snell_reference_um)
    k_sum = wavevector(material, "e", Omega, theta_eff)
    k_1 = wavevector(material, "e", omega, theta_eff)
    k_2 = wavevector(material, "e", partner, theta_eff)
    return k_sum - (k_1 + k_2)


def chirp_phase(omega, gdd_fs2, omega0):
    """Quadratic spectral phase 0.5 * GDD * (omega - omega0)^2 in rad.

    ``gdd_fs2`` is the group-delay dispersion in fs^2.
    """
    detuning = np.asarray(omega, dtype=float) - omega0
    return 0.5 * gdd_fs2 * 1e-30 * detuning**2


def degenerate_pm_angle(pump_wavelength_um, material="BBO"):
    """Optic-axis angle for collinear frequency-degenerate type-I phase matching.

    Solves n_e(theta; lambda_p) = n_o(2 lambda_p).
    """
    mat = get_material(material) if isinstance(material, str) else material
    n_target = float(refractive_index(mat, "o", 2.0 * pump_wavelength_um))

    def defect(theta):
        return float(refractive_index(mat, "e", pump_wavelength_um, theta)) - n_target

    lo, hi = 1e-6, math.pi / 2 - 1e-6
    f_lo, f_hi = defect(lo), defect(hi)
    if f_lo * f_hi > 0.0:
        raise ValueError(
            f"no degenerate phase-matching angle for {mat.name} at "
            f"{pump_wavelength_um} um (defects {f_lo:.3g}, {f_hi:.3g})"
        )
    return brentq(defect, lo, hi, xtol=1e-12)
