"""Scalar observables of computed spectra: widths, width ratio, fringe period."""

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import ComponentEmpty, NoCrossing, TooFewFringes

# prominence threshold (fraction of the in-band maximum) separating real
# dispersion fringes (order-unity modulation) from facet-focus ripple (<1%)
_FRINGE_PROMINENCE = 0.02
_SMOOTH_POINTS = 3


def fwhm(samples, axis):
    """Full width at half maximum via the outermost half-max crossings.

    The width is measured between the outermost points where the signal
    crosses half of its global maximum: the crossing to the left of the
    first sample >= half-max and to the right of the last one, each located
    by linear interpolation.  Raises NoCrossing when the signal does not
    drop below half maximum inside the window on both sides.
    """
    y = np.asarray(samples, dtype=float)
    x = np.asarray(axis, dtype=float)
    if y.shape != x.shape or y.ndim != 1 or y.size < 3:
        raise ValueError("samples and axis must be equal-length 1-d arrays")
    dx = np.diff(x)
    if np.all(dx < 0.0):
        x, y = x[::-1], y[::-1]
    elif not np.all(dx > 0.0):
        raise ValueError("axis must be strictly monotone")

    top = float(y.max())
    if top <= 0.0:
        raise NoCrossing("signal has no positive maximum")
    half = 0.5 * top
    above = np.flatnonzero(y >= half)
    lo, hi = above[0], above[-1]
    if lo == 0 or hi == y.size - 1:
        raise NoCrossing("signal never falls to half maximum inside the window")

    x_lo = x[lo - 1] + (half - y[lo - 1]) * (x[lo] - x[lo - 1]) / (y[lo] - y[lo - 1])
    x_hi = x[hi] + (half - y[hi]) * (x[hi + 1] - x[hi]) / (y[hi + 1] - y[hi])
    return x_hi - x_lo


@dataclass(frozen=True)
class WidthReport:
    """FWHM of the coherent peak and the incoherent pedestal, plus the ratio."""

    fwhm_coherent_omega: float  # rad/s
    fwhm_incoherent_omega: float  # rad/s
    fwhm_coherent_nm: float
    fwhm_incoherent_nm: float
    ratio: float  # incoherent / coherent, measured in angular frequency

    def as_dict(self):
        return {
            "fwhm_coherent_rad_s": self.fwhm_coherent_omega,
            "fwhm_incoherent_rad_s": self.fwhm_incoherent_omega,
            "fwhm_coherent_nm": self.fwhm_coherent_nm,
            "fwhm_incoherent_nm": self.fwhm_incoherent_nm,
            "width_ratio": self.ratio,
        }


def width_ratio(spectrum, coherent_spectrum=None):
    """Width report of an SFG spectrum, components measured separately.

    The coherent width may come from a second, finer-sampled spectrum of the
    same configuration (``coherent_spectrum``); the ratio is computed in
    angular frequency.
    """
    coh_src = coherent_spectrum if coherent_spectrum is not None else spectrum
    if float(np.max(coh_src.coherent, initial=0.0)) <= 0.0:
        raise ComponentEmpty("coherent component is identically zero")
    if float(np.max(spectrum.incoherent, initial=0.0)) <= 0.0:
        raise ComponentEmpty("incoherent component is identically zero")
    w_coh = fwhm(coh_src.coherent, coh_src.sum_grid.omegas)
    w_inc = fwhm(spectrum.incoherent, spectrum.sum_grid.omegas)
    nm_coh = fwhm(coh_src.coherent, coh_src.sum_grid.wavelengths_nm)
    nm_inc = fwhm(spectrum.incoherent, spectrum.sum_grid.wavelengths_nm)
    return WidthReport(
        fwhm_coherent_omega=w_coh,
        fwhm_incoherent_omega=w_inc,
        fwhm_coherent_nm=nm_coh,
        fwhm_incoherent_nm=nm_inc,
        ratio=w_inc / w_coh,
    )


def fringe_period(spectrum, band_nm):
    """Mean wavelength spacing of adjacent fringe maxima inside a band.

    The total spectrum is smoothed with a fixed 3-point moving average;
    maxima must stand out by at least 2% of the in-band maximum (facet-focus
    ripple stays far below that).  Raises TooFewFringes with fewer than
    three maxima.
    """
    lam = spectrum.sum_grid.wavelengths_nm
    y = spectrum.total
    order = np.argsort(lam)
    lam, y = lam[order], y[order]
    lo, hi = min(band_nm), max(band_nm)
    sel = (lam >= lo) & (lam <= hi)
    if np.count_nonzero(sel) < 2 * _SMOOTH_POINTS + 3:
        raise TooFewFringes(f"band [{lo}, {hi}] nm has too few samples")
    lam, y = lam[sel], y[sel]
    kernel = np.full(_SMOOTH_POINTS, 1.0 / _SMOOTH_POINTS)
    smooth = np.convolve(y, kernel, mode="same")
    top = float(smooth.max())
    if top <= 0.0:
        raise TooFewFringes("band carries no signal")
    peaks, _ = find_peaks(smooth, prominence=_FRINGE_PROMINENCE * top)
    if peaks.size < 3:
        raise TooFewFringes(f"found {peaks.size} fringe maxima, need >= 3")
    return float(np.mean(np.diff(lam[peaks])))
