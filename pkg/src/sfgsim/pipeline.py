"""Named experiment runners: single spectra, parameter sweeps, exports.

The pipeline is pdc -> chirp -> kernel -> spectrum -> analysis.  Width
analysis runs on an adaptively refined grid: the coherent peak is only a
pump-width wide, so its sampling requirement (a fixed number of lattice
points per expected peak width) sets the pump-grid step, while the span is
narrowed to the region that actually carries PDC light (validated through
the mode mass near the grid edges, with fallback to the configured span).

All output files are plain columnar text with '#'-prefixed header lines;
floats are emitted with repr so identical runs are bitwise identical.
"""

import concurrent.futures
import json
import math
import os
from dataclasses import replace

import numpy as np

from . import analysis as ana
from . import dispersion, pdc, sfg
from .config import RunConfig
from .errors import ComponentEmpty, NoCrossing, SfgSimError, TooFewFringes

_EDGE_MASS_LIMIT = 1e-6
_EDGE_PIXELS = 3
_MAX_ANALYSIS_POINTS = 6000


# ---------------------------------------------------------------------------
# cached pipeline stages

def _decomp_key(cfg, grid, duration_fs):
    return (
        grid.n_points, grid.omega_min, grid.omega_max,
        cfg.pump_wavelength_nm, duration_fs, cfg.pdc_length_mm, cfg.theta_rad,
        cfg.gamma1, cfg.truncation_eps_rel, cfg.truncation_max_modes,
        cfg.gdd_fs2, cfg.pdc_material,
    )


def _kernel_key(geometry, grid, sum_grid, kind):
    p = sum_grid.p_indices
    return (
        grid.n_points, grid.omega_min, grid.omega_max,
        int(p[0]), int(p[-1]), int(p.size),
        geometry.length, geometry.confocal, geometry.waist_position,
        geometry.alpha, geometry.beta_const, geometry.omega_degenerate,
        geometry.material, kind,
    )


def decomposition_for(cfg, grid=None, duration_fs=None, cache=None):
    """Chirped Schmidt decomposition for a config (optionally overridden)."""
    grid = grid if grid is not None else cfg.grid
    duration = duration_fs if duration_fs is not None else cfg.pump_duration_fs
    key = _decomp_key(cfg, grid, duration)
    if cache is not None and key in cache:
        return cache[key]
    pulse = pdc.PumpPulse(cfg.pump_wavelength_nm, duration)
    jsa = pdc.build_jsa(grid, pulse, cfg.pdc_length_mm, cfg.theta_rad, cfg.pdc_material)
    decomp = pdc.schmidt_decompose(
        jsa, cfg.gamma1, eps_rel=cfg.truncation_eps_rel, max_modes=cfg.truncation_max_modes
    )
    decomp = sfg.apply_chirp(decomp, cfg.gdd_fs2, cfg.omega_degenerate)
    if cache is not None:
        cache[key] = decomp
    return decomp


def kernel_for(geometry, grid, sum_grid, kind, cache=None):
    key = _kernel_key(geometry, grid, sum_grid, kind)
    if cache is not None and key in cache:
        return cache[key]
    kernel = sfg.build_kernel(grid, sum_grid, geometry, kind=kind)
    if cache is not None:
        cache[key] = kernel
    return kernel


def assemble_spectrum(decomp, kernel, correction):
    spectrum = sfg.sfg_spectrum(decomp, kernel)
    return sfg.detection_correction(spectrum, enable=correction)


def edge_mass(decomp, pixels=_EDGE_PIXELS):
    """Largest per-mode probability mass within ``pixels`` of either grid edge."""
    density = np.abs(decomp.modes) ** 2
    return float(np.max(density[:pixels, :].sum(axis=0) + density[-pixels:, :].sum(axis=0)))


# ---------------------------------------------------------------------------
# adaptive analysis grid

def _support_band(cfg, coarse_decomp, threshold=1e-3, pad=0.25):
    """Angular-frequency band that carries the PDC light, padded."""
    spectrum = pdc.pdc_spectrum(coarse_decomp)
    grid = coarse_decomp.grid
    idx = np.flatnonzero(spectrum >= threshold * spectrum.max())
    w = grid.omegas
    lo, hi = w[idx[0]], w[idx[-1]]
    width = hi - lo
    lo = max(grid.omega_min, lo - pad * width)
    hi = min(grid.omega_max, hi + pad * width)
    return lo, hi


def analysis_grid(cfg, coarse_decomp, duration_fs=None):
    """Refined pump grid for width/fringe analysis.

    The step resolves the expected coherent-peak width (one pump spectral
    FWHM) with ``analysis.peak_oversampling`` lattice points and the
    configured fringe sampling; the span is the PDC support band unless the
    retained modes leak more than 1e-6 of their mass into the edge pixels,
    in which case the full configured span is kept.
    """
    duration = duration_fs if duration_fs is not None else cfg.pump_duration_fs
    pulse = pdc.PumpPulse(cfg.pump_wavelength_nm, duration)
    target = pulse.spectral_fwhm_omega / cfg.analysis["peak_oversampling"]

    sampling_nm = cfg.analysis["fringe_sampling_nm"]
    if sampling_nm is None:
        sampling_nm = 0.2 / cfg.sfg_length_mm
    lam_sum_m = 2.0 * math.pi * dispersion.C_LIGHT / (2.0 * cfg.omega_degenerate)
    fringe_target = dispersion.TWO_PI_C * sampling_nm * 1e-9 / lam_sum_m**2
    target = min(target, fringe_target)

    lo, hi = _support_band(cfg, coarse_decomp)
    n = int(math.ceil((hi - lo) / target)) + 1
    n = max(n, 512)
    if n > _MAX_ANALYSIS_POINTS:
        n = _MAX_ANALYSIS_POINTS
    grid = pdc.FrequencyGrid(n, lo, hi)

    fine = decomposition_for(cfg, grid=grid, duration_fs=duration)
    if edge_mass(fine) > _EDGE_MASS_LIMIT:
        span_lo, span_hi = cfg.grid.omega_min, cfg.grid.omega_max
        n = min(int(math.ceil((span_hi - span_lo) / target)) + 1, _MAX_ANALYSIS_POINTS)
        grid = pdc.FrequencyGrid(max(n, cfg.grid.n_points), span_lo, span_hi)
        fine = decomposition_for(cfg, grid=grid, duration_fs=duration)
    return fine


def _band_about_peak(cfg, halfwidth_omega, stride, grid):
    """Sum-grid band centered on the degenerate sum frequency."""
    center = 2.0 * cfg.omega_degenerate
    lam_lo = dispersion.TWO_PI_C / (center + halfwidth_omega) * 1e9
    lam_hi = dispersion.TWO_PI_C / (center - halfwidth_omega) * 1e9
    return sfg.SumGrid.band_nm(grid, lam_lo, lam_hi, stride=stride)


def width_analysis(cfg, fine_decomp, duration_fs=None, cache=None):
    """Coherent/incoherent widths, ratio and Schmidt number on a fine grid.

    Returns (report_dict, peak_spectrum, pedestal_spectrum).
    """
    duration = duration_fs if duration_fs is not None else cfg.pump_duration_fs
    pulse = pdc.PumpPulse(cfg.pump_wavelength_nm, duration)
    grid = fine_decomp.grid
    geometry = cfg.geometry
    kind = cfg.kernel_kind

    pump_w = pulse.spectral_fwhm_omega
    peak_grid = _band_about_peak(cfg, 6.0 * pump_w, 1, grid)
    peak_kernel = kernel_for(geometry, grid, peak_grid, kind, cache)
    peak_spectrum = assemble_spectrum(fine_decomp, peak_kernel, cfg.correction)

    pdc_fwhm = ana.fwhm(pdc.pdc_spectrum(fine_decomp), grid.omegas)
    halfwidth = 2.0 * math.sqrt(2.0) * pdc_fwhm
    pedestal_spectrum = None
    for attempt in range(3):
        stride = max(1, int(halfwidth / 120.0 / grid.delta))
        pedestal_grid = _band_about_peak(cfg, halfwidth, stride, grid)
        pedestal_kernel = kernel_for(geometry, grid, pedestal_grid, kind, cache)
        pedestal_spectrum = assemble_spectrum(fine_decomp, pedestal_kernel, cfg.correction)
        try:
            report = ana.width_ratio(pedestal_spectrum, coherent_spectrum=peak_spectrum)
            break
        except NoCrossing:
            if attempt == 2:
                raise
            halfwidth *= 2.0

    out = report.as_dict()
    out["schmidt_number"] = pdc.schmidt_number(fine_decomp)
    out["pump_spectral_fwhm_rad_s"] = pump_w
    out["analysis_grid_points"] = grid.n_points
    return out, peak_spectrum, pedestal_spectrum


def fringe_analysis(cfg, fine_decomp, cache=None):
    """Fringe-band spectrum and fringe period (None when there are no fringes)."""
    band = cfg.analysis["fringe_band_nm"]
    grid = fine_decomp.grid
    fringe_grid = sfg.SumGrid.band_nm(grid, band[0], band[1], stride=1)
    kernel = kernel_for(cfg.geometry, grid, fringe_grid, cfg.kernel_kind, cache)
    spectrum = assemble_spectrum(fine_decomp, kernel, cfg.correction)
    try:
        period = ana.fringe_period(spectrum, band)
        status = "ok"
    except TooFewFringes as exc:
        period, status = None, str(exc)
    return {"fringe_period_nm": period, "fringe_status": status, "band_nm": list(band)}, spectrum


# ---------------------------------------------------------------------------
# output writers

def _write_columns(path, header_lines, names, columns):
    columns = [np.asarray(c) for c in columns]
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("# columns: " + " ".join(names) + "\n")
        for row in zip(*columns):
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def _spectrum_header(cfg, kernel_kind):
    g = cfg.geometry
    return [
        f"config_hash={cfg.config_hash()}",
        f"kernel={kernel_kind} D_mm={g.length * 1e3!r} b_um={g.confocal * 1e6!r} "
        f"z0_mm={g.waist_position * 1e3!r} alpha_deg={math.degrees(g.alpha)!r}",
        f"corrected={'lambda^-4' if cfg.correction else 'none'}",
        "units: wavelength nm, spectra arbitrary",
    ]


def write_spectrum_file(path, cfg, spectrum):
    _write_columns(
        path,
        _spectrum_header(cfg, cfg.kernel_kind),
        ["wavelength_nm", "coherent", "incoherent", "total"],
        [spectrum.sum_grid.wavelengths_nm, spectrum.coherent, spectrum.incoherent, spectrum.total],
    )


def write_pdc_file(path, cfg, decomp):
    spectrum = pdc.pdc_spectrum(decomp)
    _write_columns(
        path,
        [f"config_hash={cfg.config_hash()}", "units: wavelength nm, spectrum arbitrary"],
        ["wavelength_nm", "n_pdc"],
        [decomp.grid.wavelengths_nm, spectrum],
    )


def _write_summary(outdir, cfg, payload):
    payload = dict(payload)
    payload["config_hash"] = cfg.config_hash()
    payload["resolved_config"] = cfg.resolved_dict()
    with open(os.path.join(outdir, "run_summary.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_resolved_config(outdir, cfg):
    import yaml

    with open(os.path.join(outdir, "resolved_config.yaml"), "w") as fh:
        yaml.safe_dump(cfg.resolved_dict(), fh, sort_keys=True)


# ---------------------------------------------------------------------------
# runners

def run_pdc(cfg, outdir):
    """PDC-only pipeline: spectrum file plus Schmidt summary."""
    os.makedirs(outdir, exist_ok=True)
    decomp = decomposition_for(cfg)
    write_pdc_file(os.path.join(outdir, "pdc_spectrum.txt"), cfg, decomp)
    spectrum = pdc.pdc_spectrum(decomp)
    summary = {
        "theta_deg": cfg.theta_deg,
        "modes_retained": decomp.truncation_count,
        "eigenvalue_sum_total": decomp.eigenvalue_sum_total,
    }
    try:
        summary["schmidt_number"] = pdc.schmidt_number(decomp)
    except SfgSimError as exc:
        summary["schmidt_number"] = None
        summary["schmidt_number_status"] = str(exc)
    try:
        summary["pdc_fwhm_nm"] = abs(ana.fwhm(spectrum, decomp.grid.wavelengths_nm))
    except (NoCrossing, SfgSimError) as exc:
        summary["pdc_fwhm_nm"] = None
        summary["pdc_fwhm_status"] = str(exc)
    _write_summary(outdir, cfg, summary)
    _write_resolved_config(outdir, cfg)
    return summary


def run_single(cfg, outdir):
    """Full pipeline: pdc -> chirp -> kernel -> spectrum -> analysis."""
    os.makedirs(outdir, exist_ok=True)
    cache = {}
    decomp = decomposition_for(cfg, cache=cache)
    write_pdc_file(os.path.join(outdir, "pdc_spectrum.txt"), cfg, decomp)

    main_grid = sfg.SumGrid.doubled(cfg.grid)
    kernel = kernel_for(cfg.geometry, cfg.grid, main_grid, cfg.kernel_kind, cache)
    spectrum = assemble_spectrum(decomp, kernel, cfg.correction)
    write_spectrum_file(os.path.join(outdir, "sfg_spectrum.txt"), cfg, spectrum)

    summary = {"theta_deg": cfg.theta_deg, "schmidt_number": None, "analysis": None}
    vacuum = float(np.max(spectrum.total, initial=0.0)) == 0.0
    try:
        summary["schmidt_number"] = pdc.schmidt_number(decomp)
    except SfgSimError:
        pass

    if cfg.analysis["enabled"] and not vacuum:
        fine = analysis_grid(cfg, decomp)
        try:
            report, peak_spec, pedestal_spec = width_analysis(cfg, fine, cache=cache)
            write_spectrum_file(os.path.join(outdir, "sfg_peak_band.txt"), cfg, peak_spec)
            write_spectrum_file(os.path.join(outdir, "sfg_pedestal_band.txt"), cfg, pedestal_spec)
        except (ComponentEmpty, NoCrossing) as exc:
            report = {"status": str(exc)}
        fringes, fringe_spec = fringe_analysis(cfg, fine, cache=cache)
        write_spectrum_file(os.path.join(outdir, "sfg_fringe_band.txt"), cfg, fringe_spec)
        report.update(fringes)
        summary["analysis"] = report
    elif vacuum:
        summary["analysis"] = {"status": "spectrum is identically zero (vacuum input)"}

    _write_summary(outdir, cfg, summary)
    _write_resolved_config(outdir, cfg)
    return summary


def export_schmidt(cfg, outdir):
    os.makedirs(outdir, exist_ok=True)
    decomp = decomposition_for(cfg)
    path = os.path.join(outdir, "schmidt_modes.txt")
    pdc.export_decomposition(decomp, path)
    _write_resolved_config(outdir, cfg)
    return path


def _sweep_point(cfg, variable, value, cache):
    """One sweep evaluation; returns an ordered result dict."""
    if variable == "z0":
        geometry = replace(cfg.geometry, waist_position=value * 1e-3)
        decomp = decomposition_for(cfg, cache=cache)
    elif variable == "alpha":
        geometry = replace(cfg.geometry, alpha=math.radians(value))
        decomp = decomposition_for(cfg, cache=cache)
    else:  # pump_duration, fs
        geometry = cfg.geometry
        decomp = None

    if cfg.sweep_full_spectrum:
        duration = value if variable == "pump_duration" else None
        coarse = decomposition_for(cfg, duration_fs=duration, cache=cache)
        fine = analysis_grid(cfg, coarse, duration_fs=duration)
        report, _, _ = width_analysis(
            _with_geometry(cfg, geometry), fine, duration_fs=duration, cache=cache
        )
        return {
            "value": value,
            "K": report["schmidt_number"],
            "R": report["width_ratio"],
            "fwhm_coherent_rad_s": report["fwhm_coherent_rad_s"],
            "fwhm_incoherent_rad_s": report["fwhm_incoherent_rad_s"],
        }

    if decomp is None:
        decomp = decomposition_for(cfg, duration_fs=value, cache=cache)
    probe_nm = cfg.sweep_probe_nm if cfg.sweep_probe_nm is not None else cfg.pump_wavelength_nm
    grid = decomp.grid
    omega_probe = dispersion.TWO_PI_C / (probe_nm * 1e-9)
    p = int(round((omega_probe - 2.0 * grid.omega_min) / grid.delta))
    p = min(max(p, 0), 2 * (grid.n_points - 1))
    sum_grid = sfg.SumGrid(grid, np.array([p]))
    kernel = kernel_for(geometry, grid, sum_grid, cfg.kernel_kind, cache)
    spectrum = assemble_spectrum(decomp, kernel, cfg.correction)
    return {
        "value": value,
        "probe_nm": float(sum_grid.wavelengths_nm[0]),
        "coherent": float(spectrum.coherent[0]),
        "incoherent": float(spectrum.incoherent[0]),
        "total": float(spectrum.total[0]),
    }


def _with_geometry(cfg, geometry):
    if geometry is cfg.geometry:
        return cfg
    clone = RunConfig(cfg.raw)
    clone.geometry = geometry
    return clone


def _sweep_point_isolated(args):
    raw, variable, value = args
    cfg = RunConfig(raw)
    try:
        return _sweep_point(cfg, variable, value, cache={})
    except SfgSimError as exc:
        return {"value": value, "error": f"{type(exc).__name__}: {exc}"}


def run_sweep(cfg, outdir):
    """Sweep the configured variable; one output row per point.

    Points run concurrently when SFGSIM_WORKERS > 1; rows are written in
    sweep order either way, and per-point failures are recorded without
    aborting the sweep.
    """
    if cfg.sweep is None:
        raise ValueError("config has no sweep section")
    os.makedirs(outdir, exist_ok=True)
    spec = cfg.sweep
    values = spec.values()
    workers = int(os.environ.get("SFGSIM_WORKERS", "1"))

    if workers > 1:
        args = [(cfg.raw, spec.variable, v) for v in values]
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point_isolated, args))
    else:
        cache = {}
        rows = []
        for v in values:
            try:
                rows.append(_sweep_point(cfg, spec.variable, v, cache))
            except SfgSimError as exc:
                rows.append({"value": v, "error": f"{type(exc).__name__}: {exc}"})

    if cfg.sweep_full_spectrum:
        names = ["value", "K", "R", "fwhm_coherent_rad_s", "fwhm_incoherent_rad_s"]
    else:
        names = ["value", "probe_nm", "coherent", "incoherent", "total"]
    path = os.path.join(outdir, "sweep.txt")
    with open(path, "w") as fh:
        fh.write(f"# config_hash={cfg.config_hash()}\n")
        fh.write(f"# sweep variable={spec.variable} start={spec.start!r} "
                 f"stop={spec.stop!r} steps={spec.steps}\n")
        fh.write("# columns: index " + " ".join(names) + " status\n")
        for i, row in enumerate(rows):
            if "error" in row:
                cells = [str(i), repr(float(row["value"]))] + ["nan"] * (len(names) - 1)
                cells.append(row["error"].replace(" ", "_"))
            else:
                cells = [str(i)] + [repr(float(row[k])) for k in names] + ["ok"]
            fh.write(" ".join(cells) + "\n")
    _write_resolved_config(outdir, cfg)
    return rows
