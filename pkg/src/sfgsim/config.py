"""Run configuration: YAML loading, validation, derived quantities.

A run config has five core sections (``pdc``, ``propagation``, ``sfg``,
``grid``, ``output``) plus optional ``analysis`` and ``sweep`` sections.
Unknown keys are rejected; omitted optional fields get documented defaults.
``load_config`` returns a fully resolved :class:`RunConfig` whose derived
quantities (phase-matching angle, degenerate frequency, confocal parameter,
grids) are ready for the pipeline.
"""

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources

import yaml

from . import dispersion
from .errors import ParseError, ValidationError
from .pdc import FrequencyGrid, PumpPulse
from .sfg import FocusGeometry

_SCHEMA_DEFAULTS = {
    "pdc": {
        "pump_wavelength_nm": 800.0,
        "pump_duration_fs": 1600.0,
        "crystal_length_mm": 10.0,
        "theta_deg": "auto",
        "gamma1": 10.5,
        "truncation_eps_rel": 1e-4,
        "truncation_max_modes": 128,
        "material": "BBO",
    },
    "propagation": {
        "gdd_fs2": 0.0,
    },
    "sfg": {
        "material": "LiNbO3_MgO",
        "length_mm": 1.0,
        "w0_um": None,
        "confocal_um": None,
        "z0_mm": 0.0,
        "alpha_deg": 0.0,
        "kernel": "focused",
        "beta_const": 1.0,
    },
    "grid": {
        "n_points": 512,
        "wavelength_min_nm": 1100.0,
        "wavelength_max_nm": 2400.0,
    },
    "output": {
        "path": "runs",
        "correction": True,
    },
    "analysis": {
        "enabled": True,
        "fringe_band_nm": [780.0, 820.0],
        "fringe_sampling_nm": None,  # auto: 0.2 nm * (1 mm / D)
        "peak_oversampling": 8,  # lattice points per expected peak FWHM
    },
    "sweep": {
        "variable": None,  # z0 | alpha | pump_duration
        "start": None,
        "stop": None,
        "steps": None,
        "probe_nm": None,
        "full_spectrum": False,
    },
}

_SWEEP_VARIABLES = ("z0", "alpha", "pump_duration")


def _merge_with_defaults(user, defaults, prefix=""):
    merged = copy.deepcopy(defaults)
    for key, value in user.items():
        path = f"{prefix}{key}"
        if key not in defaults:
            raise ValidationError(path, "unknown key")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ValidationError(path, "expected a mapping")
            merged[key] = _merge_with_defaults(value, defaults[key], prefix=path + ".")
        else:
            merged[key] = value
    return merged


def _require_positive(section, field, value):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0.0:
        raise ValidationError(f"{section}.{field}", f"must be a positive number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class SweepSpec:
    """One swept variable with an inclusive linear range."""

    variable: str  # z0 (mm) | alpha (deg) | pump_duration (fs)
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.variable not in _SWEEP_VARIABLES:
            raise ValidationError("sweep.variable", f"must be one of {_SWEEP_VARIABLES}")
        if self.steps < 2:
            raise ValidationError("sweep.steps", "must be >= 2")
        if self.start == self.stop:
            raise ValidationError("sweep.start", "start and stop must differ")

    def values(self):
        step = (self.stop - self.start) / (self.steps - 1)
        return [self.start + i * step for i in range(self.steps)]


class RunConfig:
    """Validated configuration with derived quantities resolved."""

    def __init__(self, raw):
        self.raw = raw
        p, s, g = raw["pdc"], raw["sfg"], raw["grid"]

        self.pump_wavelength_nm = _require_positive("pdc", "pump_wavelength_nm", p["pump_wavelength_nm"])
        self.pump_duration_fs = _require_positive("pdc", "pump_duration_fs", p["pump_duration_fs"])
        self.pdc_length_mm = _require_positive("pdc", "crystal_length_mm", p["crystal_length_mm"])
        self.gamma1 = p["gamma1"]
        if not isinstance(self.gamma1, (int, float)) or self.gamma1 < 0.0:
            raise ValidationError("pdc.gamma1", "must be a nonnegative number")
        self.truncation_eps_rel = p["truncation_eps_rel"]
        self.truncation_max_modes = int(p["truncation_max_modes"])
        self.pdc_material = p["material"]

        theta = p["theta_deg"]
        if theta == "auto":
            theta = math.degrees(
                dispersion.degenerate_pm_angle(self.pump_wavelength_nm * 1e-3, self.pdc_material)
            )
        if not isinstance(theta, (int, float)) or not 0.0 < theta < 90.0:
            raise ValidationError("pdc.theta_deg", "must be 'auto' or an angle in (0, 90) deg")
        # canonical value is the angle in degrees so a resolved config
        # round-trips to bitwise-identical outputs
        self.theta_deg = float(theta)
        self.theta_rad = math.radians(self.theta_deg)

        self.gdd_fs2 = float(raw["propagation"]["gdd_fs2"])

        self.sfg_material = s["material"]
        self.sfg_length_mm = _require_positive("sfg", "length_mm", s["length_mm"])
        if (s["w0_um"] is None) == (s["confocal_um"] is None):
            raise ValidationError("sfg.w0_um", "exactly one of w0_um and confocal_um must be set")
        self.z0_mm = float(s["z0_mm"])
        self.alpha_rad = math.radians(float(s["alpha_deg"]))
        if s["kernel"] not in ("focused", "plane_wave"):
            raise ValidationError("sfg.kernel", "must be 'focused' or 'plane_wave'")
        self.kernel_kind = s["kernel"]
        self.beta_const = _require_positive("sfg", "beta_const", s["beta_const"])

        n_points = g["n_points"]
        if not isinstance(n_points, int) or n_points < 8:
            raise ValidationError("grid.n_points", "must be an integer >= 8")
        lo = _require_positive("grid", "wavelength_min_nm", g["wavelength_min_nm"])
        hi = _require_positive("grid", "wavelength_max_nm", g["wavelength_max_nm"])
        if lo >= hi:
            raise ValidationError("grid.wavelength_min_nm", "must be below wavelength_max_nm")
        self.grid = FrequencyGrid.from_wavelength_bounds_nm(n_points, lo, hi)

        self.output_path = raw["output"]["path"]
        self.correction = bool(raw["output"]["correction"])
        self.analysis = raw["analysis"]

        sw = raw["sweep"]
        self.sweep = None
        if sw["variable"] is not None:
            self.sweep = SweepSpec(sw["variable"], float(sw["start"]), float(sw["stop"]), int(sw["steps"]))
        self.sweep_probe_nm = sw["probe_nm"]
        self.sweep_full_spectrum = bool(sw["full_spectrum"])

        # derived: degenerate PDC frequency and focusing geometry
        self.omega_degenerate = dispersion.TWO_PI_C / (2.0 * self.pump_wavelength_nm * 1e-9)
        if s["w0_um"] is not None:
            w0 = _require_positive("sfg", "w0_um", s["w0_um"])
            self.geometry = FocusGeometry.from_waist(
                self.sfg_length_mm, w0, self.z0_mm, self.alpha_rad,
                self.omega_degenerate, self.beta_const, self.sfg_material,
            )
            self.w0_um = w0
        else:
            b = _require_positive("sfg", "confocal_um", s["confocal_um"])
            self.geometry = FocusGeometry(
                length=self.sfg_length_mm * 1e-3,
                confocal=b * 1e-6,
                waist_position=self.z0_mm * 1e-3,
                alpha=self.alpha_rad,
                omega_degenerate=self.omega_degenerate,
                beta_const=self.beta_const,
                material=self.sfg_material,
            )
            self.w0_um = None
        self.confocal_um = self.geometry.confocal * 1e6

    @property
    def pulse(self):
        return PumpPulse(self.pump_wavelength_nm, self.pump_duration_fs)

    def resolved_dict(self):
        """Round-trippable config dict with the phase-matching angle resolved."""
        out = copy.deepcopy(self.raw)
        out["pdc"]["theta_deg"] = self.theta_deg
        return out

    def config_hash(self):
        blob = json.dumps(self.resolved_dict(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _parse_file(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ParseError(path, "file not found") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f"line {mark.line + 1}: " if mark is not None else ""
        raise ParseError(path, f"{line}{exc}") from None
    if not isinstance(data, dict):
        raise ParseError(path, "top level must be a mapping")
    return data


def set_override(tree, dotted, value):
    """Apply a ``--set a.b.c=value`` style override onto a config dict."""
    keys = dotted.split(".")
    node = tree
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ValidationError(dotted, "override path crosses a scalar")
    node[keys[-1]] = yaml.safe_load(value)


def load_config(path=None, overrides=None):
    """Load, validate and resolve a run configuration.

    ``path=None`` loads the bundled reference configuration.  ``overrides``
    is a list of ``key.path=value`` strings applied after the file.
    """
    if path is None:
        text = resources.files("sfgsim").joinpath("data/defaults.yaml").read_text()
        user = yaml.safe_load(text)
    else:
        user = _parse_file(path)
    for item in overrides or []:
        if "=" not in item:
            raise ValidationError(item, "override must look like key.path=value")
        dotted, value = item.split("=", 1)
        set_override(user, dotted.strip(), value)
    merged = _merge_with_defaults(user, _SCHEMA_DEFAULTS)
    return RunConfig(merged)
