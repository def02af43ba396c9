"""Non-phase-matched SFG from broadband multimode bright squeezed vacuum."""

from .analysis import WidthReport, fringe_period, fwhm, width_ratio
from .config import RunConfig, SweepSpec, load_config
from .dispersion import (
    CrystalAxes,
    Material,
    chirp_phase,
    degenerate_pm_angle,
    get_material,
    pdc_mismatch,
    refractive_index,
    sfg_mismatch,
)
from .pdc import (
    FrequencyGrid,
    JointSpectralAmplitude,
    PumpPulse,
    SchmidtDecomposition,
    build_jsa,
    pdc_spectrum,
    pump_amplitude,
    schmidt_decompose,
    schmidt_number,
    takagi_factorize,
)
from .sfg import (
    FocusGeometry,
    SfgSpectrum,
    SumGrid,
    TransferKernel,
    apply_chirp,
    build_kernel,
    detection_correction,
    intermodal_integrals,
    sfg_spectrum,
    transfer_focused,
    transfer_plane_wave,
)

__version__ = "0.1.0"
