"""Efimov trimers, elastic n+dimer scattering, and Fano lineshape fits
for two-neutron halo systems (n + n + core)."""

from .errors import (
    ConfigurationError,
    DomainError,
    FlatDataError,
    NumericalError,
    PoleProximityError,
)
from .fanofit import (
    BreitWignerParameters,
    FanoParameters,
    FitResult,
    breit_wigner_profile,
    fano_profile,
    fit,
    q_consistency,
)
from .model import (
    UNITARY_LIMIT,
    ChannelLabel,
    PairChannel,
    PhysicalConstants,
    PoleKind,
    SystemConfig,
    default_c20_config,
    parse_system_config,
    reduced_mass,
    resolve_config,
    scattering_length_from_pole,
    two_body_propagator,
)
from .quadrature import MomentumGrid, build_grid
from .scattering import (
    CrossSectionCurve,
    ScatteringPoint,
    cross_section_curve,
    elastic_amplitude,
    resonance_window,
)
from .spectrum import (
    NO_EFIMOV_REGIME,
    KernelMatrix,
    ResonantPairs,
    ScaleFactor,
    ThreeBodySpectrum,
    ThresholdScan,
    boron19_check,
    boron19_config,
    build_kernel,
    calibrate_range_parameter,
    efimov_scale_factor,
    find_trimers,
    threshold_scan,
    trimer_determinant,
)

__version__ = "0.1.0"
