"""Full counting statistics of a periodically modulated three-qubit quantum thermal transistor."""
__version__ = "0.1.0"

from .errors import (
    DegenerateGeneratorError,
    DomainError,
    FQTError,
    NumericalError,
    OptimizationFailed,
    SingularRegimeError,
    UnsupportedProtocolError,
)
from .model import SystemParams, spectral_function, thermal_occupancy
from .modulation import (
    CrabWaveform,
    HarmonicSpectrum,
    SinusoidalWaveform,
    crab_frequency,
    weights_from_waveform,
    weights_pi_flip,
    weights_sinusoidal,
    weights_unmodulated,
)
from .liouvillian import CountingField, TiltedGenerator, aux_rates, build, build_full, build_low_t
from .cumulants import CumulantSet, cumulants, mean_current, variance
