"""Near-field (polar-domain) channel estimation for extremely large antenna arrays."""

from .array_channel import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    ChannelRealization,
    FrequencyGrid,
    PathParam,
    element_distance,
    far_steering,
    fresnel_validity_bound,
    near_steering,
    rayleigh_distance,
    sample_random_paths,
    synthesize_channel,
)
from .estimators import (
    EstimationResult,
    genie_ls,
    ls_baseline,
    p_sigw,
    p_somp,
    ss_sigw_baseline,
    sw_omp_baseline,
)
from .kernels import BACKEND
from .observation import build_whitener, generate_combiner, observe, whiten
from .polar_dictionary import (
    DictionaryConfig,
    PolarDictionary,
    audit_coherence,
    build_angular_dictionary,
    build_polar_dictionary,
    g_magnitude,
    uniform_dictionary,
)

__version__ = "0.1.0"

__all__ = [
    "SPEED_OF_LIGHT", "ArrayGeometry", "ChannelRealization", "FrequencyGrid", "PathParam",
    "element_distance", "far_steering", "fresnel_validity_bound", "near_steering",
    "rayleigh_distance", "sample_random_paths", "synthesize_channel",
    "EstimationResult", "genie_ls", "ls_baseline", "p_sigw", "p_somp", "ss_sigw_baseline",
    "sw_omp_baseline", "BACKEND", "build_whitener", "generate_combiner", "observe", "whiten",
    "DictionaryConfig", "PolarDictionary", "audit_coherence", "build_angular_dictionary",
    "build_polar_dictionary", "g_magnitude", "uniform_dictionary",
]
