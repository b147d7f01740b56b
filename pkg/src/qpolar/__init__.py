"""qpolar: exact q-ary channel polarization experiments at desk scale.

The library models finite q-ary-input channels as explicit conditional
probability tables, applies the one-step polarization transform exactly,
and runs the recursive, statistical and bound-checking experiments around
it.  Heavy inner loops go through a compiled kernel module when it is
built, with a numpy fallback selected automatically at import.
"""

from ._backend import kernel_backend
from .channels import (
    Channel,
    ERASE,
    PosteriorView,
    capacity,
    erasure_channel,
    load_channel,
    make_channel,
    noiseless,
    posteriors,
    random_channel,
    store_channel,
    subgroup_channel,
    useless,
)
from .dists import (
    Alphabet,
    ConvolutionGain,
    Dist,
    L1UniformBound,
    ShiftSeparation,
    check_convolution_gain,
    check_l1_uniform_bound,
    check_shift_separation,
    cyclic_convolve,
    cyclic_shift,
    entropy,
    l1_distance,
    point_mass,
    sample_simplex,
    sweep_convolution_gain,
    sweep_l1_uniform_bound,
    sweep_shift_separation,
    uniform,
)
from .polarize import (
    CompositeSearchResult,
    EpsilonPoint,
    MINUS,
    OutputBudgetError,
    PLUS,
    PathSummary,
    PathTrace,
    PolarizationReport,
    SignSequence,
    build_tree,
    composite_search,
    epsilon_curve,
    erasure_rate,
    polarization_fractions,
    sample_paths,
)
from .reduction import canonicalize, equivalent
from .transform import (
    EntropyGainSweep,
    Gap,
    Permutation,
    SplitPair,
    entropy_gain,
    gap,
    split,
    split_permuted,
    sweep_entropy_gain,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "Channel",
    "CompositeSearchResult",
    "ConvolutionGain",
    "Dist",
    "ERASE",
    "EntropyGainSweep",
    "EpsilonPoint",
    "Gap",
    "L1UniformBound",
    "MINUS",
    "OutputBudgetError",
    "PLUS",
    "PathSummary",
    "PathTrace",
    "Permutation",
    "PolarizationReport",
    "PosteriorView",
    "ShiftSeparation",
    "SignSequence",
    "SplitPair",
    "build_tree",
    "canonicalize",
    "capacity",
    "check_convolution_gain",
    "check_l1_uniform_bound",
    "check_shift_separation",
    "composite_search",
    "cyclic_convolve",
    "cyclic_shift",
    "entropy",
    "entropy_gain",
    "epsilon_curve",
    "equivalent",
    "erasure_channel",
    "erasure_rate",
    "gap",
    "kernel_backend",
    "l1_distance",
    "load_channel",
    "make_channel",
    "noiseless",
    "point_mass",
    "polarization_fractions",
    "posteriors",
    "random_channel",
    "sample_paths",
    "sample_simplex",
    "split",
    "split_permuted",
    "store_channel",
    "subgroup_channel",
    "sweep_convolution_gain",
    "sweep_entropy_gain",
    "sweep_l1_uniform_bound",
    "sweep_shift_separation",
    "uniform",
    "useless",
]
