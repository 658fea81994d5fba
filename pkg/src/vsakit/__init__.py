"""vsakit: vector-symbolic architectures with capacity sizing and validation.

Five encodings of symbol sets as fixed-width vectors, each with the
estimators and decision thresholds its guarantees support:

- :mod:`vsakit.mapi`     sign-matrix sums; norm/dot/intersection estimators
- :mod:`vsakit.mapb`     thresholded sign bundles; membership decision tests
- :mod:`vsakit.bloom`    saturating sparse binary filters; h_{m,k} inversion
- :mod:`vsakit.cbloom`   counting filters; weighted-intersection estimator
- :mod:`vsakit.hopfield` associative recall and the Hopfield± matrix bundle

plus :mod:`vsakit.sizing` (dimension formulas and empirical calibration) and
:mod:`vsakit.harness` (seeded Monte Carlo experiments, CSV output).
"""

from .codebook import Codebook, atomic, hadamard_entry, srht_entry
from .hypervector import Hypervector, Rotation, bind, rotate
from .rng import RNG_VERSION
from .setalg import (
    BindingBundleSpec,
    SequenceSpec,
    SymbolSet,
    intersection_size,
    l1_distance,
    symmetric_difference_size,
    wedgedot,
)
from .sizing import CONSTANTS, CalibrationResult, SizingResult, calibrate, size

__version__ = "0.1.0"

__all__ = [
    "BindingBundleSpec",
    "CONSTANTS",
    "CalibrationResult",
    "Codebook",
    "Hypervector",
    "RNG_VERSION",
    "Rotation",
    "SequenceSpec",
    "SizingResult",
    "SymbolSet",
    "atomic",
    "bind",
    "calibrate",
    "hadamard_entry",
    "intersection_size",
    "l1_distance",
    "rotate",
    "size",
    "srht_entry",
    "symmetric_difference_size",
    "wedgedot",
    "__version__",
]
