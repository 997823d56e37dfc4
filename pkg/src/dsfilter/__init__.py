"""Distance-sensitive approximate membership filters for Hamming vectors.

Queries within distance ``r`` of the stored set always answer yes; queries
farther than ``c*r`` answer yes with probability at most ``eps``.
"""

from .filter import (
    DistSenseFilter,
    FilterAnswer,
    FormatError,
    Hypothesis,
    HypothesisError,
    Mode,
    build_average,
    build_pointwise,
    deserialize,
    serialize,
)
from .hamming import (
    DimensionError,
    HammingVector,
    PointSet,
    QueryClass,
    Zone,
    classify_query,
    distance_to_set,
    hamming_distance,
    read_vectors,
)
from .signature import (
    FilterConfig,
    ParameterError,
    Regime,
    derive_params,
    gap,
    signature,
    sketch,
    smod,
    update_stream,
)

__version__ = "0.1.0"
