"""Fast per-BS cluster capacity estimation for ultra-dense wireless networks.

The package builds clustered network layouts, derives the per-cluster channel
matrices, and estimates the uplink capacity of a cluster either exactly (by a
Cholesky log-determinant) or with the linear-time TOSE spike approximation.
"""

from tosecap.errors import (
    DegenerateSpectrumError,
    GenerationError,
    InvalidParameterError,
    NumericalFailure,
    ReportIOError,
    ToseError,
)
from tosecap.config import ScenarioConfig
from tosecap.geometry import NetworkScenario, Cluster, build_scenario
from tosecap.channel import FadingParams, ClusterChannel, cluster_channel
from tosecap.capacity_exact import (
    CapacityResult,
    Method,
    exact_capacity_hadamard,
    exact_capacity_matrixprod,
    log_det_identity_plus,
)
from tosecap.tose import SpikeEstimate, build_T, spike_estimate, tose_capacity, trace_B

__all__ = [
    "CapacityResult",
    "Cluster",
    "ClusterChannel",
    "DegenerateSpectrumError",
    "FadingParams",
    "GenerationError",
    "InvalidParameterError",
    "Method",
    "NetworkScenario",
    "NumericalFailure",
    "ReportIOError",
    "ScenarioConfig",
    "SpikeEstimate",
    "ToseError",
    "build_T",
    "build_scenario",
    "cluster_channel",
    "exact_capacity_hadamard",
    "exact_capacity_matrixprod",
    "log_det_identity_plus",
    "spike_estimate",
    "tose_capacity",
    "trace_B",
]

__version__ = "0.1.0"
