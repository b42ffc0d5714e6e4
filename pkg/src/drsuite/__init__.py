"""drsuite: tree-based demand response decision support.

Learns power and zone-temperature models from timestamped building data,
predicts DR baselines, ranks fixed curtailment strategies, and synthesizes
set-point schedules in real time via disturbance-partitioned trees with
linear control-variable leaf models solved as per-step linear programs.
"""

from . import (
    cart,
    dataset,
    ensemble,
    events,
    horizon,
    lp,
    mbcrt,
    metrics,
    registry,
    serialize,
    service,
    testbed,
)
from .errors import (
    DegenerateControl,
    DrSuiteError,
    EmptyData,
    InfeasibleComfort,
    InsufficientHistory,
    InvalidArgument,
    IrregularInterval,
    SchemaMismatch,
    UndefinedMetric,
)

__version__ = "0.1.0"
