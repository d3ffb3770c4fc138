"""sipguard: SIP traffic intrusion detection via naive-Bayes belief fusion."""

from .bayes import (
    TRAFFIC_CLASSES,
    ContradictoryEvidence,
    Cpt,
    belief,
    fuse_likelihoods,
    likelihood_to_parent,
    posterior,
    propagate_prior,
    uniform_prior,
)
from .config import default_config, load_config
from .dialogs import DialogRecord, DialogState, DialogTracker
from .engine import (
    INDETERMINATE,
    Alert,
    BeliefReport,
    ConfigurationError,
    DecayRates,
    DetectorConfig,
    PeriodSpec,
    alert_for,
    evaluate_snapshot,
    run,
    validate_config,
)
from .features import (
    BinningScheme,
    ClockMode,
    DecayedCounter,
    FeatureExtractor,
    FeatureSnapshot,
    bin_to_likelihood,
    half_life,
)
from .sip import (
    Direction,
    MessageKind,
    MethodCategory,
    ParseFailure,
    SipMessage,
    TraceEvent,
    destination_of,
    error_indicator,
    method_category,
    parse_message,
    response_class,
    source_of,
)
from .traceio import (
    ScenarioKind,
    ScenarioSpec,
    TraceFile,
    TraceFormatError,
    TraceHeader,
    generate,
    read_trace,
    write_trace,
)

__version__ = "0.1.0"

__all__ = [
    "TRAFFIC_CLASSES",
    "ContradictoryEvidence",
    "Cpt",
    "belief",
    "fuse_likelihoods",
    "likelihood_to_parent",
    "posterior",
    "propagate_prior",
    "uniform_prior",
    "default_config",
    "load_config",
    "DialogRecord",
    "DialogState",
    "DialogTracker",
    "INDETERMINATE",
    "Alert",
    "BeliefReport",
    "ConfigurationError",
    "DecayRates",
    "DetectorConfig",
    "PeriodSpec",
    "alert_for",
    "evaluate_snapshot",
    "run",
    "validate_config",
    "BinningScheme",
    "ClockMode",
    "DecayedCounter",
    "FeatureExtractor",
    "FeatureSnapshot",
    "bin_to_likelihood",
    "half_life",
    "Direction",
    "MessageKind",
    "MethodCategory",
    "ParseFailure",
    "SipMessage",
    "TraceEvent",
    "destination_of",
    "error_indicator",
    "method_category",
    "parse_message",
    "response_class",
    "source_of",
    "ScenarioKind",
    "ScenarioSpec",
    "TraceFile",
    "TraceFormatError",
    "TraceHeader",
    "generate",
    "read_trace",
    "write_trace",
]
