"""Detection pipeline: ingest events, close periods, classify, report.

Each inference period snapshots the features, turns every observable into
its child likelihood (one-hot bins for scalars, raw counts for the two
distributions), pushes them through the CPTs, fuses, and computes the
belief over traffic classes against the configured prior.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .bayes import (
    TRAFFIC_CLASSES,
    ContradictoryEvidence,
    Cpt,
    belief,
    cpt_row_violations,
    fuse_likelihoods,
    likelihood_to_parent,
    uniform_prior,
)
from .dialogs import DEFAULT_IDLE_TIMEOUT, DialogTracker
from .features import (
    BinningScheme,
    FeatureExtractor,
    FeatureSnapshot,
    bin_to_likelihood,
)
from .sip import ParseFailure, TraceEvent

INDETERMINATE = "INDETERMINATE"

# Canonical evidence children, in fusion order. The parse-error child is
# optional: a config may omit its CPT, the others are mandatory.
BINNED_CHILDREN = (
    "request_intensity",
    "error_intensity",
    "parse_error_intensity",
    "destinations",
    "rtp_ports",
    "waiting_dialogs",
)
DISTRIBUTION_CHILDREN = ("request_methods", "response_classes")
CHILD_ORDER = BINNED_CHILDREN + DISTRIBUTION_CHILDREN
OPTIONAL_CHILDREN = ("parse_error_intensity",)

REQUEST_METHOD_STATES = ("INVITE", "REGISTER", "ACK", "CANCEL", "BYE")
RESPONSE_CLASS_STATES = ("1xx", "2xx", "3xx", "4xx", "5xx", "6xx")


@dataclass(frozen=True)
class PeriodSpec:
    """Inference period: an event count or a span of elapsed seconds."""

    event_count: int | None = None
    elapsed_seconds: float | None = None


@dataclass(frozen=True)
class DecayRates:
    request: float = -0.35
    error: float = -0.15
    parse: float = -0.15


@dataclass(frozen=True)
class DetectorConfig:
    period: PeriodSpec
    cpts: dict[str, Cpt]
    bins: BinningScheme = BinningScheme()
    decay: DecayRates = DecayRates()
    prior: tuple[float, ...] | None = None
    alert_threshold: float = 0.5
    classes: tuple[str, ...] = TRAFFIC_CLASSES
    idle_timeout: float = DEFAULT_IDLE_TIMEOUT

    def effective_prior(self) -> tuple[float, ...]:
        return self.prior if self.prior is not None else uniform_prior(len(self.classes))


@dataclass(frozen=True)
class BeliefReport:
    """Per-period classification result, retained for explainability."""

    period_id: int
    start: float
    end: float
    n_events: int
    partial: bool
    snapshot: FeatureSnapshot
    child_evidence: dict[str, tuple[float, ...]]
    child_likelihoods: dict[str, tuple[float, ...]]
    fused: tuple[float, ...]
    belief: tuple[float, ...]
    verdict: str


@dataclass(frozen=True)
class Alert:
    period_id: int
    verdict: str
    belief: float
    start: float
    end: float
    child_likelihoods: dict[str, tuple[float, ...]]


class ConfigurationError(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


def _expected_child_width(name: str, bins: BinningScheme) -> int:
    if name == "request_methods":
        return len(REQUEST_METHOD_STATES)
    if name == "response_classes":
        return len(RESPONSE_CLASS_STATES)
    return len(getattr(bins, name)) + 1


def validate_config(config: DetectorConfig) -> list[str]:
    """Every violation in the config, empty when it is usable."""
    problems: list[str] = []

    modes_set = [m for m in (config.period.event_count, config.period.elapsed_seconds)
                 if m is not None]
    if len(modes_set) != 1:
        problems.append("period: exactly one of event_count/elapsed_seconds must be set")
    elif modes_set[0] <= 0:
        problems.append(f"period: must be positive, got {modes_set[0]}")

    for label, k in (("request", config.decay.request), ("error", config.decay.error),
                     ("parse", config.decay.parse)):
        if k > 0:
            problems.append(f"decay.{label}: decay constant must be <= 0, got {k}")

    for name in BINNED_CHILDREN:
        bounds = getattr(config.bins, name)
        if not bounds:
            problems.append(f"bins.{name}: at least one boundary required")
        elif any(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:])):
            problems.append(f"bins.{name}: boundaries must be strictly increasing: {list(bounds)}")
        elif bounds[0] < 0:
            problems.append(f"bins.{name}: boundaries must be non-negative: {list(bounds)}")

    if not 0.0 < config.alert_threshold <= 1.0:
        problems.append(f"alert_threshold: must be in (0, 1], got {config.alert_threshold}")

    if config.prior is not None:
        if len(config.prior) != len(config.classes):
            problems.append(f"prior: {len(config.prior)} entries for {len(config.classes)} classes")
        elif any(p < 0 for p in config.prior):
            problems.append("prior: entries must be non-negative")
        elif abs(sum(config.prior) - 1.0) > 1e-9:
            problems.append(f"prior: sums to {sum(config.prior):.9g}, not 1")

    for name in CHILD_ORDER:
        cpt = config.cpts.get(name)
        if cpt is None:
            if name not in OPTIONAL_CHILDREN:
                problems.append(f"cpts.{name}: missing")
            continue
        if tuple(cpt.parent_states) != tuple(config.classes):
            problems.append(f"cpts.{name}: parent states {list(cpt.parent_states)} "
                            f"do not match the class order {list(config.classes)}")
        expected = _expected_child_width(name, config.bins)
        if len(cpt.child_states) != expected:
            problems.append(f"cpts.{name}: {len(cpt.child_states)} child states, expected {expected}")
        problems.extend(cpt_row_violations(cpt.rows, len(config.classes),
                                           len(cpt.child_states), name=f"cpts.{name}"))
    for name in config.cpts:
        if name not in CHILD_ORDER:
            problems.append(f"cpts.{name}: unknown evidence child")
    return problems


def _vacuous(n: int) -> tuple[float, ...]:
    return tuple(1.0 for _ in range(n))


def evaluate_snapshot(snapshot: FeatureSnapshot, config: DetectorConfig) -> BeliefReport:
    """Classify one period's snapshot (window fields left zeroed)."""
    bins = config.bins
    evidence: dict[str, tuple[float, ...]] = {
        "request_intensity": bin_to_likelihood(snapshot.request_intensity, bins.request_intensity),
        "error_intensity": bin_to_likelihood(snapshot.error_intensity, bins.error_intensity),
        "parse_error_intensity": bin_to_likelihood(
            snapshot.parse_error_intensity, bins.parse_error_intensity),
        "destinations": bin_to_likelihood(snapshot.n_destinations, bins.destinations),
        "rtp_ports": bin_to_likelihood(snapshot.n_rtp_ports, bins.rtp_ports),
        "waiting_dialogs": bin_to_likelihood(snapshot.max_waiting, bins.waiting_dialogs),
    }
    # A period with no requests (or no responses) contributes no evidence at
    # that leaf; its likelihood is vacuous rather than an all-zero veto.
    counts = tuple(float(c) for c in snapshot.request_counts)
    evidence["request_methods"] = counts if any(counts) else _vacuous(len(counts))
    counts = tuple(float(c) for c in snapshot.response_counts)
    evidence["response_classes"] = counts if any(counts) else _vacuous(len(counts))

    active = [name for name in CHILD_ORDER if name in config.cpts]
    to_parent = {
        name: likelihood_to_parent(config.cpts[name], evidence[name]) for name in active
    }

    prior = config.effective_prior()
    zeros = tuple(0.0 for _ in config.classes)
    try:
        fused, normalized = fuse_likelihoods([to_parent[name] for name in active])
    except ContradictoryEvidence:
        # the rejected product is exactly the all-zero vector
        return BeliefReport(0, 0.0, 0.0, 0, False, snapshot, evidence, to_parent,
                            zeros, zeros, INDETERMINATE)
    try:
        bel = belief(prior, normalized)
    except ContradictoryEvidence:
        return BeliefReport(0, 0.0, 0.0, 0, False, snapshot, evidence, to_parent,
                            fused, zeros, INDETERMINATE)
    verdict = config.classes[max(range(len(bel)), key=bel.__getitem__)]
    return BeliefReport(0, 0.0, 0.0, 0, False, snapshot, evidence, to_parent,
                        fused, bel, verdict)


class _PipelineState:
    def __init__(self, config: DetectorConfig):
        self.config = config
        self.tracker = DialogTracker(idle_timeout=config.idle_timeout)
        self.features = FeatureExtractor(config.decay.request, config.decay.error,
                                         config.decay.parse)
        self.period_id = 0
        self.period_start: float | None = None
        self.events_in_period = 0
        self.last_event_time = 0.0
        self.reports_emitted = 0

    def observe(self, event: TraceEvent) -> list[BeliefReport]:
        reports = []
        if self.period_start is None:
            self.period_start = event.timestamp
        seconds = self.config.period.elapsed_seconds
        if seconds is not None:
            while event.timestamp >= self.period_start + seconds:
                reports.append(self._close(self.period_start + seconds, partial=False))
        self._ingest(event)
        count = self.config.period.event_count
        if count is not None and self.events_in_period >= count:
            reports.append(self._close(event.timestamp, partial=False))
        return reports

    def flush(self) -> list[BeliefReport]:
        if self.period_start is None:
            self.period_start = 0.0
            return [self._close(0.0, partial=True)]
        if self.events_in_period > 0 or self.reports_emitted == 0:
            return [self._close(self.last_event_time, partial=True)]
        return []

    def _ingest(self, event: TraceEvent) -> None:
        self.events_in_period += 1
        self.last_event_time = event.timestamp
        self.features.record(event)
        if not isinstance(event.payload, ParseFailure):
            self.tracker.ingest(event)

    def _close(self, end: float, partial: bool) -> BeliefReport:
        tracker_values = self.tracker.period_snapshot_and_reset()
        snapshot = self.features.snapshot_and_reset(tracker_values, end)
        evaluated = evaluate_snapshot(snapshot, self.config)
        report = BeliefReport(
            period_id=self.period_id,
            start=self.period_start if self.period_start is not None else 0.0,
            end=end,
            n_events=self.events_in_period,
            partial=partial,
            snapshot=snapshot,
            child_evidence=evaluated.child_evidence,
            child_likelihoods=evaluated.child_likelihoods,
            fused=evaluated.fused,
            belief=evaluated.belief,
            verdict=evaluated.verdict,
        )
        self.period_id += 1
        self.period_start = end
        self.events_in_period = 0
        self.reports_emitted += 1
        return report


def run(events: Iterable[TraceEvent], config: DetectorConfig) -> Iterator[BeliefReport]:
    """Run the detector over an event stream, yielding one report per period.

    The final partial period is always flushed; an empty trace still yields
    a single (empty) period report.
    """
    problems = validate_config(config)
    if problems:
        raise ConfigurationError(problems)
    state = _PipelineState(config)
    for event in events:
        yield from state.observe(event)
    yield from state.flush()


def alert_for(report: BeliefReport, config: DetectorConfig) -> Alert | None:
    """Alert on confident non-NORMAL verdicts; indeterminate periods never alert."""
    if report.verdict in ("NORMAL", INDETERMINATE):
        return None
    confidence = report.belief[config.classes.index(report.verdict)]
    if confidence < config.alert_threshold:
        return None
    return Alert(report.period_id, report.verdict, confidence,
                 report.start, report.end, report.child_likelihoods)
