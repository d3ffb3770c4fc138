"""Streaming features: decayed intensities, distributions, and binning.

Intensities follow ``value <- value * e^(k * dt) + increment`` with k <= 0.
The request intensity measures dt chronologically; the error-response and
parse-error intensities tick once per update event of their own kind, so a
value of n events means n updates. Intensities survive period boundaries
(decay alone bounds them); distributions and high-water marks reset.
"""

from __future__ import annotations

import bisect
import enum
import math
from collections import Counter
from dataclasses import dataclass

from .sip import (
    METHOD_CATEGORIES,
    MethodCategory,
    ParseFailure,
    SipMessage,
    TraceEvent,
    error_indicator,
    method_category,
    response_class,
)


class ClockMode(enum.Enum):
    CHRONOLOGICAL = "chronological"
    EVENT_COUNT = "event-count"


@dataclass(frozen=True)
class DecayedCounter:
    """Exponentially decayed count; immutable, updates return a new value."""

    k: float
    mode: ClockMode = ClockMode.CHRONOLOGICAL
    value: float = 0.0
    last_tick: float = 0.0

    def __post_init__(self):
        if self.k > 0:
            raise ValueError(f"decay constant must be <= 0, got {self.k}")
        if self.value < 0:
            raise ValueError("counter value cannot be negative")

    def update(self, now: float, increment: float) -> "DecayedCounter":
        """Decay from the last tick to ``now`` and add ``increment``."""
        if now < self.last_tick:
            raise ValueError(f"clock went backwards: {now} < {self.last_tick}")
        if increment < 0:
            raise ValueError("increment cannot be negative")
        new_value = self.value * math.exp(self.k * (now - self.last_tick)) + increment
        return DecayedCounter(self.k, self.mode, new_value, now)

    def value_at(self, now: float) -> float:
        """Read the decayed value at ``now`` without updating."""
        if now < self.last_tick:
            raise ValueError(f"clock went backwards: {now} < {self.last_tick}")
        return self.value * math.exp(self.k * (now - self.last_tick))


def half_life(k: float) -> float:
    """Time (or event count) for a decayed value to halve: ln(2) / -k."""
    if k >= 0:
        raise ValueError(f"half-life requires a negative decay constant, got {k}")
    return math.log(2.0) / -k


def bin_to_likelihood(value: float, boundaries: tuple[float, ...] | list[float]) -> tuple[float, ...]:
    """One-hot likelihood over the category containing ``value``.

    Categories are [0, b1], (b1, b2], ..., (b_last, inf): upper bounds are
    inclusive, so a value exactly on a boundary falls in the lower interval.
    """
    if not boundaries or any(later <= earlier for later, earlier in zip(boundaries[1:], boundaries)):
        raise ValueError(f"boundaries must be non-empty and strictly increasing: {boundaries}")
    if value < 0:
        raise ValueError(f"cannot bin a negative value: {value}")
    index = bisect.bisect_left(boundaries, value)
    vector = [0.0] * (len(boundaries) + 1)
    vector[index] = 1.0
    return tuple(vector)


@dataclass(frozen=True)
class BinningScheme:
    """Interval upper bounds per binned observable."""

    request_intensity: tuple[float, ...] = (10.0,)
    error_intensity: tuple[float, ...] = (4.0,)
    parse_error_intensity: tuple[float, ...] = (4.0,)
    destinations: tuple[float, ...] = (7.0,)
    rtp_ports: tuple[float, ...] = (10.0,)
    waiting_dialogs: tuple[float, ...] = (10.0,)


@dataclass(frozen=True)
class FeatureSnapshot:
    """The eight observed values at the end of one inference period."""

    request_intensity: float
    error_intensity: float
    parse_error_intensity: float
    n_destinations: int
    max_waiting: int
    n_rtp_ports: int
    request_counts: tuple[int, int, int, int, int]
    response_counts: tuple[int, int, int, int, int, int]


DEFAULT_K_REQUEST = -0.35
DEFAULT_K_ERROR = -0.15
DEFAULT_K_PARSE = -0.15


class FeatureExtractor:
    """Single-writer feature state fed by the engine's event sequence."""

    def __init__(self, k_request: float = DEFAULT_K_REQUEST,
                 k_error: float = DEFAULT_K_ERROR,
                 k_parse: float = DEFAULT_K_PARSE):
        self._request_rate = DecayedCounter(k_request, ClockMode.CHRONOLOGICAL)
        self._error_rate = DecayedCounter(k_error, ClockMode.EVENT_COUNT)
        self._parse_rate = DecayedCounter(k_parse, ClockMode.EVENT_COUNT)
        self._responses_seen = 0
        self._failures_seen = 0
        self._request_counts: Counter[MethodCategory] = Counter()
        self._response_counts: Counter[int] = Counter()

    def record(self, event: TraceEvent) -> None:
        """Fold one event into the running features."""
        payload = event.payload
        if isinstance(payload, ParseFailure):
            self._failures_seen += 1
            self._parse_rate = self._parse_rate.update(self._failures_seen, 1.0)
            return
        if payload.is_request:
            self._request_rate = self._request_rate.update(event.timestamp, 1.0)
            category = method_category(payload)
            if category is not MethodCategory.OTHER:
                self._request_counts[category] += 1
            return
        assert payload.status_code is not None
        self._responses_seen += 1
        self._error_rate = self._error_rate.update(
            self._responses_seen, float(error_indicator(payload.status_code)))
        self._response_counts[response_class(payload.status_code)] += 1

    def snapshot_and_reset(self, tracker_values: tuple[int, int, int],
                           period_end: float) -> FeatureSnapshot:
        """Emit the period's snapshot; distributions reset, intensities persist."""
        waiting_max, n_destinations, n_rtp_ports = tracker_values
        snapshot = FeatureSnapshot(
            request_intensity=self._request_rate.value_at(period_end),
            error_intensity=self._error_rate.value,
            parse_error_intensity=self._parse_rate.value,
            n_destinations=n_destinations,
            max_waiting=waiting_max,
            n_rtp_ports=n_rtp_ports,
            request_counts=tuple(self._request_counts[c] for c in METHOD_CATEGORIES),
            response_counts=tuple(self._response_counts[c] for c in range(1, 7)),
        )
        self._request_counts.clear()
        self._response_counts.clear()
        return snapshot
