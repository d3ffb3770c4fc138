"""Trace file format and synthetic scenario generation.

A trace is line-delimited JSON: one header record followed by one record
per event carrying timestamp, direction, and the raw SIP text. Keeping the
raw text in the file means every analysis run exercises the parser.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .sip import Direction, TraceEvent

TRACE_VERSION = 1


class TraceFormatError(ValueError):
    pass


class ScenarioKind(enum.Enum):
    SCAN = "SCAN"
    DOS = "DOS"
    SPIT = "SPIT"
    PASSWORD_CRACKING = "PASSWORD_CRACKING"
    NORMAL = "NORMAL"


@dataclass
class TraceHeader:
    version: int = TRACE_VERSION
    epoch: float = 0.0
    description: str = ""
    label: str | None = None


@dataclass
class TraceFile:
    header: TraceHeader
    events: list[TraceEvent] = field(default_factory=list)


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of a synthetic labeled scenario."""

    kind: ScenarioKind
    count: int = 9
    inter_dialog_spacing: float = 5.0
    intra_dialog_spacing: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.inter_dialog_spacing < 0 or self.intra_dialog_spacing < 0:
            raise ValueError("spacings must be >= 0")


def write_trace(trace: TraceFile, path: str | Path) -> None:
    header: dict = {
        "version": trace.header.version,
        "epoch": trace.header.epoch,
        "description": trace.header.description,
    }
    if trace.header.label is not None:
        header["label"] = trace.header.label
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for event in trace.events:
            record = {"t": event.timestamp, "dir": event.direction.value, "raw": event.raw}
            fh.write(json.dumps(record) + "\n")


def read_trace(path: str | Path) -> TraceFile:
    """Read a trace file, parsing each raw message into an event payload.

    Raises :class:`TraceFormatError` naming the offending line on version
    mismatch, malformed records, or timestamp regression.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise TraceFormatError(f"{path}: empty file, missing header")

    try:
        header_doc = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"{path}: line 1: invalid header: {exc}") from exc
    if not isinstance(header_doc, dict) or "version" not in header_doc:
        raise TraceFormatError(f"{path}: line 1: header must carry a version field")
    if header_doc["version"] != TRACE_VERSION:
        raise TraceFormatError(
            f"{path}: line 1: unsupported version {header_doc['version']!r}")
    header = TraceHeader(
        version=header_doc["version"],
        epoch=float(header_doc.get("epoch", 0.0)),
        description=str(header_doc.get("description", "")),
        label=header_doc.get("label"),
    )

    events: list[TraceEvent] = []
    previous_t: float | None = None
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"{path}: line {lineno}: invalid record: {exc}") from exc
        if (not isinstance(record, dict)
                or not isinstance(record.get("t"), (int, float))
                or record.get("dir") not in ("in", "out")
                or not isinstance(record.get("raw"), str)):
            raise TraceFormatError(
                f"{path}: line {lineno}: record needs numeric 't', 'dir' in/out, and 'raw' text")
        t = float(record["t"])
        if previous_t is not None and t < previous_t:
            raise TraceFormatError(
                f"{path}: line {lineno}: timestamp {t} regresses below {previous_t}")
        previous_t = t
        events.append(TraceEvent.from_raw(t, Direction(record["dir"]), record["raw"]))
    return TraceFile(header, events)


# -- message builders ---------------------------------------------------------


def _sdp_body(host: str, port: int) -> str:
    return (f"v=0\r\no=- 0 0 IN IP4 {host}\r\ns=-\r\n"
            f"c=IN IP4 {host}\r\nt=0 0\r\nm=audio {port} RTP/AVP 0 8\r\n")


def _request(method: str, uri: str, via: str, from_value: str, to_value: str,
             call_id: str, cseq: str, contact: str | None = None,
             body: str | None = None) -> str:
    lines = [
        f"{method} {uri} SIP/2.0",
        f"Via: {via}",
        "Max-Forwards: 70",
        f"From: {from_value}",
        f"To: {to_value}",
        f"Call-ID: {call_id}",
        f"CSeq: {cseq}",
    ]
    if contact:
        lines.append(f"Contact: <{contact}>")
    if body is not None:
        lines.append("Content-Type: application/sdp")
        lines.append(f"Content-Length: {len(body)}")
        return "\r\n".join(lines) + "\r\n\r\n" + body
    lines.append("Content-Length: 0")
    return "\r\n".join(lines) + "\r\n"


def _response(code: int, reason: str, via: str, from_value: str, to_value: str,
              call_id: str, cseq: str, contact: str | None = None,
              body: str | None = None, extra: tuple[str, ...] = ()) -> str:
    lines = [
        f"SIP/2.0 {code} {reason}",
        f"Via: {via}",
        f"From: {from_value}",
        f"To: {to_value}",
        f"Call-ID: {call_id}",
        f"CSeq: {cseq}",
    ]
    lines.extend(extra)
    if contact:
        lines.append(f"Contact: <{contact}>")
    if body is not None:
        lines.append("Content-Type: application/sdp")
        lines.append(f"Content-Length: {len(body)}")
        return "\r\n".join(lines) + "\r\n\r\n" + body
    lines.append("Content-Length: 0")
    return "\r\n".join(lines) + "\r\n"


# -- scenario generation -------------------------------------------------------

_ATTACKER = "203.0.113.9"
_TARGET_DOMAIN = "target.example"
_TARGET_HOST = "198.51.100.20"

# Outcome sequence of the reference scan: mostly misses, one ringing number
# the caller cancels, one answered call the caller hangs up on.
_SCAN_OUTCOMES = (
    "not-found", "incomplete", "unavailable", "ringing-cancel",
    "not-found", "incomplete", "unavailable", "answered-bye", "not-found",
)


class _DialogBuilder:
    """Assembles one dialog's messages with shared identifiers."""

    def __init__(self, rng: random.Random, uri: str, from_value: str, to_value: str,
                 source_host: str, requests_direction: Direction):
        self.uri = uri
        self.from_value = f"{from_value};tag={rng.getrandbits(32):08x}"
        self.to_value = to_value
        self.to_tag = f";tag={rng.getrandbits(32):08x}"
        self.call_id = f"{rng.getrandbits(48):012x}@{source_host}"
        self.via = f"SIP/2.0/UDP {source_host}:5060;branch=z9hG4bK{rng.getrandbits(48):012x}"
        self.req_dir = requests_direction
        self.resp_dir = (Direction.OUTGOING if requests_direction is Direction.INCOMING
                         else Direction.INCOMING)
        self.messages: list[tuple[Direction, str]] = []

    def request(self, method: str, cseq: str, body: str | None = None,
                contact: str | None = None, to_tagged: bool = False) -> None:
        to_value = self.to_value + (self.to_tag if to_tagged else "")
        self.messages.append((self.req_dir, _request(
            method, self.uri, self.via, self.from_value, to_value,
            self.call_id, cseq, contact=contact, body=body)))

    def response(self, code: int, reason: str, cseq: str, body: str | None = None,
                 contact: str | None = None, extra: tuple[str, ...] = ()) -> None:
        tagged_to = self.to_value + (self.to_tag if code > 100 else "")
        self.messages.append((self.resp_dir, _response(
            code, reason, self.via, self.from_value, tagged_to,
            self.call_id, cseq, contact=contact, body=body, extra=extra)))


def _scan_dialog(rng: random.Random, index: int, outcome: str) -> list[tuple[Direction, str]]:
    extension = 100 + index
    uri = f"sip:{extension}@{_TARGET_DOMAIN}"
    d = _DialogBuilder(rng, uri, f"<sip:probe@{_ATTACKER}>", f"<{uri}>",
                       _ATTACKER, Direction.INCOMING)
    offer = _sdp_body(_ATTACKER, rng.randrange(10000, 30000) * 2)
    d.request("INVITE", "1 INVITE", body=offer, contact=f"sip:probe@{_ATTACKER}:5060")
    if outcome == "not-found":
        d.response(404, "Not Found", "1 INVITE")
        d.request("ACK", "1 ACK", to_tagged=True)
    elif outcome == "incomplete":
        d.response(484, "Address Incomplete", "1 INVITE")
        d.request("ACK", "1 ACK", to_tagged=True)
    elif outcome == "unavailable":
        d.response(100, "Trying", "1 INVITE")
        d.response(503, "Service Unavailable", "1 INVITE")
        d.request("ACK", "1 ACK", to_tagged=True)
    elif outcome == "ringing-cancel":
        d.response(100, "Trying", "1 INVITE")
        d.response(180, "Ringing", "1 INVITE")
        d.request("CANCEL", "1 CANCEL")
        d.response(200, "OK", "1 CANCEL")
        d.response(487, "Request Terminated", "1 INVITE")
        d.request("ACK", "1 ACK", to_tagged=True)
    elif outcome == "answered-bye":
        answer = _sdp_body(_TARGET_HOST, rng.randrange(10000, 30000) * 2)
        d.response(100, "Trying", "1 INVITE")
        d.response(180, "Ringing", "1 INVITE")
        d.response(200, "OK", "1 INVITE", body=answer,
                   contact=f"sip:{extension}@{_TARGET_HOST}:5060")
        d.request("ACK", "1 ACK", to_tagged=True)
        d.request("BYE", "2 BYE", to_tagged=True)
        d.response(200, "OK", "2 BYE")
    else:
        raise ValueError(f"unknown scan outcome: {outcome}")
    return d.messages


def _dos_dialog(rng: random.Random, index: int) -> list[tuple[Direction, str]]:
    uri = f"sip:victim@{_TARGET_DOMAIN}"
    d = _DialogBuilder(rng, uri, f"<sip:flood{index}@{_ATTACKER}>", f"<{uri}>",
                       _ATTACKER, Direction.INCOMING)
    d.request("INVITE", "1 INVITE", contact=f"sip:flood@{_ATTACKER}:5060")
    d.response(503, "Service Unavailable", "1 INVITE")
    return d.messages


def _answered_call(rng: random.Random, uri: str, caller: str, caller_host: str,
                   callee_host: str, requests_direction: Direction,
                   caller_port: int) -> list[tuple[Direction, str]]:
    d = _DialogBuilder(rng, uri, f"<{caller}>", f"<{uri}>",
                       caller_host, requests_direction)
    answer_port = rng.randrange(10000, 30000) * 2
    d.request("INVITE", "1 INVITE", body=_sdp_body(caller_host, caller_port),
              contact=f"{caller};transport=udp")
    d.response(100, "Trying", "1 INVITE")
    d.response(180, "Ringing", "1 INVITE")
    d.response(200, "OK", "1 INVITE", body=_sdp_body(callee_host, answer_port),
               contact=f"sip:{callee_host}:5060")
    d.request("ACK", "1 ACK", to_tagged=True)
    d.request("BYE", "2 BYE", to_tagged=True)
    d.response(200, "OK", "2 BYE")
    return d.messages


def _register_cycle(rng: random.Random, index: int) -> list[tuple[Direction, str]]:
    account = f"sip:admin@{_TARGET_DOMAIN}"
    d = _DialogBuilder(rng, f"sip:{_TARGET_DOMAIN}", f"<{account}>", f"<{account}>",
                       _ATTACKER, Direction.INCOMING)
    d.request("REGISTER", f"{index + 1} REGISTER", contact=f"sip:admin@{_ATTACKER}:5060")
    nonce = f"{rng.getrandbits(64):016x}"
    d.response(401, "Unauthorized", f"{index + 1} REGISTER", extra=(
        f'WWW-Authenticate: Digest realm="{_TARGET_DOMAIN}", nonce="{nonce}"',))
    return d.messages


def generate(spec: ScenarioSpec) -> TraceFile:
    """Generate a labeled synthetic scenario; deterministic under the seed."""
    rng = random.Random(spec.seed)
    dialogs: list[list[tuple[Direction, str]]] = []
    if spec.kind is ScenarioKind.SCAN:
        dialogs = [_scan_dialog(rng, i, _SCAN_OUTCOMES[i % len(_SCAN_OUTCOMES)])
                   for i in range(spec.count)]
    elif spec.kind is ScenarioKind.DOS:
        dialogs = [_dos_dialog(rng, i) for i in range(spec.count)]
    elif spec.kind is ScenarioKind.SPIT:
        # A spam bot reuses one media port across its campaign.
        bot_port = rng.randrange(10000, 30000) * 2
        dialogs = [
            _answered_call(rng, f"sip:user{i}@{_TARGET_DOMAIN}",
                           f"sip:promo@{_ATTACKER}", _ATTACKER, _TARGET_HOST,
                           Direction.INCOMING, bot_port)
            for i in range(spec.count)
        ]
    elif spec.kind is ScenarioKind.PASSWORD_CRACKING:
        dialogs = [_register_cycle(rng, i) for i in range(spec.count)]
    elif spec.kind is ScenarioKind.NORMAL:
        dialogs = [
            _answered_call(rng, f"sip:peer{i}@partner.example",
                           "sip:alice@office.example", "office.example",
                           "partner.example", Direction.OUTGOING,
                           rng.randrange(10000, 30000) * 2)
            for i in range(spec.count)
        ]
    else:
        raise ValueError(f"unsupported scenario kind: {spec.kind}")

    events: list[TraceEvent] = []
    for i, messages in enumerate(dialogs):
        start = i * spec.inter_dialog_spacing
        for j, (direction, raw) in enumerate(messages):
            t = round(start + j * spec.intra_dialog_spacing, 6)
            events.append(TraceEvent.from_raw(t, direction, raw))
    events.sort(key=lambda e: e.timestamp)

    header = TraceHeader(
        description=(f"synthetic {spec.kind.value} scenario: count={spec.count}, "
                     f"spacing={spec.inter_dialog_spacing}s/{spec.intra_dialog_spacing}s, "
                     f"seed={spec.seed}"),
        label=spec.kind.value,
    )
    return TraceFile(header, events)
