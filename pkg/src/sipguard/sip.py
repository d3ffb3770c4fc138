"""SIP message model and parser for the traffic subset the detector consumes.

Parsing is total: any input text yields either a :class:`SipMessage` or a
:class:`ParseFailure`, never an exception. Parse failures are first-class
events because the detector counts them as evidence.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass


class MessageKind(enum.Enum):
    REQUEST = "request"
    RESPONSE = "response"


class Direction(enum.Enum):
    INCOMING = "in"
    OUTGOING = "out"


class MethodCategory(enum.Enum):
    """Request methods tracked in the request distribution."""

    INVITE = "INVITE"
    REGISTER = "REGISTER"
    ACK = "ACK"
    CANCEL = "CANCEL"
    BYE = "BYE"
    OTHER = "OTHER"


# Order of the request-distribution vector; OTHER is excluded by contract.
METHOD_CATEGORIES = (
    MethodCategory.INVITE,
    MethodCategory.REGISTER,
    MethodCategory.ACK,
    MethodCategory.CANCEL,
    MethodCategory.BYE,
)

# RFC 3261 §7.3.3: compact header forms must be accepted; normalized here.
_COMPACT_FORMS = {
    "v": "Via",
    "f": "From",
    "t": "To",
    "i": "Call-ID",
    "m": "Contact",
    "l": "Content-Length",
    "c": "Content-Type",
}

_CANONICAL_NAMES = {
    h.lower(): h
    for h in ("Via", "From", "To", "Call-ID", "CSeq", "Contact",
              "Content-Length", "Content-Type")
}

# RFC 3261 §8.1.1: headers a minimal valid message cannot do without.
_MANDATORY = ("Via", "From", "To", "Call-ID", "CSeq")

_STATUS_LINE = re.compile(r"^SIP/\d+\.\d+\s+(\d{3})(?:\s+(.*))?$")


@dataclass(frozen=True)
class ParseFailure:
    """A message that could not be parsed; still an event (drives PEI)."""

    reason: str
    raw: str


@dataclass(frozen=True)
class SipMessage:
    """Parsed request or response, restricted to the headers the model uses.

    ``headers`` preserves every header in order of appearance (Via values
    split one per entry, compact names expanded), so serializing and
    re-parsing yields an equal message.
    """

    kind: MessageKind
    method: str | None
    request_uri: str | None
    status_code: int | None
    reason: str | None
    headers: tuple[tuple[str, str], ...]
    via_chain: tuple[str, ...]
    from_uri: str
    to_uri: str
    call_id: str
    cseq_number: int
    cseq_method: str
    contact_uri: str | None
    body: bytes | None
    content_type: str | None

    @property
    def is_request(self) -> bool:
        return self.kind is MessageKind.REQUEST

    @property
    def is_response(self) -> bool:
        return self.kind is MessageKind.RESPONSE

    def start_line(self) -> str:
        if self.is_request:
            return f"{self.method} {self.request_uri} SIP/2.0"
        return f"SIP/2.0 {self.status_code} {self.reason}".rstrip()

    def to_text(self) -> str:
        """Serialize back to wire text (CRLF line endings)."""
        lines = [self.start_line()]
        lines.extend(f"{name}: {value}" for name, value in self.headers)
        text = "\r\n".join(lines) + "\r\n"
        if self.body is not None:
            text += "\r\n" + self.body.decode("utf-8", errors="replace")
        return text


@dataclass(frozen=True)
class TraceEvent:
    """One ingestion unit: a captured message or a failed parse.

    Timestamps are seconds (fractional) since the trace epoch and must be
    non-decreasing within a trace.
    """

    timestamp: float
    direction: Direction
    payload: SipMessage | ParseFailure
    raw: str

    @classmethod
    def from_raw(cls, timestamp: float, direction: Direction, raw: str) -> "TraceEvent":
        return cls(timestamp, direction, parse_message(raw), raw)

    @property
    def is_failure(self) -> bool:
        return isinstance(self.payload, ParseFailure)


def _extract_uri(header_value: str) -> str:
    """Pull the URI out of a name-addr or addr-spec header value.

    Handles ``Display Name <sip:user@host>;params`` and bare
    ``sip:user@host;params`` forms.
    """
    value = header_value.strip()
    if "<" in value and ">" in value:
        return value[value.index("<") + 1:value.index(">")].strip()
    return value.split(";", 1)[0].strip()


def _via_sent_by(via_value: str) -> str:
    """Extract host[:port] from a Via value like ``SIP/2.0/UDP host:port;branch=..``."""
    parts = via_value.split(None, 1)
    sent_by = parts[1] if len(parts) > 1 else parts[0]
    return sent_by.split(";", 1)[0].strip()


def parse_message(raw: str) -> SipMessage | ParseFailure:
    """Parse raw SIP text into a message, or describe why it cannot be.

    Accepts CRLF or LF line endings. Header folding (continuation lines)
    is unfolded; comma-separated Via values are split into chain entries.
    """
    if not raw or not raw.strip():
        return ParseFailure("missing start line", raw)

    normalized = raw.replace("\r\n", "\n")
    head, _, body_text = normalized.partition("\n\n")
    lines = head.split("\n")

    start = lines[0].strip()
    if not start:
        return ParseFailure("missing start line", raw)

    method = request_uri = reason = None
    status_code = None
    if start.upper().startswith("SIP/"):
        kind = MessageKind.RESPONSE
        m = _STATUS_LINE.match(start)
        if m is None:
            return ParseFailure(f"unparsable status line: {start!r}", raw)
        status_code = int(m.group(1))
        reason = (m.group(2) or "").strip()
        if not 100 <= status_code <= 699:
            return ParseFailure(f"status code out of range: {status_code}", raw)
    else:
        kind = MessageKind.REQUEST
        parts = start.split(None, 2)
        if len(parts) != 3 or not parts[2].upper().startswith("SIP/"):
            return ParseFailure(f"malformed request line: {start!r}", raw)
        method, request_uri = parts[0], parts[1]

    headers: list[tuple[str, str]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line[0] in " \t":
            # RFC 3261 §7.3.1: folded continuation of the previous header.
            if not headers:
                return ParseFailure(f"continuation line before any header (line {lineno})", raw)
            name, value = headers[-1]
            headers[-1] = (name, f"{value} {line.strip()}")
            continue
        name, sep, value = line.partition(":")
        if not sep or not name.strip():
            return ParseFailure(f"malformed header line: {line!r}", raw)
        name = name.strip()
        canonical = _COMPACT_FORMS.get(name.lower(), _CANONICAL_NAMES.get(name.lower(), name))
        value = value.strip()
        if canonical == "Via":
            # One chain entry per value; multi-value Via lines are split and
            # empty entries dropped so the chain never holds blank hops.
            for entry in value.split(","):
                if entry.strip():
                    headers.append(("Via", entry.strip()))
        else:
            headers.append((canonical, value))

    by_name: dict[str, str] = {}
    via_chain: list[str] = []
    for name, value in headers:
        if name == "Via":
            via_chain.append(value)
        else:
            by_name.setdefault(name.lower(), value)

    missing = [h for h in _MANDATORY
               if (h == "Via" and not via_chain) or (h != "Via" and h.lower() not in by_name)]
    if missing:
        return ParseFailure(f"missing mandatory header(s): {', '.join(missing)}", raw)

    cseq_parts = by_name["cseq"].split(None, 1)
    if len(cseq_parts) != 2 or not cseq_parts[0].isdigit():
        return ParseFailure(f"malformed CSeq header: {by_name['cseq']!r}", raw)
    cseq_number, cseq_method = int(cseq_parts[0]), cseq_parts[1].strip()

    contact = by_name.get("contact")
    body = body_text.encode("utf-8") if body_text else None

    return SipMessage(
        kind=kind,
        method=method,
        request_uri=request_uri,
        status_code=status_code,
        reason=reason,
        headers=tuple(headers),
        via_chain=tuple(via_chain),
        from_uri=_extract_uri(by_name["from"]),
        to_uri=_extract_uri(by_name["to"]),
        call_id=by_name["call-id"],
        cseq_number=cseq_number,
        cseq_method=cseq_method,
        contact_uri=_extract_uri(contact) if contact else None,
        body=body,
        content_type=by_name.get("content-type"),
    )


def source_of(msg: SipMessage) -> str:
    """Network endpoint (host[:port]) a message came from.

    For requests this is the bottommost Via entry (where the response will
    be routed back to); for responses, the topmost Via (the return path).
    """
    if not msg.via_chain:
        raise ValueError("message has no Via chain")
    via = msg.via_chain[-1] if msg.is_request else msg.via_chain[0]
    return _via_sent_by(via)


def destination_of(msg: SipMessage) -> str:
    """Destination URI of a request: the request-URI from the start line."""
    if not msg.is_request:
        raise ValueError("destination_of applies to requests only")
    assert msg.request_uri is not None
    return msg.request_uri


def method_category(msg: SipMessage) -> MethodCategory:
    """Classify a request's method; unrecognized methods map to OTHER."""
    if not msg.is_request:
        raise ValueError("method_category applies to requests only")
    assert msg.method is not None
    try:
        return MethodCategory(msg.method.upper())
    except ValueError:
        return MethodCategory.OTHER


def response_class(status_code: int) -> int:
    """Response class 1..6 (the leading digit of the status code)."""
    if not 100 <= status_code <= 699:
        raise ValueError(f"status code out of range: {status_code}")
    return status_code // 100


def error_indicator(status_code: int) -> int:
    """1 for error responses (code >= 300), else 0."""
    return 1 if response_class(status_code) >= 3 else 0
