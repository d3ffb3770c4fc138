"""Shared builders, fuzzers, and independent oracles for the test suite.

The oracles here deliberately reimplement behavior from scratch (no calls
into the package's own logic) so tests check two separate routes.
"""

from __future__ import annotations

import math
import random

from sipguard.sip import Direction, ParseFailure, SipMessage, TraceEvent


def make_request(method: str, uri: str, call_id: str, cseq: str | None = None,
                 via_host: str = "198.51.100.7:5060",
                 from_value: str = "<sip:tester@198.51.100.7>",
                 to_value: str | None = None,
                 sdp_port: int | None = None,
                 drop: tuple[str, ...] = ()) -> str:
    """Minimal valid request text; ``drop`` removes named headers for error tests."""
    cseq = cseq or f"1 {method}"
    to_value = to_value or f"<{uri}>"
    headers = [
        ("Via", f"SIP/2.0/UDP {via_host};branch=z9hG4bKtest"),
        ("From", from_value),
        ("To", to_value),
        ("Call-ID", call_id),
        ("CSeq", cseq),
    ]
    lines = [f"{method} {uri} SIP/2.0"]
    lines += [f"{n}: {v}" for n, v in headers if n not in drop]
    if sdp_port is not None:
        body = f"v=0\r\no=- 0 0 IN IP4 x\r\ns=-\r\nt=0 0\r\nm=audio {sdp_port} RTP/AVP 0\r\n"
        lines.append("Content-Type: application/sdp")
        lines.append(f"Content-Length: {len(body)}")
        return "\r\n".join(lines) + "\r\n\r\n" + body
    lines.append("Content-Length: 0")
    return "\r\n".join(lines) + "\r\n"


def make_response(code: int, reason: str, call_id: str, cseq: str,
                  via_host: str = "198.51.100.7:5060",
                  from_value: str = "<sip:tester@198.51.100.7>",
                  to_value: str = "<sip:peer@example.net>",
                  sdp_port: int | None = None,
                  drop: tuple[str, ...] = ()) -> str:
    headers = [
        ("Via", f"SIP/2.0/UDP {via_host};branch=z9hG4bKtest"),
        ("From", from_value),
        ("To", to_value),
        ("Call-ID", call_id),
        ("CSeq", cseq),
    ]
    lines = [f"SIP/2.0 {code} {reason}"]
    lines += [f"{n}: {v}" for n, v in headers if n not in drop]
    if sdp_port is not None:
        body = f"v=0\r\no=- 0 0 IN IP4 x\r\ns=-\r\nt=0 0\r\nm=audio {sdp_port} RTP/AVP 0\r\n"
        lines.append("Content-Type: application/sdp")
        lines.append(f"Content-Length: {len(body)}")
        return "\r\n".join(lines) + "\r\n\r\n" + body
    lines.append("Content-Length: 0")
    return "\r\n".join(lines) + "\r\n"


def event(t: float, raw: str, direction: Direction = Direction.INCOMING) -> TraceEvent:
    return TraceEvent.from_raw(t, direction, raw)


# -- parser fuzzing -----------------------------------------------------------

_FUZZ_SEEDS = (
    make_request("INVITE", "sip:a@b.example", "fz1", sdp_port=20002),
    make_request("ACK", "sip:a@b.example", "fz1", cseq="1 ACK"),
    make_response(200, "OK", "fz1", "1 INVITE", sdp_port=20004),
    make_response(486, "Busy Here", "fz2", "2 INVITE"),
    "OPTIONS sip:ping@b.example SIP/2.0\r\nVia: SIP/2.0/UDP c.example\r\n"
    "From: <sip:x@c.example>\r\nTo: <sip:ping@b.example>\r\nCall-ID: fz3\r\n"
    "CSeq: 9 OPTIONS\r\nContent-Length: 0\r\n",
)

_NOISE = "\x00\x01\r\n\t ;:=<>@\"\\,\u00e9\u4e2d"


def mutate_sip(rng: random.Random) -> str:
    """One randomly mangled SIP text: truncations, swaps, noise, deletions."""
    text = rng.choice(_FUZZ_SEEDS)
    for _ in range(rng.randint(1, 4)):
        op = rng.randrange(6)
        if op == 0 and text:
            cut = rng.randrange(len(text))
            text = text[:cut]
        elif op == 1:
            lines = text.split("\r\n")
            rng.shuffle(lines)
            text = "\r\n".join(lines)
        elif op == 2 and text:
            pos = rng.randrange(len(text))
            text = text[:pos] + rng.choice(_NOISE) + text[pos:]
        elif op == 3:
            lines = text.split("\r\n")
            if lines:
                del lines[rng.randrange(len(lines))]
            text = "\r\n".join(lines)
        elif op == 4 and text:
            pos = rng.randrange(len(text))
            text = text[:pos] + chr(rng.randrange(32, 127)) + text[pos + 1:]
        else:
            text = text.replace(" ", rng.choice(["", "  ", "\t"]), 1)
    return text


# -- random dialog traces and the waiting-state oracle --------------------------


def random_dialog_trace(rng: random.Random, max_dialogs: int = 6) -> list[TraceEvent]:
    """Interleaved INVITE dialogs with missing ACKs, BYEs, and orphan ACKs."""
    scripts = []
    for d in range(rng.randint(1, max_dialogs)):
        call_id = f"dlg{d}@test"
        uri = f"sip:u{rng.randrange(20)}@example.net"
        msgs = [make_request("INVITE", uri, call_id)]
        if rng.random() < 0.4:
            msgs.append(make_response(180, "Ringing", call_id, "1 INVITE"))
        has_final = rng.random() < 0.85
        if has_final:
            code = rng.choice((200, 200, 404, 486, 503, 603))
            msgs.append(make_response(code, "Final", call_id, "1 INVITE"))
            if rng.random() < 0.7:
                msgs.append(make_request("ACK", uri, call_id, cseq="1 ACK"))
            elif rng.random() < 0.3:
                msgs.append(make_request("BYE", uri, call_id, cseq="2 BYE"))
        # Random dialog start, cumulative in-dialog gaps: dialogs interleave
        # freely but each one stays causally ordered.
        t = rng.uniform(0, 30)
        for raw in msgs:
            scripts.append((t, raw))
            t += rng.uniform(0.01, 2.0)
    for _ in range(rng.randrange(3)):
        scripts.append((rng.uniform(0, 40),
                        make_request("ACK", "sip:ghost@example.net",
                                     f"orphan{rng.randrange(100)}@test", cseq="1 ACK")))
    scripts.sort(key=lambda pair: pair[0])
    return [event(t, raw) for t, raw in scripts]


def waiting_high_water_oracle(events: list[TraceEvent]) -> int:
    """Brute-force replay: max number of INVITE dialogs answered but not ACKed.

    Independent of the tracker: walks the raw event list and recounts the
    waiting set from scratch after every event.
    """
    opened_by_invite: set[str] = set()
    answered_at: dict[str, int] = {}
    closed_at: dict[str, int] = {}
    parsed: list[tuple[int, SipMessage]] = [
        (i, e.payload) for i, e in enumerate(events)
        if not isinstance(e.payload, ParseFailure)
    ]
    for i, msg in parsed:
        cid = msg.call_id
        if msg.is_request and msg.method.upper() == "INVITE":
            opened_by_invite.add(cid)
        elif (msg.is_response and cid in opened_by_invite
              and msg.cseq_method.upper() == "INVITE"
              and msg.status_code >= 200 and cid not in answered_at):
            answered_at[cid] = i
        elif (msg.is_request and msg.method.upper() in ("ACK", "BYE")
              and cid in answered_at and cid not in closed_at):
            closed_at[cid] = i

    high = 0
    for i, _ in parsed:
        waiting = sum(
            1 for cid, a in answered_at.items()
            if a <= i and closed_at.get(cid, math.inf) > i
        )
        high = max(high, waiting)
    return high
