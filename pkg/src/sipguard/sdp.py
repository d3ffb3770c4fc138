"""Minimal SDP inspection: the media ports a session offers or answers with."""

from __future__ import annotations

from .sip import SipMessage


def media_ports(body: bytes | str) -> list[int]:
    """Ports from SDP m-lines, e.g. ``m=audio 49170 RTP/AVP 0`` -> 49170.

    Out-of-range or non-numeric port fields are skipped; this never raises.
    """
    text = body.decode("utf-8", errors="replace") if isinstance(body, bytes) else body
    ports = []
    for line in text.splitlines():
        line = line.strip()
        if not line.startswith("m="):
            continue
        fields = line[2:].split()
        if len(fields) < 2 or not fields[1].isdigit():
            continue
        port = int(fields[1])
        if 1 <= port <= 65535:
            ports.append(port)
    return ports


def message_media_ports(msg: SipMessage) -> list[int]:
    """Media ports carried by a message's SDP body, if any."""
    if msg.body is None or msg.content_type is None:
        return []
    if not msg.content_type.lower().startswith("application/sdp"):
        return []
    return media_ports(msg.body)
