"""Dialog correlation and the stateful observables derived from it.

Tracks, per inference period: the high-water mark of dialogs waiting for an
ACK, the set of distinct destinations of dialog-opening requests, and the
RTP ports opened by successfully negotiated sessions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

from .sdp import message_media_ports
from .sip import MethodCategory, SipMessage, TraceEvent, method_category

DEFAULT_IDLE_TIMEOUT = 300.0


class DialogState(enum.Enum):
    INITIATED = "initiated"
    WAITING_ACK = "waiting-ack"
    CONFIRMED = "confirmed"
    TERMINATED = "terminated"


class StateChange(NamedTuple):
    """Notice emitted by ingest; useful for tests and explain output."""

    kind: str
    call_id: str


@dataclass
class DialogRecord:
    call_id: str
    state: DialogState
    destination: str
    last_event_time: float
    opened_by_invite: bool = False
    final_status: int | None = None
    # Ports advertised in the offer/answer; credited once the dialog confirms.
    sdp_ports: set[int] = field(default_factory=set)


class DialogTracker:
    """Single-writer tracker keyed by Call-ID.

    A dialog enters the waiting state when a final response (status >= 200,
    CSeq method INVITE) is seen before its ACK, and leaves it on that ACK.
    Provisional responses never enter waiting. Orphan ACKs are inert: the
    waiting counter can never go negative.
    """

    def __init__(self, idle_timeout: float = DEFAULT_IDLE_TIMEOUT):
        self.idle_timeout = idle_timeout
        self.dialogs: dict[str, DialogRecord] = {}
        self.waiting_now = 0
        self.waiting_max = 0
        self.destinations: set[str] = set()
        self.rtp_ports_opened: set[int] = set()
        self._last_sweep = 0.0

    def ingest(self, event: TraceEvent) -> list[StateChange]:
        """Advance dialog state for one parsed message event.

        Parse failures must not reach the tracker; they are evidence for the
        feature layer only.
        """
        msg = event.payload
        if not isinstance(msg, SipMessage):
            raise TypeError("tracker ingests parsed messages only")
        self._sweep_idle(event.timestamp)
        if msg.is_request:
            return self._ingest_request(msg, event.timestamp)
        return self._ingest_response(msg, event.timestamp)

    def period_snapshot_and_reset(self) -> tuple[int, int, int]:
        """Close the period: return (waiting_max, destinations, rtp ports).

        Resets the high-water mark to the current waiting count and clears
        the per-period sets; live dialog state persists across periods.
        """
        values = (self.waiting_max, len(self.destinations), len(self.rtp_ports_opened))
        self.waiting_max = self.waiting_now
        self.destinations.clear()
        self.rtp_ports_opened.clear()
        return values

    # -- request handling ---------------------------------------------------

    def _ingest_request(self, msg: SipMessage, now: float) -> list[StateChange]:
        cat = method_category(msg)
        dialog = self.dialogs.get(msg.call_id)

        if cat is MethodCategory.ACK:
            if dialog is None or dialog.state is not DialogState.WAITING_ACK:
                return [StateChange("orphan-ack", msg.call_id)]
            dialog.last_event_time = now
            self.waiting_now -= 1
            if dialog.final_status is not None and dialog.final_status < 300:
                dialog.state = DialogState.CONFIRMED
                self.rtp_ports_opened.update(dialog.sdp_ports)
                return [StateChange("confirmed", msg.call_id)]
            dialog.state = DialogState.TERMINATED
            return [StateChange("terminated", msg.call_id)]

        if cat is MethodCategory.BYE:
            if dialog is None:
                return [StateChange("orphan-request", msg.call_id)]
            dialog.last_event_time = now
            if dialog.state is DialogState.WAITING_ACK:
                self.waiting_now -= 1
            dialog.state = DialogState.TERMINATED
            return [StateChange("terminated", msg.call_id)]

        if cat is MethodCategory.CANCEL:
            # The INVITE transaction still completes (487 then ACK); nothing
            # to do here beyond keeping the dialog alive.
            if dialog is None:
                return [StateChange("orphan-request", msg.call_id)]
            dialog.last_event_time = now
            return []

        if dialog is None:
            dialog = DialogRecord(
                call_id=msg.call_id,
                state=DialogState.INITIATED,
                destination=msg.request_uri or "",
                last_event_time=now,
                opened_by_invite=cat is MethodCategory.INVITE,
            )
            self.dialogs[msg.call_id] = dialog
            self.destinations.add(dialog.destination)
            dialog.sdp_ports.update(message_media_ports(msg))
            return [StateChange("dialog-opened", msg.call_id)]

        # In-dialog request (e.g. re-INVITE); media renegotiation is out of scope.
        dialog.last_event_time = now
        return []

    # -- response handling --------------------------------------------------

    def _ingest_response(self, msg: SipMessage, now: float) -> list[StateChange]:
        dialog = self.dialogs.get(msg.call_id)
        if dialog is None:
            return [StateChange("orphan-response", msg.call_id)]
        dialog.last_event_time = now

        code = msg.status_code or 0
        to_invite = msg.cseq_method.upper() == "INVITE"

        if to_invite and 200 <= code < 300:
            dialog.sdp_ports.update(message_media_ports(msg))

        if dialog.opened_by_invite and to_invite and code >= 200:
            if dialog.state is DialogState.INITIATED:
                dialog.state = DialogState.WAITING_ACK
                dialog.final_status = code
                self.waiting_now += 1
                self.waiting_max = max(self.waiting_max, self.waiting_now)
                return [StateChange("waiting-entered", msg.call_id)]
            return []

        if not dialog.opened_by_invite and code >= 200:
            # Non-INVITE transactions have no ACK; a final response ends them.
            dialog.state = DialogState.TERMINATED
            return [StateChange("terminated", msg.call_id)]
        return []

    # -- housekeeping ---------------------------------------------------------

    def _sweep_idle(self, now: float) -> None:
        if now - self._last_sweep < self.idle_timeout:
            return
        self._last_sweep = now
        stale = [d for d in self.dialogs.values()
                 if now - d.last_event_time > self.idle_timeout]
        for dialog in stale:
            if dialog.state is DialogState.WAITING_ACK:
                self.waiting_now -= 1
            dialog.state = DialogState.TERMINATED
            del self.dialogs[dialog.call_id]
