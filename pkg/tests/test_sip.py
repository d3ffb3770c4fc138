"""Parser and field-extraction tests."""

import random

import pytest
from hypothesis import given, strategies as st

from sipguard.sip import (
    MessageKind,
    MethodCategory,
    ParseFailure,
    SipMessage,
    destination_of,
    error_indicator,
    method_category,
    parse_message,
    response_class,
    source_of,
)

from support import make_request, make_response, mutate_sip

REFERENCE_ACK = (
    "ACK sip:UserB@there.com SIP/2.0\r\n"
    "Via: SIP/2.0/UDP ss2.wcom.com:5060;branch=721e418c4.1\r\n"
    "Via: SIP/2.0/UDP ss1.wcom.com:5060;branch=2d4790.1\r\n"
    "Via: SIP/2.0/UDP here.com:5060\r\n"
    "From: BigGuy <sip:UserA@here.com>\r\n"
    "To: LittleGuy <sip:UserB@there.com> ;tag=314159\r\n"
    "Call-ID: 12345601@here.com\r\n"
    "CSeq: 1 ACK\r\n"
    "Content-Length: 0\r\n"
)


class TestReferenceAck:
    def test_all_fields(self):
        msg = parse_message(REFERENCE_ACK)
        assert isinstance(msg, SipMessage)
        assert msg.kind is MessageKind.REQUEST
        assert msg.method == "ACK"
        assert msg.request_uri == "sip:UserB@there.com"
        assert msg.status_code is None
        assert msg.via_chain == (
            "SIP/2.0/UDP ss2.wcom.com:5060;branch=721e418c4.1",
            "SIP/2.0/UDP ss1.wcom.com:5060;branch=2d4790.1",
            "SIP/2.0/UDP here.com:5060",
        )
        assert msg.from_uri == "sip:UserA@here.com"
        assert msg.to_uri == "sip:UserB@there.com"
        assert msg.call_id == "12345601@here.com"
        assert msg.cseq_number == 1
        assert msg.cseq_method == "ACK"
        assert msg.body is None

    def test_source_is_bottommost_via(self):
        msg = parse_message(REFERENCE_ACK)
        assert source_of(msg) == "here.com:5060"

    def test_destination_is_request_uri(self):
        msg = parse_message(REFERENCE_ACK)
        assert destination_of(msg) == "sip:UserB@there.com"


class TestSourceOf:
    def test_single_via(self):
        msg = parse_message(make_request("INVITE", "sip:x@y", "c1", via_host="a.b:5070"))
        assert source_of(msg) == "a.b:5070"

    def test_three_vias_bottommost_wins(self):
        raw = (
            "INVITE sip:x@y SIP/2.0\r\n"
            "Via: SIP/2.0/UDP top.example:5060;branch=z9hG4bK1\r\n"
            "Via: SIP/2.0/UDP mid.example:5062\r\n"
            "Via: SIP/2.0/UDP origin.example:5064;received=1.2.3.4\r\n"
            "From: <sip:a@top.example>\r\nTo: <sip:x@y>\r\n"
            "Call-ID: c3\r\nCSeq: 1 INVITE\r\n"
        )
        msg = parse_message(raw)
        assert source_of(msg) == "origin.example:5064"

    def test_response_uses_topmost_via(self):
        msg = parse_message(make_response(200, "OK", "c1", "1 INVITE", via_host="ret.example:5060"))
        assert source_of(msg) == "ret.example:5060"


class TestDestinationOf:
    def test_uri_matching_to_header(self):
        msg = parse_message(make_request("INVITE", "sip:x@y", "c1", to_value="<sip:x@y>"))
        assert destination_of(msg) == "sip:x@y"

    def test_request_uri_wins_over_to_header(self):
        msg = parse_message(
            make_request("INVITE", "sip:real@y", "c1", to_value="<sip:logical@y>"))
        assert destination_of(msg) == "sip:real@y"
        assert msg.to_uri == "sip:logical@y"

    def test_rejected_for_responses(self):
        msg = parse_message(make_response(404, "Not Found", "c1", "1 INVITE"))
        with pytest.raises(ValueError):
            destination_of(msg)


@pytest.mark.parametrize("method,category", [
    ("INVITE", MethodCategory.INVITE),
    ("REGISTER", MethodCategory.REGISTER),
    ("ACK", MethodCategory.ACK),
    ("CANCEL", MethodCategory.CANCEL),
    ("BYE", MethodCategory.BYE),
    ("OPTIONS", MethodCategory.OTHER),
    ("SUBSCRIBE", MethodCategory.OTHER),
    ("invite", MethodCategory.INVITE),
    ("Bye", MethodCategory.BYE),
])
def test_method_category(method, category):
    msg = parse_message(make_request(method, "sip:x@y", "c1", cseq=f"1 {method.upper()}"))
    assert method_category(msg) is category


class TestResponseClass:
    @pytest.mark.parametrize("code,cls", [(404, 4), (100, 1), (699, 6), (200, 2), (301, 3)])
    def test_classes(self, code, cls):
        assert response_class(code) == cls

    @pytest.mark.parametrize("code", [99, 700, 0, -1, 1000])
    def test_out_of_range(self, code):
        with pytest.raises(ValueError):
            response_class(code)

    @pytest.mark.parametrize("code,flag", [(503, 1), (200, 0), (300, 1), (299, 0), (699, 1)])
    def test_error_indicator(self, code, flag):
        assert error_indicator(code) == flag

    def test_indicator_matches_class_over_full_range(self):
        for code in range(100, 700):
            assert error_indicator(code) == (1 if response_class(code) >= 3 else 0)


class TestParseFailures:
    def test_empty_string(self):
        failure = parse_message("")
        assert isinstance(failure, ParseFailure)
        assert "start line" in failure.reason

    def test_whitespace_only(self):
        assert isinstance(parse_message("  \r\n \r\n"), ParseFailure)

    @pytest.mark.parametrize("header", ["Via", "From", "To", "Call-ID", "CSeq"])
    def test_missing_mandatory_header(self, header):
        failure = parse_message(make_request("INVITE", "sip:x@y", "c1", drop=(header,)))
        assert isinstance(failure, ParseFailure)
        assert header in failure.reason

    def test_unparsable_status_code(self):
        assert isinstance(parse_message("SIP/2.0 ABC Nope\r\nVia: x\r\n"), ParseFailure)

    @pytest.mark.parametrize("code", [99, 700, 999])
    def test_status_code_out_of_range(self, code):
        failure = parse_message(make_response(code, "Odd", "c1", "1 INVITE"))
        assert isinstance(failure, ParseFailure)

    def test_malformed_request_line(self):
        assert isinstance(parse_message("INVITE sip:x@y\r\nVia: x\r\n"), ParseFailure)

    def test_malformed_cseq(self):
        raw = make_request("INVITE", "sip:x@y", "c1").replace("CSeq: 1 INVITE", "CSeq: nope")
        assert isinstance(parse_message(raw), ParseFailure)

    def test_header_line_without_colon(self):
        raw = make_request("INVITE", "sip:x@y", "c1").replace(
            "Call-ID: c1", "Call-ID c1")
        assert isinstance(parse_message(raw), ParseFailure)


class TestMinimalResponse:
    # Smallest response the grammar admits: status line plus the five
    # mandatory headers, checked field by field against RFC 3261 7.2.
    def test_404(self):
        raw = (
            "SIP/2.0 404 Not Found\r\n"
            "Via: SIP/2.0/UDP here.com:5060\r\n"
            "From: <sip:a@here.com>\r\n"
            "To: <sip:b@there.com>\r\n"
            "Call-ID: m1\r\n"
            "CSeq: 1 INVITE\r\n"
        )
        msg = parse_message(raw)
        assert isinstance(msg, SipMessage)
        assert msg.kind is MessageKind.RESPONSE
        assert msg.status_code == 404
        assert msg.reason == "Not Found"
        assert msg.method is None and msg.request_uri is None
        assert response_class(msg.status_code) == 4


class TestLenientForms:
    def test_compact_headers_normalized(self):
        raw = (
            "INVITE sip:x@y SIP/2.0\r\n"
            "v: SIP/2.0/UDP short.example:5060\r\n"
            "f: <sip:a@short.example>\r\n"
            "t: <sip:x@y>\r\n"
            "i: compact1\r\n"
            "CSeq: 1 INVITE\r\n"
        )
        msg = parse_message(raw)
        assert isinstance(msg, SipMessage)
        assert msg.call_id == "compact1"
        assert msg.via_chain == ("SIP/2.0/UDP short.example:5060",)
        assert dict(msg.headers)["From"] == "<sip:a@short.example>"

    def test_multi_value_via_split(self):
        raw = (
            "INVITE sip:x@y SIP/2.0\r\n"
            "Via: SIP/2.0/UDP one.example:5060, SIP/2.0/UDP two.example:5061\r\n"
            "From: <sip:a@one.example>\r\nTo: <sip:x@y>\r\n"
            "Call-ID: mv1\r\nCSeq: 1 INVITE\r\n"
        )
        msg = parse_message(raw)
        assert msg.via_chain == ("SIP/2.0/UDP one.example:5060", "SIP/2.0/UDP two.example:5061")
        assert source_of(msg) == "two.example:5061"

    def test_lf_only_line_endings(self):
        msg = parse_message(REFERENCE_ACK.replace("\r\n", "\n"))
        assert isinstance(msg, SipMessage)
        assert msg.call_id == "12345601@here.com"

    def test_folded_header_unfolds(self):
        raw = REFERENCE_ACK.replace(
            "To: LittleGuy <sip:UserB@there.com> ;tag=314159",
            "To: LittleGuy\r\n <sip:UserB@there.com> ;tag=314159")
        msg = parse_message(raw)
        assert isinstance(msg, SipMessage)
        assert msg.to_uri == "sip:UserB@there.com"


class TestRoundTrip:
    @pytest.mark.parametrize("raw", [
        REFERENCE_ACK,
        make_request("INVITE", "sip:a@b.example", "rt1", sdp_port=30000),
        make_request("REGISTER", "sip:b.example", "rt2", cseq="20 REGISTER"),
        make_response(180, "Ringing", "rt3", "1 INVITE"),
        make_response(200, "OK", "rt4", "1 INVITE", sdp_port=30002),
    ])
    def test_parse_serialize_parse(self, raw):
        first = parse_message(raw)
        assert isinstance(first, SipMessage)
        second = parse_message(first.to_text())
        assert second == first

    def test_compact_form_roundtrips_after_normalization(self):
        raw = "BYE sip:x@y SIP/2.0\r\nv: SIP/2.0/UDP h:1\r\nf: <sip:a@h>\r\n" \
              "t: <sip:x@y>\r\ni: rt5\r\nCSeq: 2 BYE\r\n"
        first = parse_message(raw)
        assert isinstance(first, SipMessage)
        assert parse_message(first.to_text()) == first


class TestTotality:
    def test_seeded_fuzz_never_raises(self):
        rng = random.Random(1234)
        for _ in range(1000):
            result = parse_message(mutate_sip(rng))
            assert isinstance(result, (SipMessage, ParseFailure))

    @given(st.text(max_size=300))
    def test_arbitrary_text_never_raises(self, text):
        assert isinstance(parse_message(text), (SipMessage, ParseFailure))
