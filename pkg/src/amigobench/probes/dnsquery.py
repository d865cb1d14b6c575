"""Minimal DNS-over-UDP probe.

Implements just enough of the wire format for timing: one A/IN question,
no EDNS. The decoder handles name compression pointers so responses from
standard resolvers parse too.
"""

from __future__ import annotations

import secrets
import socket
import struct
import time
from dataclasses import dataclass
from typing import Optional

from amigobench.domain.classify import classify_resolver
from amigobench.domain.records import DnsResult
from amigobench.errors import ParseError, ValidationError
from amigobench.probes.meter import ByteMeter

DEFAULT_TIMEOUT_S = 5.0
FLAG_RD = 0x0100
FLAG_QR = 0x8000
TYPE_A = 1
CLASS_IN = 1


def encode_name(domain: str) -> bytes:
    """Encode a domain as length-prefixed labels."""
    if not domain or len(domain) > 253:
        raise ValidationError(f"domain: bad length {domain!r}")
    out = bytearray()
    for label in domain.rstrip(".").split("."):
        raw = label.encode("ascii")
        if not 1 <= len(raw) <= 63:
            raise ValidationError(f"domain: bad label {label!r}")
        out.append(len(raw))
        out.extend(raw)
    out.append(0)
    return bytes(out)


def build_query(txn_id: int, domain: str) -> bytes:
    """Build a recursion-desired A/IN query."""
    header = struct.pack(">HHHHHH", txn_id, FLAG_RD, 1, 0, 0, 0)
    return header + encode_name(domain) + struct.pack(">HH", TYPE_A, CLASS_IN)


def skip_name(data: bytes, offset: int) -> int:
    """Return the offset just past a (possibly compressed) name."""
    while True:
        if offset >= len(data):
            raise ParseError("dns: truncated name")
        length = data[offset]
        if length == 0:
            return offset + 1
        if length & 0xC0 == 0xC0:
            return offset + 2  # compression pointer terminates the name
        offset += 1 + length


def parse_query(data: bytes) -> tuple[int, str]:
    """Decode a query's transaction id and question name (server side).

    Raises:
        ParseError: on truncated or non-query packets.
    """
    if len(data) < 12:
        raise ParseError("dns: packet shorter than header")
    txn_id, flags, qdcount, _, _, _ = struct.unpack(">HHHHHH", data[:12])
    if flags & FLAG_QR:
        raise ParseError("dns: not a query")
    if qdcount < 1:
        raise ParseError("dns: no question")
    labels = []
    offset = 12
    while True:
        if offset >= len(data):
            raise ParseError("dns: truncated question")
        length = data[offset]
        if length == 0:
            break
        if length & 0xC0:
            raise ParseError("dns: compressed question name")
        labels.append(data[offset + 1 : offset + 1 + length].decode("ascii"))
        offset += 1 + length
    return txn_id, ".".join(labels)


def build_response(
    txn_id: int, domain: str, rcode: int, addresses: tuple[str, ...] = ()
) -> bytes:
    """Build a response with A records (server side).

    The answer name uses a compression pointer to the question, which
    also exercises the client decoder's pointer path.
    """
    flags = FLAG_QR | FLAG_RD | 0x0080 | (rcode & 0xF)  # RA set
    header = struct.pack(">HHHHHH", txn_id, flags, 1, len(addresses), 0, 0)
    question = encode_name(domain) + struct.pack(">HH", TYPE_A, CLASS_IN)
    answers = b""
    for address in addresses:
        rdata = bytes(int(part) for part in address.split("."))
        answers += struct.pack(">HHHIH", 0xC00C, TYPE_A, CLASS_IN, 60, 4) + rdata
    return header + question + answers


@dataclass(frozen=True)
class DnsAnswer:
    """Decoded response: transaction id, response code, A-record addresses."""

    txn_id: int
    rcode: int
    addresses: tuple[str, ...]


def parse_response(data: bytes) -> DnsAnswer:
    """Decode a response, extracting A records.

    Raises:
        ParseError: on truncated or non-response packets.
    """
    if len(data) < 12:
        raise ParseError("dns: packet shorter than header")
    txn_id, flags, qdcount, ancount, _, _ = struct.unpack(">HHHHHH", data[:12])
    if not flags & FLAG_QR:
        raise ParseError("dns: not a response")
    rcode = flags & 0x000F
    offset = 12
    for _ in range(qdcount):
        offset = skip_name(data, offset) + 4  # qtype + qclass
    addresses = []
    for _ in range(ancount):
        offset = skip_name(data, offset)
        if offset + 10 > len(data):
            raise ParseError("dns: truncated answer")
        rtype, rclass, _, rdlength = struct.unpack(
            ">HHIH", data[offset : offset + 10]
        )
        offset += 10
        rdata = data[offset : offset + rdlength]
        if len(rdata) != rdlength:
            raise ParseError("dns: truncated rdata")
        offset += rdlength
        if rtype == TYPE_A and rclass == CLASS_IN and rdlength == 4:
            addresses.append(".".join(str(b) for b in rdata))
    return DnsAnswer(txn_id=txn_id, rcode=rcode, addresses=tuple(addresses))


def probe_dns(
    domain: str,
    resolver_ip: str,
    port: int = 53,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    meter: Optional[ByteMeter] = None,
) -> DnsResult:
    """Time one A lookup against one resolver.

    A timeout yields success=False with lookup_ms equal to the timeout;
    a malformed or mismatched response also yields success=False.
    """
    resolver_class = classify_resolver(resolver_ip)
    meter = meter if meter is not None else ByteMeter()
    txn_id = secrets.randbelow(0x10000)
    query = build_query(txn_id, domain)
    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sock.settimeout(timeout_s)
    try:
        start = time.perf_counter()
        sock.sendto(query, (resolver_ip, port))
        meter.add(len(query))
        try:
            data, _ = sock.recvfrom(4096)
        except socket.timeout:
            return DnsResult(
                domain=domain,
                resolver_ip=resolver_ip,
                resolver_class=resolver_class,
                lookup_ms=timeout_s * 1000,
                success=False,
            )
        lookup_ms = (time.perf_counter() - start) * 1000
        meter.add(len(data))
    except OSError:
        return DnsResult(
            domain=domain,
            resolver_ip=resolver_ip,
            resolver_class=resolver_class,
            lookup_ms=timeout_s * 1000,
            success=False,
        )
    finally:
        sock.close()
    try:
        answer = parse_response(data)
    except ParseError:
        return DnsResult(
            domain=domain,
            resolver_ip=resolver_ip,
            resolver_class=resolver_class,
            lookup_ms=lookup_ms,
            success=False,
        )
    success = (
        answer.txn_id == txn_id and answer.rcode == 0 and len(answer.addresses) > 0
    )
    return DnsResult(
        domain=domain,
        resolver_ip=resolver_ip,
        resolver_class=resolver_class,
        lookup_ms=lookup_ms,
        success=success,
    )
