"""Trace files.

Text: ``key=value`` header lines (kind, n, seed, base, element_size,
generator and any workload parameters), one blank line, then one decimal
address per line.

Binary: the 8-byte magic ``VATTRC01``, the address count as a little-endian
u64, the addresses as little-endian u64, then the text header lines as a
UTF-8 trailer.  Both formats round-trip a Trace exactly.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .errors import TraceFormatError
from .workloads import GENERATOR, Trace, WorkloadKind

__all__ = ["MAGIC", "dumps_text", "loads_text", "dumps_binary", "loads_binary",
           "write_trace", "read_trace"]

MAGIC = b"VATTRC01"
_HEAD = struct.Struct("<8sQ")
_INT_PARAMS = ("stride", "queries")


def _header(trace: Trace) -> list[str]:
    lines = [
        f"kind={trace.kind.value if trace.kind else 'external'}",
        f"n={trace.n}",
        f"seed={trace.seed}",
        f"base={trace.base}",
        f"element_size={trace.element_size}",
        f"generator={trace.generator}",
    ]
    lines += [f"{k}={trace.params[k]}" for k in sorted(trace.params)]
    return lines


def _build(meta: dict, addresses: np.ndarray) -> Trace:
    try:
        kind_text = meta.pop("kind")
        n = int(meta.pop("n"))
        seed = int(meta.pop("seed", 0))
        base = int(meta.pop("base", 0))
        es = int(meta.pop("element_size", 1))
        generator = meta.pop("generator", GENERATOR)
        params = {k: int(meta.pop(k)) for k in _INT_PARAMS if k in meta}
    except (KeyError, ValueError) as exc:
        raise TraceFormatError(f"bad trace header: {exc}") from None
    if meta:
        raise TraceFormatError(f"unknown header keys: {sorted(meta)}")
    kind = None if kind_text == "external" else WorkloadKind.parse(kind_text)
    if es < 1:
        raise TraceFormatError("element_size must be positive")
    rel = addresses - base
    if len(rel) and (rel.min() < 0 or (rel % es).any()):
        raise TraceFormatError("addresses do not match base and element_size")
    return Trace(kind=kind, n=n, seed=seed, base=base, element_size=es,
                 accesses=rel // es, params=params, generator=generator)


def _parse_header(lines) -> dict:
    meta = {}
    for line in lines:
        key, sep, value = line.partition("=")
        if not sep or not key:
            raise TraceFormatError(f"bad header line {line!r}")
        meta[key.strip()] = value.strip()
    return meta


def dumps_text(trace: Trace) -> str:
    body = "\n".join(str(a) for a in trace.addresses.tolist())
    return "\n".join(_header(trace)) + "\n\n" + body + ("\n" if body else "")


def loads_text(text: str) -> Trace:
    head, sep, body = text.partition("\n\n")
    if not sep:
        raise TraceFormatError("missing blank line after header")
    meta = _parse_header(head.splitlines())
    try:
        addrs = np.array([int(x) for x in body.split()], dtype=np.int64)
    except ValueError as exc:
        raise TraceFormatError(f"bad address line: {exc}") from None
    return _build(meta, addrs)


def dumps_binary(trace: Trace) -> bytes:
    addrs = trace.addresses
    if len(addrs) and addrs.min() < 0:
        raise TraceFormatError("negative address")
    out = io.BytesIO()
    out.write(_HEAD.pack(MAGIC, len(addrs)))
    out.write(addrs.astype("<u8").tobytes())
    out.write(("\n".join(_header(trace)) + "\n").encode())
    return out.getvalue()


def loads_binary(data: bytes) -> Trace:
    if len(data) < _HEAD.size:
        raise TraceFormatError("truncated header")
    magic, count = _HEAD.unpack_from(data)
    if magic != MAGIC:
        raise TraceFormatError(f"bad magic {magic!r}")
    end = _HEAD.size + 8 * count
    if len(data) < end:
        raise TraceFormatError("truncated address block")
    addrs = np.frombuffer(data, dtype="<u8", count=count, offset=_HEAD.size)
    if count and addrs.max() >= 1 << 63:
        raise TraceFormatError("address exceeds 63 bits")
    try:
        trailer = data[end:].decode()
    except UnicodeDecodeError:
        raise TraceFormatError("trailer is not UTF-8") from None
    meta = _parse_header(l for l in trailer.splitlines() if l)
    return _build(meta, addrs.astype(np.int64))


def write_trace(path: Union[str, Path], trace: Trace, binary: bool = False):
    path = Path(path)
    if binary:
        path.write_bytes(dumps_binary(trace))
    else:
        path.write_text(dumps_text(trace))


def read_trace(path: Union[str, Path]) -> Trace:
    """Read either format; binary files are recognized by their magic."""
    data = Path(path).read_bytes()
    if data.startswith(MAGIC):
        return loads_binary(data)
    if data[:8].startswith(b"VATTRC"):
        raise TraceFormatError(f"bad magic {data[:8]!r}")
    try:
        text = data.decode()
    except UnicodeDecodeError:
        raise TraceFormatError("not a trace file (bad magic)") from None
    return loads_text(text)
