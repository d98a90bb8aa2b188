"""Encoder/decoder for the OpenFlow time extension messages.

All fields are big-endian.  Pad octets are zeroed on encode and ignored (with
a debug log line) on decode.  Decoding failures raise :class:`WireError`
carrying the byte offset and a dotted field path.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from struct import calcsize
from typing import Optional

log = logging.getLogger(__name__)

OFP_VERSION = 0x06

OFPT_ERROR = 1
OFPT_BUNDLE_CONTROL = 33
OFPT_BUNDLE_ADD_MESSAGE = 34

OFP_HEADER_PACK_STR = "!BBHI"
OFP_HEADER_SIZE = 8
assert calcsize(OFP_HEADER_PACK_STR) == OFP_HEADER_SIZE

# bundle control types
OFPBCT_OPEN_REQUEST = 0
OFPBCT_OPEN_REPLY = 1
OFPBCT_CLOSE_REQUEST = 2
OFPBCT_CLOSE_REPLY = 3
OFPBCT_COMMIT_REQUEST = 4
OFPBCT_COMMIT_REPLY = 5
OFPBCT_DISCARD_REQUEST = 6
OFPBCT_DISCARD_REPLY = 7
BUNDLE_CTRL_TYPE_NAMES = {
    0: "OPEN_REQUEST", 1: "OPEN_REPLY", 2: "CLOSE_REQUEST", 3: "CLOSE_REPLY",
    4: "COMMIT_REQUEST", 5: "COMMIT_REPLY", 6: "DISCARD_REQUEST", 7: "DISCARD_REPLY",
}

# bundle flags
OFPBF_ATOMIC = 1 << 0
OFPBF_ORDERED = 1 << 1
OFPBF_TIME = 1 << 2

# bundle features request flags (a separate namespace from the bundle flags)
OFPBF_TIMESTAMP = 1 << 0
OFPBF_TIME_SET_SCHED = 1 << 1

OFPBPT_TIME = 1
OFPTMPBF_TIME_CAPABILITY = 0x1
OFPTMPBF_EXPERIMENTER = 0xFFFF
OFPMP_BUNDLE_FEATURES = 17

# error types and codes
OFPET_BAD_REQUEST = 1
OFPET_BUNDLE_FAILED = 17
OFPBRC_MULTIPART_BAD_SCHED = 16
OFPBFC_UNKNOWN = 0
OFPBFC_EPERM = 1
OFPBFC_BAD_ID = 2
OFPBFC_BUNDLE_EXIST = 3
OFPBFC_BUNDLE_CLOSED = 4
OFPBFC_OUT_OF_BUNDLES = 5
OFPBFC_BAD_TYPE = 6
OFPBFC_BAD_FLAGS = 7
OFPBFC_MSG_BAD_LEN = 8
OFPBFC_MSG_BAD_XID = 9
OFPBFC_MSG_UNSUP = 10
OFPBFC_MSG_CONFLICT = 11
OFPBFC_MSG_TOO_MANY = 12
OFPBFC_MSG_FAILED = 13
OFPBFC_TIMEOUT = 14
OFPBFC_BUNDLE_IN_PROGRESS = 15
OFPBFC_SCHED_NOT_SUPPORTED = 16
OFPBFC_SCHED_FUTURE = 17
OFPBFC_SCHED_PAST = 18

ERROR_CODE_NAMES = {
    OFPET_BUNDLE_FAILED: {
        0: "UNKNOWN", 1: "EPERM", 2: "BAD_ID", 3: "BUNDLE_EXIST", 4: "BUNDLE_CLOSED",
        5: "OUT_OF_BUNDLES", 6: "BAD_TYPE", 7: "BAD_FLAGS", 8: "MSG_BAD_LEN", 9: "MSG_BAD_XID",
        10: "MSG_UNSUP", 11: "MSG_CONFLICT", 12: "MSG_TOO_MANY", 13: "MSG_FAILED",
        14: "TIMEOUT", 15: "BUNDLE_IN_PROGRESS", 16: "SCHED_NOT_SUPPORTED",
        17: "SCHED_FUTURE", 18: "SCHED_PAST",
    },
    OFPET_BAD_REQUEST: {16: "MULTIPART_BAD_SCHED"},
}

OFP_TIME_PACK_STR = "!QI4x"
OFP_TIME_SIZE = 16
assert calcsize(OFP_TIME_PACK_STR) == OFP_TIME_SIZE

OFP_BUNDLE_PROP_TIME_PACK_STR0 = "!HH4x"
OFP_BUNDLE_PROP_TIME_PACK_STR0_SIZE = 8
OFP_BUNDLE_PROP_TIME_SIZE = 24
assert calcsize(OFP_BUNDLE_PROP_TIME_PACK_STR0) + OFP_TIME_SIZE == OFP_BUNDLE_PROP_TIME_SIZE

OFP_BUNDLE_CTRL_MSG_PACK_STR = "!IHH"
OFP_BUNDLE_CTRL_MSG_SIZE = 16
assert calcsize(OFP_BUNDLE_CTRL_MSG_PACK_STR) + OFP_HEADER_SIZE == OFP_BUNDLE_CTRL_MSG_SIZE

OFP_BUNDLE_ADD_MSG_PACK_STR = "!I2xH"
OFP_BUNDLE_ADD_MSG_SIZE = 16
assert calcsize(OFP_BUNDLE_ADD_MSG_PACK_STR) + OFP_HEADER_SIZE == OFP_BUNDLE_ADD_MSG_SIZE

OFP_BUNDLE_FEATURES_REQUEST_PACK_STR = "!I4x"
OFP_BUNDLE_FEATURES_REQUEST_SIZE = 8
assert calcsize(OFP_BUNDLE_FEATURES_REQUEST_PACK_STR) == OFP_BUNDLE_FEATURES_REQUEST_SIZE

OFP_BUNDLE_FEATURES_PACK_STR = "!H6x"
OFP_BUNDLE_FEATURES_SIZE = 8
assert calcsize(OFP_BUNDLE_FEATURES_PACK_STR) == OFP_BUNDLE_FEATURES_SIZE

OFP_BUNDLE_FEATURES_PROP_HEADER_PACK_STR = "!HH"
OFP_BUNDLE_FEATURES_PROP_HEADER_SIZE = 4
assert calcsize(OFP_BUNDLE_FEATURES_PROP_HEADER_PACK_STR) == OFP_BUNDLE_FEATURES_PROP_HEADER_SIZE

OFP_BUNDLE_FEATURES_PROP_TIME_0_PACK_STR = "!HH4x"
OFP_BUNDLE_FEATURES_PROP_TIME_0_SIZE = 8
OFP_BUNDLE_FEATURES_PROP_TIME_SIZE = 72
assert (calcsize(OFP_BUNDLE_FEATURES_PROP_TIME_0_PACK_STR) + 4 * OFP_TIME_SIZE
        == OFP_BUNDLE_FEATURES_PROP_TIME_SIZE)

OFP_ERROR_MSG_PACK_STR = "!HH"
OFP_ERROR_MSG_SIZE = 12
assert calcsize(OFP_ERROR_MSG_PACK_STR) + OFP_HEADER_SIZE == OFP_ERROR_MSG_SIZE

NS_PER_S = 1_000_000_000
_U16 = 0xFFFF


class WireError(ValueError):
    def __init__(self, message: str, offset: int = 0, path: str = ""):
        where = f" at offset {offset}" + (f" ({path})" if path else "")
        super().__init__(message + where)
        self.offset = offset
        self.path = path


def _unpack(fmt: str, buf: bytes, offset: int, path: str) -> tuple:
    size = calcsize(fmt)
    if len(buf) - offset < size:
        raise WireError(f"truncated: need {size} octets, have {max(0, len(buf) - offset)}", offset, path)
    return struct.unpack_from(fmt, buf, offset)


def _check_pad(buf: bytes, start: int, end: int, path: str):
    if any(buf[start:end]):
        log.debug("non-zero padding ignored at %d..%d (%s)", start, end, path)


def _check_uint(value, bits: int, name: str):
    if not isinstance(value, int) or not 0 <= value < (1 << bits):
        raise WireError(f"{name}={value!r} does not fit in {bits} unsigned bits", 0, name)


# -- time ----------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class OfpTime:
    seconds: int = 0
    nanoseconds: int = 0

    def __post_init__(self):
        _check_uint(self.seconds, 64, "seconds")
        _check_uint(self.nanoseconds, 32, "nanoseconds")
        if self.nanoseconds >= NS_PER_S:
            raise WireError(f"nanoseconds={self.nanoseconds} exceeds 10^9 - 1", 8, "nanoseconds")

    @classmethod
    def from_ns(cls, ns: int) -> "OfpTime":
        if ns < 0:
            raise WireError("time before the epoch is not representable", 0, "seconds")
        return cls(ns // NS_PER_S, ns % NS_PER_S)

    def to_ns(self) -> int:
        return self.seconds * NS_PER_S + self.nanoseconds

    def encode(self) -> bytes:
        return struct.pack(OFP_TIME_PACK_STR, self.seconds, self.nanoseconds)

    @classmethod
    def parse(cls, buf: bytes, offset: int = 0, path: str = "time") -> "OfpTime":
        sec, nsec = _unpack(OFP_TIME_PACK_STR, buf, offset, path)
        _check_pad(buf, offset + 12, offset + 16, path + ".pad")
        if nsec >= NS_PER_S:
            raise WireError(f"nanoseconds={nsec} exceeds 10^9 - 1", offset + 8, path + ".nanoseconds")
        return cls(sec, nsec)


@dataclass(frozen=True)
class TimeBundleProperty:
    scheduled_time: OfpTime = field(default_factory=OfpTime)
    prop_type = OFPBPT_TIME
    length = OFP_BUNDLE_PROP_TIME_SIZE

    def encode(self) -> bytes:
        return (struct.pack(OFP_BUNDLE_PROP_TIME_PACK_STR0, OFPBPT_TIME, OFP_BUNDLE_PROP_TIME_SIZE)
                + self.scheduled_time.encode())

    @classmethod
    def parse(cls, buf: bytes, offset: int = 0, path: str = "time_property") -> "TimeBundleProperty":
        ptype, length = _unpack(OFP_BUNDLE_PROP_TIME_PACK_STR0, buf, offset, path)
        if ptype != OFPBPT_TIME:
            raise WireError(f"unknown bundle property type {ptype}", offset, path + ".type")
        if length != OFP_BUNDLE_PROP_TIME_SIZE:
            raise WireError(f"time property length {length}, expected 24", offset + 2, path + ".length")
        _check_pad(buf, offset + 4, offset + 8, path + ".pad")
        return cls(OfpTime.parse(buf, offset + 8, path + ".scheduled_time"))


# -- bundle messages ---------------------------------------------------------

def _header(msg_type: int, length: int, xid: int, version: int = OFP_VERSION) -> bytes:
    if length > _U16:
        raise WireError(f"message length {length} exceeds 65535", 2, "header.length")
    return struct.pack(OFP_HEADER_PACK_STR, version, msg_type, length, xid)


def _parse_header(buf: bytes, expected_type: int, path: str) -> tuple:
    version, mtype, length, xid = _unpack(OFP_HEADER_PACK_STR, buf, 0, path + ".header")
    if mtype != expected_type:
        raise WireError(f"message type {mtype}, expected {expected_type}", 1, path + ".header.type")
    if length != len(buf):
        raise WireError(f"declared length {length} but buffer holds {len(buf)} octets", 2,
                        path + ".header.length")
    return version, length, xid


@dataclass(frozen=True)
class BundleControlMsg:
    bundle_id: int
    ctrl_type: int
    flags: int = 0
    time_property: Optional[TimeBundleProperty] = None
    xid: int = 0
    version: int = OFP_VERSION

    def __post_init__(self):
        _check_uint(self.bundle_id, 32, "bundle_id")
        _check_uint(self.flags, 16, "flags")
        _check_uint(self.xid, 32, "xid")
        if self.ctrl_type not in BUNDLE_CTRL_TYPE_NAMES:
            raise WireError(f"unknown bundle control type {self.ctrl_type}", 0, "type")

    @property
    def scheduled(self) -> bool:
        return self.ctrl_type == OFPBCT_COMMIT_REQUEST and bool(self.flags & OFPBF_TIME)

    def encode(self) -> bytes:
        timed = bool(self.flags & OFPBF_TIME)
        if timed and self.ctrl_type != OFPBCT_COMMIT_REQUEST:
            raise WireError("OFPBF_TIME is only valid on COMMIT_REQUEST", 0, "flags")
        if timed != (self.time_property is not None):
            raise WireError("OFPBF_TIME and the time property must appear together", 0, "time_property")
        props = self.time_property.encode() if self.time_property else b""
        length = OFP_BUNDLE_CTRL_MSG_SIZE + len(props)
        return (_header(OFPT_BUNDLE_CONTROL, length, self.xid, self.version)
                + struct.pack(OFP_BUNDLE_CTRL_MSG_PACK_STR, self.bundle_id, self.ctrl_type, self.flags)
                + props)

    @classmethod
    def parse(cls, buf: bytes) -> "BundleControlMsg":
        path = "bundle_ctrl"
        version, length, xid = _parse_header(buf, OFPT_BUNDLE_CONTROL, path)
        bundle_id, ctrl_type, flags = _unpack(OFP_BUNDLE_CTRL_MSG_PACK_STR, buf, OFP_HEADER_SIZE, path)
        if ctrl_type not in BUNDLE_CTRL_TYPE_NAMES:
            raise WireError(f"unknown bundle control type {ctrl_type}", 12, path + ".type")
        offset = OFP_BUNDLE_CTRL_MSG_SIZE
        prop = None
        while offset < length:
            ptype, plen = _unpack(OFP_BUNDLE_FEATURES_PROP_HEADER_PACK_STR, buf, offset, path + ".properties")
            if ptype != OFPBPT_TIME:
                raise WireError(f"unknown bundle property type {ptype}", offset, path + ".properties.type")
            if prop is not None:
                raise WireError("duplicate time property", offset, path + ".properties")
            prop = TimeBundleProperty.parse(buf, offset, path + ".time_property")
            offset += plen
        if flags & OFPBF_TIME and ctrl_type != OFPBCT_COMMIT_REQUEST:
            # the flag carries no meaning outside a commit request
            flags &= ~OFPBF_TIME
            prop = None
        if (flags & OFPBF_TIME) and prop is None:
            raise WireError("OFPBF_TIME set but no time property", length, path + ".time_property")
        if prop is not None and not flags & OFPBF_TIME:
            raise WireError("time property present without OFPBF_TIME", OFP_BUNDLE_CTRL_MSG_SIZE,
                            path + ".time_property")
        return cls(bundle_id, ctrl_type, flags, prop, xid, version)


@dataclass(frozen=True)
class BundleAddMsg:
    """Bundle add envelope; the inner message stays opaque."""

    bundle_id: int
    payload: bytes = b""
    flags: int = 0
    xid: int = 0
    version: int = OFP_VERSION

    def __post_init__(self):
        _check_uint(self.bundle_id, 32, "bundle_id")
        _check_uint(self.flags, 16, "flags")
        _check_uint(self.xid, 32, "xid")

    def encode(self) -> bytes:
        length = OFP_BUNDLE_ADD_MSG_SIZE + len(self.payload)
        return (_header(OFPT_BUNDLE_ADD_MESSAGE, length, self.xid, self.version)
                + struct.pack(OFP_BUNDLE_ADD_MSG_PACK_STR, self.bundle_id, self.flags)
                + bytes(self.payload))

    @classmethod
    def parse(cls, buf: bytes) -> "BundleAddMsg":
        version, length, xid = _parse_header(buf, OFPT_BUNDLE_ADD_MESSAGE, "bundle_add")
        bundle_id, flags = _unpack(OFP_BUNDLE_ADD_MSG_PACK_STR, buf, OFP_HEADER_SIZE, "bundle_add")
        _check_pad(buf, 12, 14, "bundle_add.pad")
        return cls(bundle_id, bytes(buf[OFP_BUNDLE_ADD_MSG_SIZE:length]), flags, xid, version)


@dataclass(frozen=True)
class ExtensionError:
    err_type: int
    code: int

    def __post_init__(self):
        if self.code not in ERROR_CODE_NAMES.get(self.err_type, {}):
            raise WireError(f"code {self.code} is not valid for error type {self.err_type}", 0, "code")

    @property
    def name(self) -> str:
        prefix = "OFPBFC_" if self.err_type == OFPET_BUNDLE_FAILED else "OFPBRC_"
        return prefix + ERROR_CODE_NAMES[self.err_type][self.code]


@dataclass(frozen=True)
class ErrorMsg:
    error: ExtensionError
    data: bytes = b""
    xid: int = 0
    version: int = OFP_VERSION

    def encode(self) -> bytes:
        length = OFP_ERROR_MSG_SIZE + len(self.data)
        return (_header(OFPT_ERROR, length, self.xid, self.version)
                + struct.pack(OFP_ERROR_MSG_PACK_STR, self.error.err_type, self.error.code)
                + bytes(self.data))

    @classmethod
    def parse(cls, buf: bytes) -> "ErrorMsg":
        version, length, xid = _parse_header(buf, OFPT_ERROR, "error")
        err_type, code = _unpack(OFP_ERROR_MSG_PACK_STR, buf, OFP_HEADER_SIZE, "error")
        try:
            err = ExtensionError(err_type, code)
        except WireError as exc:
            raise WireError(str(exc), OFP_HEADER_SIZE, "error.code") from None
        return cls(err, bytes(buf[OFP_ERROR_MSG_SIZE:length]), xid, version)


# -- bundle features -----------------------------------------------------------

@dataclass(frozen=True)
class FeaturesTimeProperty:
    sched_accuracy: OfpTime = field(default_factory=OfpTime)
    sched_max_future: OfpTime = field(default_factory=OfpTime)
    sched_max_past: OfpTime = field(default_factory=OfpTime)
    timestamp: OfpTime = field(default_factory=OfpTime)
    prop_type = OFPTMPBF_TIME_CAPABILITY
    length = OFP_BUNDLE_FEATURES_PROP_TIME_SIZE

    _FIELDS = ("sched_accuracy", "sched_max_future", "sched_max_past", "timestamp")

    def encode(self) -> bytes:
        head = struct.pack(OFP_BUNDLE_FEATURES_PROP_TIME_0_PACK_STR,
                           OFPTMPBF_TIME_CAPABILITY, OFP_BUNDLE_FEATURES_PROP_TIME_SIZE)
        return head + b"".join(getattr(self, name).encode() for name in self._FIELDS)

    @classmethod
    def parse(cls, buf: bytes, offset: int = 0, path: str = "time_property") -> "FeaturesTimeProperty":
        ptype, length = _unpack(OFP_BUNDLE_FEATURES_PROP_TIME_0_PACK_STR, buf, offset, path)
        if ptype != OFPTMPBF_TIME_CAPABILITY:
            raise WireError(f"unknown features property type {ptype}", offset, path + ".type")
        if length != OFP_BUNDLE_FEATURES_PROP_TIME_SIZE:
            raise WireError(f"time property length {length}, expected 72", offset + 2, path + ".length")
        _check_pad(buf, offset + 4, offset + 8, path + ".pad")
        values = []
        pos = offset + OFP_BUNDLE_FEATURES_PROP_TIME_0_SIZE
        for name in cls._FIELDS:
            values.append(OfpTime.parse(buf, pos, f"{path}.{name}"))
            pos += OFP_TIME_SIZE
        return cls(*values)


def _parse_features_props(buf: bytes, offset: int, path: str) -> list:
    props = []
    while offset < len(buf):
        ptype, plen = _unpack(OFP_BUNDLE_FEATURES_PROP_HEADER_PACK_STR, buf, offset, path)
        if ptype != OFPTMPBF_TIME_CAPABILITY:
            raise WireError(f"unknown features property type {ptype}", offset, path + ".type")
        if plen != OFP_BUNDLE_FEATURES_PROP_TIME_SIZE or offset + plen > len(buf):
            raise WireError(f"features property length {plen} inconsistent with buffer", offset + 2,
                            path + ".length")
        props.append(FeaturesTimeProperty.parse(buf, offset, f"{path}[{len(props)}]"))
        offset += plen
    return props


@dataclass(frozen=True)
class BundleFeaturesRequest:
    """Multipart request body; the time property rides along iff a flag is set."""

    flags: int = 0
    time_property: Optional[FeaturesTimeProperty] = None

    def __post_init__(self):
        _check_uint(self.flags, 32, "flags")

    def encode(self) -> bytes:
        wants = bool(self.flags & (OFPBF_TIMESTAMP | OFPBF_TIME_SET_SCHED))
        if wants != (self.time_property is not None):
            raise WireError("time property must be present exactly when a time flag is set", 0,
                            "time_property")
        body = struct.pack(OFP_BUNDLE_FEATURES_REQUEST_PACK_STR, self.flags)
        return body + (self.time_property.encode() if self.time_property else b"")

    @classmethod
    def parse(cls, buf: bytes) -> "BundleFeaturesRequest":
        (flags,) = _unpack(OFP_BUNDLE_FEATURES_REQUEST_PACK_STR, buf, 0, "features_request")
        _check_pad(buf, 4, 8, "features_request.pad")
        props = _parse_features_props(buf, OFP_BUNDLE_FEATURES_REQUEST_SIZE, "features_request.properties")
        if len(props) > 1:
            raise WireError("more than one time property", OFP_BUNDLE_FEATURES_REQUEST_SIZE + 72,
                            "features_request.properties")
        prop = props[0] if props else None
        wants = bool(flags & (OFPBF_TIMESTAMP | OFPBF_TIME_SET_SCHED))
        if wants != (prop is not None):
            raise WireError("time property must be present exactly when a time flag is set",
                            OFP_BUNDLE_FEATURES_REQUEST_SIZE, "features_request.time_property")
        return cls(flags, prop)


@dataclass(frozen=True)
class BundleFeaturesReply:
    capabilities: int = 0
    properties: tuple = ()

    def __post_init__(self):
        _check_uint(self.capabilities, 16, "capabilities")
        object.__setattr__(self, "properties", tuple(self.properties))

    def encode(self) -> bytes:
        return (struct.pack(OFP_BUNDLE_FEATURES_PACK_STR, self.capabilities)
                + b"".join(p.encode() for p in self.properties))

    @classmethod
    def parse(cls, buf: bytes) -> "BundleFeaturesReply":
        (caps,) = _unpack(OFP_BUNDLE_FEATURES_PACK_STR, buf, 0, "features_reply")
        _check_pad(buf, 2, 8, "features_reply.pad")
        return cls(caps, tuple(_parse_features_props(buf, OFP_BUNDLE_FEATURES_SIZE,
                                                     "features_reply.properties")))


WIRE_TYPES = {
    "OfpTime": OfpTime,
    "TimeBundleProperty": TimeBundleProperty,
    "BundleControlMsg": BundleControlMsg,
    "BundleAddMsg": BundleAddMsg,
    "BundleFeaturesRequest": BundleFeaturesRequest,
    "BundleFeaturesReply": BundleFeaturesReply,
    "FeaturesTimeProperty": FeaturesTimeProperty,
    "ErrorMsg": ErrorMsg,
}


def encode(msg) -> bytes:
    return msg.encode()


def decode(buf: bytes, expected) -> object:
    """Decode ``buf`` as ``expected`` (a class or its name), rejecting trailing octets."""
    cls = WIRE_TYPES[expected] if isinstance(expected, str) else expected
    buf = bytes(buf)
    msg = cls.parse(buf)
    # framed messages check their own length field; fixed structs are checked here
    size = _FIXED_SIZES.get(cls)
    if size is not None and len(buf) != size:
        raise WireError(f"{len(buf) - size} trailing octets", size, cls.__name__)
    return msg


_FIXED_SIZES = {
    OfpTime: OFP_TIME_SIZE,
    TimeBundleProperty: OFP_BUNDLE_PROP_TIME_SIZE,
    FeaturesTimeProperty: OFP_BUNDLE_FEATURES_PROP_TIME_SIZE,
}


def explain(msg, indent: str = "") -> list:
    """Human-readable field breakdown, one line per field."""
    lines = [f"{indent}{type(msg).__name__} ({len(msg.encode())} octets)"]
    for name in msg.__dataclass_fields__:
        value = getattr(msg, name)
        if isinstance(value, (OfpTime, TimeBundleProperty, FeaturesTimeProperty, ExtensionError)):
            lines.append(f"{indent}  {name}:")
            lines.extend(explain_value(value, indent + "    "))
        elif isinstance(value, tuple) and value and hasattr(value[0], "encode"):
            for i, item in enumerate(value):
                lines.append(f"{indent}  {name}[{i}]:")
                lines.extend(explain_value(item, indent + "    "))
        elif name == "ctrl_type":
            lines.append(f"{indent}  {name}: {value} ({BUNDLE_CTRL_TYPE_NAMES[value]})")
        elif isinstance(value, bytes):
            lines.append(f"{indent}  {name}: {value.hex() or '(empty)'}")
        elif name in ("flags", "capabilities"):
            lines.append(f"{indent}  {name}: {value:#06x}")
        else:
            lines.append(f"{indent}  {name}: {value}")
    return lines


def explain_value(value, indent: str) -> list:
    if isinstance(value, OfpTime):
        return [f"{indent}seconds: {value.seconds}", f"{indent}nanoseconds: {value.nanoseconds}"]
    if isinstance(value, ExtensionError):
        return [f"{indent}type: {value.err_type}", f"{indent}code: {value.code} ({value.name})"]
    out = [f"{indent}type: {value.prop_type}", f"{indent}length: {value.length}"]
    for name in value.__dataclass_fields__:
        out.append(f"{indent}{name}:")
        out.extend(explain_value(getattr(value, name), indent + "  "))
    return out
