"""Switch-side semantics of scheduled bundles.

Times are integer nanoseconds on the switch clock unless an :class:`OfpTime`
is asked for explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .codec import (
    NS_PER_S, OFPBCT_CLOSE_REPLY, OFPBCT_CLOSE_REQUEST, OFPBCT_COMMIT_REPLY,
    OFPBCT_COMMIT_REQUEST, OFPBCT_DISCARD_REPLY, OFPBCT_DISCARD_REQUEST, OFPBCT_OPEN_REPLY,
    OFPBCT_OPEN_REQUEST, OFPBF_ATOMIC, OFPBF_ORDERED, OFPBF_TIME, OFPBF_TIME_SET_SCHED,
    OFPBFC_BAD_ID, OFPBFC_BAD_TYPE, OFPBFC_BUNDLE_CLOSED, OFPBFC_BUNDLE_EXIST,
    OFPBFC_MSG_CONFLICT, OFPBFC_SCHED_FUTURE, OFPBFC_SCHED_NOT_SUPPORTED, OFPBFC_SCHED_PAST,
    OFPBRC_MULTIPART_BAD_SCHED, OFPET_BAD_REQUEST, OFPET_BUNDLE_FAILED, OFPT_BUNDLE_ADD_MESSAGE,
    OFPT_BUNDLE_CONTROL, BundleAddMsg, BundleControlMsg, BundleFeaturesReply,
    BundleFeaturesRequest, ErrorMsg, ExtensionError, FeaturesTimeProperty, OfpTime, WireError,
)


@dataclass(frozen=True)
class ToleranceConfig:
    sched_max_future_ns: int = NS_PER_S
    sched_max_past_ns: int = NS_PER_S

    def __post_init__(self):
        if self.sched_max_future_ns < 0 or self.sched_max_past_ns < 0:
            raise ValueError("tolerance values must be non-negative")


@dataclass(frozen=True)
class ExecuteNow:
    pass


@dataclass(frozen=True)
class ExecuteAt:
    time: OfpTime


Verdict = Union[ExecuteNow, ExecuteAt, ExtensionError]


def check_tolerance(now: OfpTime, scheduled: OfpTime, cfg: ToleranceConfig = ToleranceConfig()) -> Verdict:
    now_ns, at_ns = now.to_ns(), scheduled.to_ns()
    if at_ns < now_ns - cfg.sched_max_past_ns:
        return ExtensionError(OFPET_BUNDLE_FAILED, OFPBFC_SCHED_PAST)
    if at_ns > now_ns + cfg.sched_max_future_ns:
        return ExtensionError(OFPET_BUNDLE_FAILED, OFPBFC_SCHED_FUTURE)
    if at_ns <= now_ns:
        return ExecuteNow()
    return ExecuteAt(scheduled)


@dataclass
class SwitchTimeCaps:
    """A switch's advertised bundle capabilities and its current tolerance."""

    capabilities: int = OFPBF_ATOMIC | OFPBF_ORDERED | OFPBF_TIME
    tolerance: ToleranceConfig = field(default_factory=ToleranceConfig)
    sched_accuracy: OfpTime = field(default_factory=OfpTime)
    tolerance_locked: bool = False


def apply_features_request(req: BundleFeaturesRequest, caps: SwitchTimeCaps, now: OfpTime):
    """Answer a bundle-features request, updating ``caps.tolerance`` if asked.

    Returns the reply, or an :class:`ExtensionError` when the switch refuses a
    tolerance change.
    """
    if req.flags & OFPBF_TIME_SET_SCHED:
        if caps.tolerance_locked or req.time_property is None:
            return ExtensionError(OFPET_BAD_REQUEST, OFPBRC_MULTIPART_BAD_SCHED)
        prop = req.time_property
        caps.tolerance = ToleranceConfig(prop.sched_max_future.to_ns(), prop.sched_max_past.to_ns())
    prop = FeaturesTimeProperty(
        sched_accuracy=caps.sched_accuracy,
        sched_max_future=OfpTime.from_ns(caps.tolerance.sched_max_future_ns),
        sched_max_past=OfpTime.from_ns(caps.tolerance.sched_max_past_ns),
        timestamp=now,
    )
    return BundleFeaturesReply(caps.capabilities, (prop,))


class BundleRejected(Exception):
    def __init__(self, error: ExtensionError, detail: str = ""):
        super().__init__(f"{error.name}: {detail}" if detail else error.name)
        self.error = error


def _fail(code: int, detail: str = ""):
    raise BundleRejected(ExtensionError(OFPET_BUNDLE_FAILED, code), detail)


@dataclass
class Bundle:
    bundle_id: int
    flags: int
    messages: list = field(default_factory=list)
    closed: bool = False
    execute_at_ns: Optional[int] = None


@dataclass(frozen=True)
class Execution:
    bundle_id: int
    time_ns: int
    messages: tuple


class BundleSession:
    """Per-connection bundle state machine.

    ``same_time_conflict`` makes the switch refuse a second bundle scheduled
    for exactly the same instant as one already pending.
    """

    def __init__(self, tolerance: Optional[ToleranceConfig] = None, supports_time: bool = True,
                 same_time_conflict: bool = False):
        self.tolerance = tolerance or ToleranceConfig()
        self.supports_time = supports_time
        self.same_time_conflict = same_time_conflict
        self.open_bundles: dict = {}
        self.scheduled: dict = {}
        self.executed: list = []
        self._finished: set = set()

    def open(self, bundle_id: int, flags: int = 0):
        if bundle_id in self.open_bundles or bundle_id in self.scheduled:
            _fail(OFPBFC_BUNDLE_EXIST, f"bundle {bundle_id} already exists")
        self.open_bundles[bundle_id] = Bundle(bundle_id, flags)

    def _get_open(self, bundle_id: int) -> Bundle:
        bundle = self.open_bundles.get(bundle_id)
        if bundle is None:
            _fail(OFPBFC_BAD_ID, f"no open bundle {bundle_id}")
        return bundle

    def add(self, bundle_id: int, payload: bytes):
        bundle = self._get_open(bundle_id)
        if bundle.closed:
            _fail(OFPBFC_BUNDLE_CLOSED, f"bundle {bundle_id} is closed")
        bundle.messages.append(bytes(payload))

    def close(self, bundle_id: int):
        bundle = self._get_open(bundle_id)
        if bundle.closed:
            _fail(OFPBFC_BUNDLE_CLOSED, f"bundle {bundle_id} is already closed")
        bundle.closed = True

    def commit(self, bundle_id: int, now_ns: int, scheduled: Optional[OfpTime] = None):
        """Commit now or at ``scheduled``; returns :class:`ExecuteNow` or :class:`ExecuteAt`.

        A rejected commit aborts the bundle and leaves no staged state behind.
        """
        bundle = self._get_open(bundle_id)
        if scheduled is None:
            del self.open_bundles[bundle_id]
            self._run(bundle, now_ns)
            return ExecuteNow()
        if not self.supports_time:
            del self.open_bundles[bundle_id]
            _fail(OFPBFC_SCHED_NOT_SUPPORTED, "scheduled commit not supported")
        verdict = check_tolerance(OfpTime.from_ns(max(now_ns, 0)), scheduled, self.tolerance)
        if isinstance(verdict, ExtensionError):
            del self.open_bundles[bundle_id]
            raise BundleRejected(verdict, f"T_s={scheduled.to_ns()} now={now_ns}")
        if isinstance(verdict, ExecuteNow):
            del self.open_bundles[bundle_id]
            self._run(bundle, now_ns)
            return verdict
        at_ns = scheduled.to_ns()
        if self.same_time_conflict and any(b.execute_at_ns == at_ns for b in self.scheduled.values()):
            del self.open_bundles[bundle_id]
            _fail(OFPBFC_MSG_CONFLICT, f"another bundle is scheduled at {at_ns}")
        del self.open_bundles[bundle_id]
        bundle.execute_at_ns = at_ns
        self.scheduled[bundle_id] = bundle
        return verdict

    def discard(self, bundle_id: int):
        if bundle_id in self.open_bundles:
            del self.open_bundles[bundle_id]
        elif bundle_id in self.scheduled:
            del self.scheduled[bundle_id]
        elif bundle_id in self._finished:
            _fail(OFPBFC_BAD_ID, f"bundle {bundle_id} already executed")
        else:
            _fail(OFPBFC_BAD_ID, f"unknown bundle {bundle_id}")

    def next_due_ns(self) -> Optional[int]:
        return min((b.execute_at_ns for b in self.scheduled.values()), default=None)

    def due(self, now_ns: int) -> list:
        """Execute every scheduled bundle whose time has come, earliest first."""
        ready = sorted((b for b in self.scheduled.values() if b.execute_at_ns <= now_ns),
                       key=lambda b: (b.execute_at_ns, b.bundle_id))
        out = []
        for bundle in ready:
            del self.scheduled[bundle.bundle_id]
            out.append(self._run(bundle, bundle.execute_at_ns))
        return out

    def _run(self, bundle: Bundle, time_ns: int) -> Execution:
        if bundle.bundle_id in self._finished:
            _fail(OFPBFC_BAD_ID, "bundle executed twice")  # defensive, unreachable
        self._finished.add(bundle.bundle_id)
        execution = Execution(bundle.bundle_id, time_ns, tuple(bundle.messages))
        self.executed.append(execution)
        return execution

    # -- wire-level entry point ---------------------------------------------

    def handle(self, buf: bytes, now_ns: int) -> Optional[bytes]:
        """Process one encoded message and return the encoded reply, if any."""
        if len(buf) < 2:
            raise WireError("message shorter than a header", 0, "header")
        mtype = buf[1]
        if mtype == OFPT_BUNDLE_ADD_MESSAGE:
            msg = BundleAddMsg.parse(buf)
            try:
                self.add(msg.bundle_id, msg.payload)
            except BundleRejected as exc:
                return ErrorMsg(exc.error, bytes(buf[:64]), msg.xid).encode()
            return None
        if mtype != OFPT_BUNDLE_CONTROL:
            raise WireError(f"unsupported message type {mtype}", 1, "header.type")
        msg = BundleControlMsg.parse(buf)
        replies = {
            OFPBCT_OPEN_REQUEST: OFPBCT_OPEN_REPLY,
            OFPBCT_CLOSE_REQUEST: OFPBCT_CLOSE_REPLY,
            OFPBCT_COMMIT_REQUEST: OFPBCT_COMMIT_REPLY,
            OFPBCT_DISCARD_REQUEST: OFPBCT_DISCARD_REPLY,
        }
        try:
            if msg.ctrl_type == OFPBCT_OPEN_REQUEST:
                self.open(msg.bundle_id, msg.flags)
            elif msg.ctrl_type == OFPBCT_CLOSE_REQUEST:
                self.close(msg.bundle_id)
            elif msg.ctrl_type == OFPBCT_COMMIT_REQUEST:
                at = msg.time_property.scheduled_time if msg.scheduled else None
                self.commit(msg.bundle_id, now_ns, at)
            elif msg.ctrl_type == OFPBCT_DISCARD_REQUEST:
                self.discard(msg.bundle_id)
            else:
                _fail(OFPBFC_BAD_TYPE, "reply type sent to a switch")
        except BundleRejected as exc:
            return ErrorMsg(exc.error, bytes(buf[:64]), msg.xid).encode()
        reply_flags = msg.flags & ~OFPBF_TIME
        return BundleControlMsg(msg.bundle_id, replies[msg.ctrl_type], reply_flags, None, msg.xid).encode()
