"""Dynamic-core / stable-core protocol for incremental indexing.

Two actors: a builder (dynamic core) that indexes one bundle at a time,
and a coordinator (stable core) that serves the published snapshot to
any number of concurrent readers. Bundle 1 is adopted automatically --
there is nothing to keep using before the first index exists. From
bundle 2 on, each finished segment is offered to the user, who either
updates to it or continues on the current snapshot; a deferred snapshot
stays adoptable. The builder holds at most one undecided offer (it
pauses after finishing a segment until that segment's decision is made)
and at most one finished-but-unofferable segment, so adoption can never
silently skip a version: the offered version is always active + 1.

The protocol itself lives in ProgressionMachine, a synchronous state
machine with no threads (directly drivable by model-based tests).
ProgressionEngine adds the background builder thread; snapshot
publication is an atomic reference swap, current_snapshot never takes a
lock, and readers never block the builder.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

from .bundles import BundlePlan
from .corpus_io import Document
from .errors import AviatorError
from .index_core import IndexSegment, IndexSnapshot, empty_snapshot, index_bundle, merge
from .textproc import Pipeline


class AlreadyStarted(AviatorError):
    pass


class NotStarted(AviatorError):
    pass


class VersionMismatch(AviatorError):
    pass


class NoPendingVersion(AviatorError):
    pass


class NotYetAvailable(AviatorError):
    pass


class Decision(str, Enum):
    UPDATE = "update"
    CONTINUE_CURRENT = "continue"


class Status(str, Enum):
    IDLE = "idle"
    BUILDING = "building"
    PENDING_DECISION = "pending_decision"
    COMPLETE = "complete"


@dataclass(frozen=True)
class ProgressionState:
    active_version: int
    pending_version: int | None
    building_version: int | None
    status: Status
    n: int
    docs_indexed: int
    percent_indexed: float


@dataclass(frozen=True)
class Notification:
    """Emitted when a new snapshot version is offered for adoption."""

    pending_version: int
    doc_count: int
    percent_indexed: float


@dataclass
class DecisionRecord:
    version: int
    decision: Decision


class ProgressionMachine:
    """Synchronous protocol core; callers provide the segments.

    Not thread-safe by itself: the engine serializes access. All
    snapshots ever built are retained (they are cheap copy-on-write
    values), which is what lets a deferred offer be adopted later.
    """

    def __init__(self, plan: BundlePlan):
        self.plan = plan
        self.n = plan.n
        self.snapshots: dict[int, IndexSnapshot] = {0: empty_snapshot()}
        self.active = 0
        self.pending: int | None = None
        self.awaiting_decision = False
        self.queued: int | None = None  # built, unofferable until pending adopted
        self.started = False
        self.notifications: list[Notification] = []
        self.decisions: list[DecisionRecord] = []

    # -- derived views -------------------------------------------------

    @property
    def built(self) -> int:
        return len(self.snapshots) - 1

    @property
    def complete(self) -> bool:
        return self.active == self.n

    def next_build(self) -> int | None:
        """Bundle the builder may index now; None while paused or done."""
        if not self.started or self.built >= self.n:
            return None
        if self.queued is not None or (self.pending is not None and self.awaiting_decision):
            return None
        return self.built + 1

    @property
    def status(self) -> Status:
        if self.complete:
            return Status.COMPLETE
        if not self.started:
            return Status.IDLE
        if self.pending is not None:
            return Status.PENDING_DECISION
        return Status.BUILDING

    def state(self) -> ProgressionState:
        return ProgressionState(
            active_version=self.active,
            pending_version=self.pending,
            building_version=self.next_build(),
            status=self.status,
            n=self.n,
            docs_indexed=self.snapshots[self.active].doc_count,
            percent_indexed=100.0 * self.plan.size_upto(self.active)
            / self.plan.corpus_size,
        )

    def current_snapshot(self) -> IndexSnapshot:
        if self.active == 0:
            raise NotYetAvailable("no bundle has been indexed yet")
        return self.snapshots[self.active]

    # -- transitions ----------------------------------------------------

    def start(self) -> ProgressionState:
        if self.started:
            raise AlreadyStarted("progression already started")
        self.started = True
        return self.state()

    def segment_ready(self, segment: IndexSegment) -> ProgressionState:
        """Builder hand-off: merge the segment and offer/adopt its version."""
        expected = self.next_build()
        if expected is None or segment.bundle_index != expected:
            raise VersionMismatch(
                f"segment {segment.bundle_index} unexpected "
                f"(builder may build: {expected})"
            )
        version = segment.bundle_index
        self.snapshots[version] = merge(self.snapshots[version - 1], segment)
        if version == 1:
            # nothing usable exists before the first index: auto-adopt
            self.active = 1
        else:
            self._offer(version)
        return self.state()

    def _offer(self, version: int) -> None:
        if self.active == version - 1 and self.pending is None:
            self.pending = version
            self.awaiting_decision = True
            snap = self.snapshots[version]
            self.notifications.append(
                Notification(
                    pending_version=version,
                    doc_count=snap.doc_count,
                    percent_indexed=100.0 * self.plan.size_upto(version)
                    / self.plan.corpus_size,
                )
            )
        else:
            # a deferred offer is still open; hold this one back
            self.queued = version

    def decide(self, decision: Decision | str) -> ProgressionState:
        decision = Decision(decision)
        if self.pending is None:
            raise NoPendingVersion("no snapshot version is awaiting a decision")
        self.decisions.append(DecisionRecord(self.pending, decision))
        if decision is Decision.UPDATE:
            self.active = self.pending
            self.pending = None
            self.awaiting_decision = False
            if self.queued is not None:
                queued, self.queued = self.queued, None
                self._offer(queued)
        else:
            # keep the offer adoptable, let the builder move on
            self.awaiting_decision = False
        return self.state()


class ProgressionEngine:
    """Background-builder wrapper around ProgressionMachine.

    current_snapshot is a plain attribute read of an immutable object
    (atomic under the GIL), so readers are wait-free and can never block
    or be torn by a concurrent adoption.
    """

    def __init__(
        self,
        docs: Iterable[Document],
        plan: BundlePlan,
        pipeline: Pipeline,
        seconds_per_bundle: float = 0.0,
        segment_provider: Callable[[int], IndexSegment] | None = None,
        on_event: Callable[[Notification], None] | None = None,
    ):
        self.plan = plan
        self.pipeline = pipeline
        self.machine = ProgressionMachine(plan)
        self.seconds_per_bundle = seconds_per_bundle
        self.on_event = on_event
        self._bundle_docs: dict[int, list[Document]] = {
            i: [] for i in range(1, plan.n + 1)
        }
        by_id = {d.doc_id: d for d in docs}
        for doc_id, bundle in plan.assignment.items():
            self._bundle_docs[bundle].append(by_id[doc_id])
        self._segment_provider = segment_provider or self._build_segment
        self._published: IndexSnapshot | None = None
        self._lock = threading.Condition()
        self._thread: threading.Thread | None = None
        self._stopped = False

    def _build_segment(self, bundle_index: int) -> IndexSegment:
        return index_bundle(
            self._bundle_docs[bundle_index], self.pipeline, bundle_index
        )

    # -- lifecycle -------------------------------------------------------

    def start(self) -> ProgressionState:
        with self._lock:
            state = self.machine.start()
        self._thread = threading.Thread(target=self._builder_loop, daemon=True)
        self._thread.start()
        return state

    def stop(self) -> None:
        with self._lock:
            self._stopped = True
            self._lock.notify_all()
        if self._thread is not None:
            self._thread.join(timeout=10)

    def join(self, timeout: float | None = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

    def _builder_loop(self) -> None:
        while True:
            bundle: int | None = None
            with self._lock:
                while not self._stopped:
                    bundle = self.machine.next_build()
                    if bundle is not None or self.machine.built >= self.machine.n:
                        break
                    self._lock.wait()
                if self._stopped or bundle is None:
                    return
            # index outside the lock: deciders/pollers stay responsive
            segment = self._segment_provider(bundle)
            if self.seconds_per_bundle > 0:
                time.sleep(self.seconds_per_bundle)
            with self._lock:
                if self._stopped:
                    return
                before = len(self.machine.notifications)
                self.machine.segment_ready(segment)
                self._publish()
                new_events = self.machine.notifications[before:]
                self._lock.notify_all()
            for event in new_events:
                if self.on_event is not None:
                    try:
                        self.on_event(event)
                    except Exception:  # a faulty observer must not stop the build
                        pass

    def _publish(self) -> None:
        if self.machine.active > 0:
            self._published = self.machine.snapshots[self.machine.active]

    # -- coordinator API ---------------------------------------------------

    def decide(self, decision: Decision | str) -> ProgressionState:
        with self._lock:
            state = self.machine.decide(decision)
            self._publish()
            self._lock.notify_all()
            return state

    def current_snapshot(self) -> IndexSnapshot:
        published = self._published  # single atomic read, no lock
        if published is None:
            raise NotYetAvailable("no bundle has been indexed yet")
        return published

    def state(self) -> ProgressionState:
        with self._lock:
            return self.machine.state()

    def notifications(self) -> list[Notification]:
        with self._lock:
            return list(self.machine.notifications)

    def snapshot_for_version(self, version: int) -> IndexSnapshot:
        with self._lock:
            if version not in self.machine.snapshots or version == 0:
                raise NotYetAvailable(f"version {version} not built")
            return self.machine.snapshots[version]

    def wait_for(
        self,
        predicate: Callable[[ProgressionState], bool],
        timeout: float = 30.0,
    ) -> ProgressionState:
        """Block until the machine state satisfies the predicate."""
        deadline = time.monotonic() + timeout
        with self._lock:
            while True:
                state = self.machine.state()
                if predicate(state):
                    return state
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise TimeoutError(f"state never satisfied predicate: {state}")
                self._lock.wait(remaining)
