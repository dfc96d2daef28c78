"""
Event scheduler driving every node of a simulated network.

Virtual mode is a single-threaded discrete-event loop: time only moves when
the next event is taken from the heap, and whoever waits on a result drives
the loop. Realtime mode runs the same heap on a background thread against
the monotonic clock. In both modes events run one at a time, ordered by
(time, insertion sequence).
"""
import heapq
import itertools
import logging
import threading
import time
from concurrent.futures import Future
from typing import Literal

from relchain.errors import DeadlineExceeded, FatalNodeError

logger = logging.getLogger(__name__)

VIRTUAL = "virtual"
REALTIME = "realtime"


class TimerHandle:
    __slots__ = ("when", "fn", "args", "cancelled")

    def __init__(self, when, fn, args):
        self.when = when
        self.fn = fn
        self.args = args
        self.cancelled = False

    def cancel(self):
        self.cancelled = True


class Scheduler:

    def __init__(self, mode: Literal["virtual", "realtime"] = VIRTUAL):
        if mode not in (VIRTUAL, REALTIME):
            raise ValueError(f"unknown clock mode {mode!r}")
        self.mode = mode
        self.events_processed = 0
        self._heap = []
        self._seq = itertools.count()
        self._cond = threading.Condition()
        self._virtual_now = 0.0
        self._origin = time.monotonic()
        self._failure = None
        self._closed = False
        self._thread = None
        if mode == REALTIME:
            self._thread = threading.Thread(target=self._loop, name="relchain-scheduler", daemon=True)
            self._thread.start()

    @property
    def virtual(self):
        return self.mode == VIRTUAL

    @property
    def pending(self):
        return sum(1 for _, _, handle in self._heap if not handle.cancelled)

    def now(self):
        """Milliseconds since the scheduler was created."""
        if self.mode == VIRTUAL:
            return self._virtual_now
        return (time.monotonic() - self._origin) * 1000.0

    # scheduling

    def call_at(self, when, fn, *args):
        with self._cond:
            if self._closed:
                raise RuntimeError("scheduler is closed")
            handle = TimerHandle(max(when, self.now()), fn, args)
            heapq.heappush(self._heap, (handle.when, next(self._seq), handle))
            self._cond.notify_all()
            return handle

    def call_later(self, delay_ms, fn, *args):
        return self.call_at(self.now() + max(delay_ms, 0.0), fn, *args)

    def call_soon(self, fn, *args):
        return self.call_at(self.now(), fn, *args)

    # every entry point takes the condition lock
    call_soon_threadsafe = call_soon

    def submit(self, fn, *args):
        """Run fn on the loop; its outcome lands in the returned Future."""
        future = Future()

        def run():
            if not future.set_running_or_notify_cancel():
                return
            try:
                future.set_result(fn(*args))
            except FatalNodeError:
                raise
            except Exception as e:
                future.set_exception(e)

        self.call_soon(run)
        return future

    # running

    def _pop_due(self, deadline=None):
        """Next live handle (or None) whose time is not after deadline."""
        while self._heap:
            when, _, handle = self._heap[0]
            if handle.cancelled:
                heapq.heappop(self._heap)
                continue
            if deadline is not None and when > deadline:
                return None
            heapq.heappop(self._heap)
            return handle
        return None

    def _run_handle(self, handle):
        handle.fn(*handle.args)
        self.events_processed += 1

    def step(self, deadline=None):
        """Virtual mode: run the next event. False when none is due before deadline."""
        with self._cond:
            handle = self._pop_due(deadline)
            if handle is None:
                return False
            self._virtual_now = max(self._virtual_now, handle.when)
            self._run_handle(handle)
            return True

    def _loop(self):
        while True:
            with self._cond:
                handle = self._wait_due()
                if handle is None:
                    return
            # callbacks run without the lock so they may block on other threads
            try:
                self._run_handle(handle)
            except Exception as e:
                logger.critical("scheduler stopped: %s", e, exc_info=True)
                with self._cond:
                    self._failure = e
                    self._closed = True
            with self._cond:
                self._cond.notify_all()

    def _wait_due(self):
        """Realtime mode, lock held: block until the next live handle is due. None once closed."""
        while not self._closed:
            if not self._heap:
                self._cond.wait()
                continue
            when, _, handle = self._heap[0]
            if handle.cancelled:
                heapq.heappop(self._heap)
                continue
            delay = when - self.now()
            if delay > 0:
                self._cond.wait(delay / 1000.0)
                continue
            heapq.heappop(self._heap)
            return handle
        return None

    def _raise_failure(self):
        if self._failure is not None:
            raise self._failure

    def run_until(self, predicate, timeout_ms=None):
        """Process events until predicate() holds. Returns False on timeout or when events run out."""
        deadline = None if timeout_ms is None else self.now() + timeout_ms
        if self.mode == VIRTUAL:
            while not predicate():
                if not self.step(deadline):
                    if deadline is not None:
                        self._virtual_now = max(self._virtual_now, deadline)
                    return False
            return True
        with self._cond:
            while not predicate():
                self._raise_failure()
                if self._closed:
                    return False
                remaining = None if deadline is None else (deadline - self.now()) / 1000.0
                if remaining is not None and remaining <= 0:
                    return False
                self._cond.wait(remaining)
            return True

    def wait(self, future, timeout_ms=None):
        """Result of a Future produced on the loop, driving the loop in virtual mode."""
        if self.mode == REALTIME:
            future.add_done_callback(lambda _: self._notify())
        if not self.run_until(future.done, timeout_ms):
            self._raise_failure()
            if self.mode == VIRTUAL and not self._heap:
                raise DeadlineExceeded("no pending events left while waiting for a result")
            raise DeadlineExceeded(f"no result after {timeout_ms} ms")
        return future.result()

    def _notify(self):
        with self._cond:
            self._cond.notify_all()

    def run_until_quiescent(self, deadline_ms=None):
        """
        Virtual mode: process events in (time, sequence) order until none remain.

        :param deadline_ms: absolute virtual time; DeadlineExceeded if events remain past it
        :return: number of events processed by this call
        """
        if self.mode != VIRTUAL:
            raise RuntimeError("run_until_quiescent needs the virtual clock")
        before = self.events_processed
        while self.step(deadline_ms):
            pass
        if self.pending:
            self._virtual_now = max(self._virtual_now, deadline_ms)
            raise DeadlineExceeded(f"{self.pending} event(s) still pending at t={deadline_ms} ms")
        return self.events_processed - before

    def close(self):
        with self._cond:
            self._closed = True
            self._heap.clear()
            self._cond.notify_all()
        if self._thread is not None and self._thread is not threading.current_thread():
            self._thread.join(timeout=5)
