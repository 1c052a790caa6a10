"""
Task engine for PyQuadMat
Long-lived message-passing workers executing task graphs with either one
shared worker pool or multidispatch slave lists
"""

import heapq
import logging
import queue
import threading
import time
from dataclasses import dataclass

from core.errors import ExecutionError, InvalidSpecError, QuadMatError, WorkerPanicError

logger = logging.getLogger(__name__)

SHARED_QUEUE = "shared_queue"
MULTIDISPATCH = "multidispatch"
TOPOLOGY_MODES = (SHARED_QUEUE, MULTIDISPATCH)

DEFAULT_GRANULARITY = 256


@dataclass(frozen=True)
class WorkerTopology:
    worker_count: int = 1
    mode: str = MULTIDISPATCH
    granularity: int = DEFAULT_GRANULARITY

    def __post_init__(self):
        if self.worker_count < 1:
            raise InvalidSpecError(f"worker count must be at least 1, got {self.worker_count}")
        if self.mode not in TOPOLOGY_MODES:
            raise InvalidSpecError(f"unknown topology mode {self.mode!r}")
        if self.granularity < 1:
            raise InvalidSpecError(f"granularity must be positive, got {self.granularity}")


@dataclass(frozen=True)
class EngineSnapshot:
    """Bookkeeping state: busy workers and every worker's list of idle slaves"""

    busy: tuple
    slave_lists: tuple

    def members(self):
        return list(self.busy) + [w for _, slaves in self.slave_lists for w in slaves]

    def is_partition(self, worker_count):
        return sorted(self.members()) == list(range(worker_count))


@dataclass
class WorkerStats:
    worker_id: int
    tasks: int = 0
    busy_seconds: float = 0.0


class TaskEngine:
    """Executes task graphs on ``worker_count`` workers.

    Worker 0 is whichever thread calls :meth:`run`; workers 1..n-1 are
    daemon threads fed through their own inbox queue. A node runs with the
    outputs of its dependencies as arguments. Nodes may themselves call
    :meth:`run`; the nested graph is then spread over the slaves the
    executing worker was handed.
    """

    def __init__(self, topology=None, on_step=None, fault_injector=None):
        self.topology = topology or WorkerTopology()
        self.on_step = on_step
        self.fault_injector = fault_injector
        self._lock = threading.Lock()
        self._local = threading.local()
        self._owner = threading.get_ident()
        count = self.topology.worker_count
        self._slave_lists = {w: [] for w in range(count)}
        self._slave_lists[0] = list(range(1, count))
        self._masters = {}
        self._busy = {0}
        self._stats = {w: WorkerStats(w) for w in range(count)}
        self._inboxes = {}
        self._threads = []
        self._closed = False
        for worker_id in range(1, count):
            inbox = queue.Queue()
            thread = threading.Thread(target=self._worker_loop, args=(worker_id, inbox),
                                      name=f"pyquadmat-worker-{worker_id}", daemon=True)
            self._inboxes[worker_id] = inbox
            self._threads.append(thread)
            thread.start()
        logger.debug("started %d workers in %s mode", count, self.topology.mode)

    @property
    def worker_count(self):
        return self.topology.worker_count

    @property
    def granularity(self):
        return self.topology.granularity

    def current_worker(self):
        """Pool id of the calling thread: 0 for the creating thread, None outside the pool"""
        worker_id = getattr(self._local, "worker_id", None)
        if worker_id is None and threading.get_ident() == self._owner:
            return 0
        return worker_id

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()

    def close(self):
        if self._closed:
            return
        self._closed = True
        for inbox in self._inboxes.values():
            inbox.put(None)
        for thread in self._threads:
            thread.join()

    # Bookkeeping

    def snapshot(self):
        with self._lock:
            return self._snapshot_locked()

    def _snapshot_locked(self):
        return EngineSnapshot(
            busy=tuple(sorted(self._busy)),
            slave_lists=tuple((w, tuple(slaves)) for w, slaves in sorted(self._slave_lists.items())),
        )

    def _notify_locked(self):
        if self.on_step is not None:
            self.on_step(self._snapshot_locked())

    def _claim_slaves(self, master, ready_count):
        """Take free workers for up to ready_count nodes, handing each a share of the free list"""
        with self._lock:
            owner = 0 if self.topology.mode == SHARED_QUEUE else master
            free = self._slave_lists[owner]
            claimed = []
            for k in range(ready_count):
                if not free:
                    break
                slave = free.pop(0)
                if self.topology.mode == MULTIDISPATCH:
                    share = len(free) // (ready_count - k)
                    self._slave_lists[slave] = free[:share]
                    del free[:share]
                self._masters[slave] = owner
                self._busy.add(slave)
                claimed.append(slave)
                self._notify_locked()
            return claimed

    def _release(self, worker_id):
        """Return a finished worker and its slave list to its master"""
        with self._lock:
            master = self._masters.pop(worker_id)
            self._busy.discard(worker_id)
            returned = [worker_id] + self._slave_lists[worker_id]
            self._slave_lists[worker_id] = []
            self._slave_lists[master] = sorted(self._slave_lists[master] + returned)
            self._notify_locked()

    # Execution

    def _worker_loop(self, worker_id, inbox):
        self._local.worker_id = worker_id
        while True:
            message = inbox.get()
            if message is None:
                return
            node, args, replies = message
            value, error = self._execute(worker_id, node, args)
            self._release(worker_id)
            replies.put((node.node_id, value, error))

    def _execute(self, worker_id, node, args):
        depth = getattr(self._local, "depth", 0)
        self._local.depth = depth + 1
        start = time.perf_counter()
        try:
            value = node.fn(*args)
            if self.fault_injector is not None:
                value = self.fault_injector(worker_id, node.node_id, value)
            return value, None
        except QuadMatError as exc:
            return None, exc
        except Exception as exc:
            logger.debug("task %d (%s) failed on worker %d: %r", node.node_id, node.op, worker_id, exc)
            panic = WorkerPanicError(node.node_id, node.op, worker_id)
            panic.__cause__ = exc
            return None, panic
        finally:
            self._local.depth = depth
            stats = self._stats[worker_id]
            stats.tasks += 1
            if depth == 0:
                stats.busy_seconds += time.perf_counter() - start

    def run(self, graph):
        """Execute every node of graph; returns the dict of node outputs"""
        if self._closed:
            raise ExecutionError("task engine is closed")
        order = graph.validate()
        me = self.current_worker()
        if me is None:
            # foreign threads drive the graph in the role of worker 0
            me = 0
        nodes = graph.nodes
        consumers = graph.consumers()
        waiting = {node_id: len(set(nodes[node_id].deps)) for node_id in order}
        ready = [node_id for node_id in order if waiting[node_id] == 0]
        heapq.heapify(ready)
        outputs = {}
        replies = queue.Queue()
        in_flight = 0
        failure = None
        logger.debug("worker %d runs %s with %d tasks", me, graph.name, len(graph))

        def finish(node_id, value):
            outputs[node_id] = value
            for consumer in set(consumers[node_id]):
                waiting[consumer] -= 1
                if waiting[consumer] == 0:
                    heapq.heappush(ready, consumer)

        while True:
            if failure is None and ready:
                for slave in self._claim_slaves(me, len(ready)):
                    node = nodes[heapq.heappop(ready)]
                    args = tuple(outputs[dep] for dep in node.deps)
                    logger.debug("worker %d -> worker %d: task %d (%s)", me, slave, node.node_id, node.op)
                    self._inboxes[slave].put((node, args, replies))
                    in_flight += 1
                if ready:
                    node = nodes[heapq.heappop(ready)]
                    args = tuple(outputs[dep] for dep in node.deps)
                    value, error = self._execute(me, node, args)
                    if error is not None:
                        failure = error
                    else:
                        finish(node.node_id, value)
            if not in_flight:
                if failure is not None or not ready:
                    break
                continue
            try:
                node_id, value, error = replies.get(block=failure is not None or not ready)
            except queue.Empty:
                continue
            in_flight -= 1
            if error is not None:
                failure = failure or error
            elif failure is None:
                finish(node_id, value)

        if failure is not None:
            raise failure
        return outputs

    def stats(self):
        """Per-worker statistics, merged into one sorted list"""
        with self._lock:
            return [WorkerStats(s.worker_id, s.tasks, s.busy_seconds) for _, s in sorted(self._stats.items())]

    def reset_stats(self):
        with self._lock:
            self._stats = {w: WorkerStats(w) for w in self._stats}


def execute_graph(graph, topology=None, on_step=None, fault_injector=None):
    """Run graph once on a fresh engine"""
    with TaskEngine(topology, on_step=on_step, fault_injector=fault_injector) as engine:
        return engine.run(graph)
