"""
Task graphs for PyQuadMat
Recursion DAGs: nodes are closures over immutable inputs, edges run from
producer to consumer
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from core.errors import CycleDetectedError, InvalidSpecError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TaskNode:
    """One unit of work; ``fn`` is called with the outputs of ``deps`` in order"""

    node_id: int
    op: str
    fn: Callable
    deps: tuple = field(default=())


class TaskGraph:
    """A DAG of task nodes. Ids order the nodes and break scheduling ties."""

    def __init__(self, name="graph"):
        self.name = name
        self.nodes = {}

    def add(self, op, fn, *deps):
        """Append a node depending on earlier nodes; returns its id"""
        node_id = len(self.nodes)
        while node_id in self.nodes:
            node_id += 1
        return self.add_node(node_id, op, fn, deps)

    def add_node(self, node_id, op, fn, deps=()):
        if node_id in self.nodes:
            raise InvalidSpecError(f"duplicate task id {node_id} in {self.name}")
        self.nodes[node_id] = TaskNode(node_id, op, fn, tuple(deps))
        return node_id

    def __len__(self):
        return len(self.nodes)

    def consumers(self):
        result = {node_id: [] for node_id in self.nodes}
        for node in self.nodes.values():
            for dep in node.deps:
                result[dep].append(node.node_id)
        return result

    def validate(self):
        """Topological order by Kahn's algorithm (smallest id first among ready nodes)"""
        for node in self.nodes.values():
            for dep in node.deps:
                if dep not in self.nodes:
                    raise InvalidSpecError(f"task {node.node_id} depends on unknown task {dep}")
        pending = {node_id: len(set(node.deps)) for node_id, node in self.nodes.items()}
        consumers = self.consumers()
        ready = deque(sorted(node_id for node_id, count in pending.items() if count == 0))
        order = []
        while ready:
            node_id = ready.popleft()
            order.append(node_id)
            released = []
            for consumer in set(consumers[node_id]):
                pending[consumer] -= 1
                if pending[consumer] == 0:
                    released.append(consumer)
            ready = deque(sorted(list(ready) + released))
        if len(order) != len(self.nodes):
            stuck = sorted(node_id for node_id, count in pending.items() if count > 0)
            raise CycleDetectedError(f"cycle among tasks {stuck} in {self.name}")
        return order

    def run_serial(self):
        """Replay the graph on the calling thread; returns every node output"""
        outputs = {}
        for node_id in self.validate():
            node = self.nodes[node_id]
            outputs[node_id] = node.fn(*(outputs[dep] for dep in node.deps))
        return outputs
