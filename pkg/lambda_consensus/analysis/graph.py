"""
Graph Module: Explicit state graph with strong-component analysis

States are numbered in discovery order. Each state keeps the parent and
action it was first reached through, so shortest schedules to any state
can be rebuilt. Edges are kept as two flat integer arrays and handed to
scipy for the strongly connected components.
"""

from array import array
from collections import deque
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Set, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..engine.trace import ScheduledAction


def _as_int64(values: array) -> np.ndarray:
    if not len(values):
        return np.zeros(0, dtype=np.int64)
    # copy so the array buffer is not pinned by a live view
    return np.frombuffer(values, dtype=np.int64).copy()


class StateGraph:
    """
    Directed graph of reachable states.

    Attributes:
        states: State objects by node id
        index: Node id by state
    """

    def __init__(self):
        self.states: List[Hashable] = []
        self.index: Dict[Hashable, int] = {}
        self._parent = array("q")
        self._parent_action: List[Optional[ScheduledAction]] = []
        self._src = array("q")
        self._dst = array("q")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def edge_count(self) -> int:
        return len(self._src)

    def add_state(self, state: Hashable, parent: int = -1,
                  action: Optional[ScheduledAction] = None) -> Tuple[int, bool]:
        """
        Intern a state.

        Returns:
            Tuple of (node id, whether the state is new)
        """
        node = self.index.get(state)
        if node is not None:
            return node, False
        node = len(self.states)
        self.index[state] = node
        self.states.append(state)
        self._parent.append(parent)
        self._parent_action.append(action)
        return node, True

    def add_edge(self, src: int, dst: int):
        self._src.append(src)
        self._dst.append(dst)

    def path_to(self, node: int) -> List[ScheduledAction]:
        """Actions of the discovery path from the initial state to node."""
        path = []
        while self._parent[node] >= 0:
            path.append(self._parent_action[node])
            node = self._parent[node]
        path.reverse()
        return path

    def edges(self) -> Tuple[np.ndarray, np.ndarray]:
        return _as_int64(self._src), _as_int64(self._dst)

    def out_degrees(self) -> np.ndarray:
        src, _ = self.edges()
        return np.bincount(src, minlength=len(self.states))

    def strong_components(self) -> Tuple[int, np.ndarray]:
        """
        Strongly connected components.

        Returns:
            Tuple of (component count, component label per node)
        """
        size = len(self.states)
        src, dst = self.edges()
        matrix = csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(size, size))
        return connected_components(matrix, directed=True, connection="strong", return_labels=True)

    def bottom_components(self) -> List[np.ndarray]:
        """
        Components with no edge leaving them, each as a sorted array of
        node ids, ordered by their smallest node id.
        """
        if not self.states:
            return []
        count, labels = self.strong_components()
        src, dst = self.edges()
        leaving = labels[src] != labels[dst]
        non_bottom = np.zeros(count, dtype=bool)
        non_bottom[labels[src[leaving]]] = True

        order = np.argsort(labels, kind="stable")
        sorted_labels = labels[order]
        bounds = np.searchsorted(sorted_labels, np.arange(count + 1))
        components = [
            order[bounds[label]:bounds[label + 1]]
            for label in range(count)
            if not non_bottom[label]
        ]
        components.sort(key=lambda members: int(members[0]))
        return components


def lasso_cycle(start: int, members: Set[int],
                expand: Callable[[int], Iterable[Tuple[ScheduledAction, int]]]) -> List[ScheduledAction]:
    """
    Shortest cycle from start back to start inside a component.

    Args:
        start: Node on the cycle
        members: Node ids of the component
        expand: Successors of a node as (action, node id) pairs

    Returns:
        Actions of the cycle, empty when start has no cycle in the component
    """
    parents: Dict[int, Tuple[int, ScheduledAction]] = {}
    queue = deque()
    for action, nxt in expand(start):
        if nxt == start:
            return [action]
        if nxt in members and nxt not in parents:
            parents[nxt] = (start, action)
            queue.append(nxt)

    while queue:
        node = queue.popleft()
        for action, nxt in expand(node):
            if nxt == start:
                cycle = [action]
                while node != start:
                    prev, prev_action = parents[node]
                    cycle.append(prev_action)
                    node = prev
                cycle.reverse()
                return cycle
            if nxt in members and nxt not in parents:
                parents[nxt] = (node, action)
                queue.append(nxt)
    return []

