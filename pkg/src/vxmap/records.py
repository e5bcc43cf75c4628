"""Voxel record objects and the history buffer they are threaded through."""

from __future__ import annotations

from typing import Iterator, Optional

from .core import OccState, VoxelKey


class VoxelRecord:
    __slots__ = (
        "key", "l", "n_hit", "n_miss", "state", "occ_changed", "n_i", "t_inf",
        "hist_slot", "in_occ", "in_inf", "last_touch",
    )

    def __init__(self, key: VoxelKey, cycle: int = 0):
        self.key = key
        self.l = 0.0
        self.n_hit = 0
        self.n_miss = 0
        self.state = OccState.UNKNOWN
        self.occ_changed = False
        self.n_i = 0
        self.t_inf: list[VoxelRecord] = []
        self.hist_slot: Optional[_Node] = None
        self.in_occ = False
        self.in_inf = False
        self.last_touch = cycle

    def __repr__(self) -> str:
        return (f"VoxelRecord(key={self.key}, l={self.l:.4f}, state={self.state.name}, "
                f"n_i={self.n_i}, occ={self.in_occ}, inf={self.in_inf})")


class _Node:
    __slots__ = ("prev", "next", "rec")

    def __init__(self, rec):
        self.rec = rec
        self.prev = self.next = None


class HistoryBuffer:
    """Doubly-linked list of records, front = oldest.

    ``append`` returns the node, which the record keeps as its slot so that
    ``erase`` is O(1) without searching.
    """

    def __init__(self):
        self._head = _Node(None)
        self._head.prev = self._head.next = self._head
        self._len = 0

    def __len__(self) -> int:
        return self._len

    def __iter__(self) -> Iterator[VoxelRecord]:
        node = self._head.next
        while node is not self._head:
            yield node.rec
            node = node.next

    def append(self, rec) -> _Node:
        node = _Node(rec)
        tail = self._head.prev
        node.prev = tail
        node.next = self._head
        tail.next = node
        self._head.prev = node
        self._len += 1
        return node

    def erase(self, node: _Node) -> None:
        node.prev.next = node.next
        node.next.prev = node.prev
        node.prev = node.next = None
        self._len -= 1

    def front(self):
        if not self._len:
            raise IndexError("front of empty history buffer")
        return self._head.next.rec

    def pop_front(self):
        rec = self.front()
        self.erase(self._head.next)
        return rec
