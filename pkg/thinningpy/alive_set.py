#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

Rank/select structure over the alive particle indices.
"""
from typing import List

import numpy as np


class AliveSet:
    """Binary indexed tree of alive flags over indices 0..n-1.

    Supports deletion and selection of the k-th alive index in O(log n). The lowest
    alive index is tracked separately since it is needed at every event.
    """

    def __init__(self, size: int) -> None:
        """Mark every index in ``range(size)`` alive."""
        self._size = size
        nodes = np.arange(size + 1, dtype=np.int64)
        # a node of an all-ones tree counts exactly its low bit
        tree = nodes & -nodes
        self._tree: List[int] = tree.tolist()
        self._alive = bytearray(b"\x01") * size
        self._count = size
        self._first = 0
        self._top = 1 << (size.bit_length() - 1) if size else 0

    def __len__(self) -> int:
        """Return the number of alive indices."""
        return self._count

    def __contains__(self, index: int) -> bool:
        """Return whether ``index`` is alive."""
        return 0 <= index < self._size and bool(self._alive[index])

    def first(self) -> int:
        """Return the smallest alive index."""
        while self._first < self._size and not self._alive[self._first]:
            self._first += 1
        if self._first == self._size:
            raise IndexError("empty alive set")
        return self._first

    def remove(self, index: int) -> None:
        """Delete ``index``; it must be alive."""
        if not self._alive[index]:
            raise KeyError(index)
        self._alive[index] = 0
        self._count -= 1
        tree = self._tree
        node = index + 1
        while node <= self._size:
            tree[node] -= 1
            node += node & -node

    def select(self, rank: int) -> int:
        """Return the alive index with ``rank`` alive indices below it."""
        if not 0 <= rank < self._count:
            raise IndexError(rank)
        tree = self._tree
        node = 0
        remaining = rank
        step = self._top
        while step:
            probe = node + step
            if probe <= self._size and tree[probe] <= remaining:
                node = probe
                remaining -= tree[probe]
            step >>= 1
        return node
