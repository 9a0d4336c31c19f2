"""Fetcher queue: highest priority first, FIFO on ties, periodic aging."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional


@dataclass
class FrontierItem:
    url: str
    priority: float
    seq: int


class Frontier:
    """Seen-set guarded max-priority queue.

    Every ``aging_interval``-th accepted insertion adds ``aging_factor`` to
    each queued item whose priority would stay below 1.
    """

    def __init__(self, aging_factor: float = 0.05, aging_interval: int = 100) -> None:
        if aging_factor < 0:
            raise ValueError("aging_factor must be >= 0")
        if aging_interval < 1:
            raise ValueError("aging_interval must be >= 1")
        self.aging_factor = aging_factor
        self.aging_interval = aging_interval
        self.seen: set[str] = set()
        self.insert_count = 0
        self.aging_events = 0
        self._heap: list[tuple[float, int, FrontierItem]] = []

    def __len__(self) -> int:
        return len(self._heap)

    def __contains__(self, url: str) -> bool:
        return any(entry[2].url == url for entry in self._heap)

    def items(self) -> list[FrontierItem]:
        """Queued items in dequeue order."""
        return [entry[2] for entry in sorted(self._heap)]

    def enqueue(self, url: str, priority: float) -> bool:
        if not 0.0 < priority <= 1.0:
            raise ValueError(f"priority {priority!r} outside (0, 1]")
        if url in self.seen:
            return False
        self.seen.add(url)
        item = FrontierItem(url, priority, self.insert_count)
        self.insert_count += 1
        heapq.heappush(self._heap, (-priority, item.seq, item))
        if self.insert_count % self.aging_interval == 0:
            self._age()
        return True

    def _age(self) -> None:
        self.aging_events += 1
        step = self.aging_factor
        for _, _, item in self._heap:
            if item.priority + step < 1.0:
                item.priority += step
        self._heap = [(-item.priority, item.seq, item) for _, _, item in self._heap]
        heapq.heapify(self._heap)

    def dequeue(self) -> Optional[FrontierItem]:
        if not self._heap:
            return None
        return heapq.heappop(self._heap)[2]
