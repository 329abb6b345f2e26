"""Delay-optimum fan-in-2 trees for multi-input AND/OR with arrival times.

Greedy rule: repeatedly combine the two earliest signals with one gate whose
arrival is max(arrivals) + 1. For integral arrivals the resulting delay equals
ceil(log2(sum 2**a)) exactly; for real arrivals the actual greedy delay is used.
"""

from __future__ import annotations

import heapq

from .core import Gate, Signal, ValidationError


def huffman_combine(signals, kind: str) -> Signal:
    """Combine signals into one `kind`-gate tree; returns the combined signal.

    A single signal is returned unchanged (zero gates). Ties among equal
    arrivals are broken by lowest original index, then by creation order, so
    the output tree is deterministic.
    """
    sigs = list(signals)
    if not sigs:
        raise ValidationError("cannot combine an empty signal set")
    if len(sigs) == 1:
        return sigs[0]
    heap = [(s.arrival, seq, s.source) for seq, s in enumerate(sigs)]
    heapq.heapify(heap)
    seq = len(sigs)
    while len(heap) > 1:
        a1, _, s1 = heapq.heappop(heap)
        a2, _, s2 = heapq.heappop(heap)
        heapq.heappush(heap, (a2 + 1, seq, Gate(kind, s1, s2)))
        seq += 1
    arrival, _, source = heap[0]
    return Signal(source, arrival)


def huffman_delay(arrivals) -> float:
    """Delay of the greedy combine over bare arrival times (no tree built)."""
    arr = list(arrivals)
    if not arr:
        raise ValidationError("cannot combine an empty signal set")
    if len(arr) == 1:
        return arr[0]
    heapq.heapify(arr)
    while len(arr) > 1:
        heapq.heappop(arr)
        a2 = heapq.heappop(arr)
        heapq.heappush(arr, a2 + 1)
    return arr[0]
