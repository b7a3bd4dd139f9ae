"""Data-parallel, memory-budget-batched integration over all mesh elements.

The mesh is split into contiguous element groups sized by a working-memory
budget; groups run in order, elements within a group concurrently. Outputs
are bitwise independent of the group layout and the worker count.
"""

from __future__ import annotations

import math
import queue
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .element import set_worker_threads, stiffness_batch
from .errors import ConfigurationError, StagingError

__all__ = [
    "BYTES_PER_ELEMENT",
    "ComputeBackend",
    "HostBackend",
    "BatchPlan",
    "LocalValuesBatch",
    "required_bytes",
    "plan_batches",
    "integrate_all",
]

# Per-element working set: 36 output doubles, 8 int32 connectivity entries,
# 8 gathered node positions (3 doubles each), one coefficient double.
BYTES_PER_ELEMENT = 36 * 8 + 8 * 4 + 8 * 3 * 8 + 8  # = 520


@dataclass(frozen=True)
class BatchPlan:
    """Ordered, contiguous, disjoint element ranges covering [0, n_el)."""

    ranges: tuple[tuple[int, int], ...]

    @property
    def group_count(self) -> int:
        return len(self.ranges)


@dataclass(frozen=True)
class LocalValuesBatch:
    """Packed lower-triangular stiffness values for every element, (n_el, 36)."""

    values: np.ndarray


def required_bytes(n_el_in_group: int) -> int:
    """Working memory needed to integrate a group of elements."""
    if n_el_in_group < 0:
        raise ValueError("element count must be non-negative")
    return n_el_in_group * BYTES_PER_ELEMENT


def plan_batches(mem_required: int, mem_available: int, n_el: int) -> BatchPlan:
    """Split [0, n_el) into ceil(mem_required / mem_available) near-equal groups.

    Group sizes differ by at most one element; the count is clamped to at
    least 1 and at most n_el (one element per group).
    """
    if mem_available <= 0:
        raise ConfigurationError(f"available memory must be positive, got {mem_available}")
    if n_el < 1:
        raise ValueError(f"n_el must be at least 1, got {n_el}")
    groups = max(1, math.ceil(mem_required / mem_available))
    groups = min(groups, n_el)
    base, extra = divmod(n_el, groups)
    ranges = []
    lo = 0
    for g in range(groups):
        hi = lo + base + (1 if g < extra else 0)
        ranges.append((lo, hi))
        lo = hi
    return BatchPlan(ranges=tuple(ranges))


class ComputeBackend(ABC):
    """A pure per-element map with a declared working-memory capacity.

    Given identical element inputs the backend must produce identical output
    bytes regardless of scheduling: each element's 36 values are a function
    of that element alone.
    """

    capacity_bytes: int | None
    workers: int

    @abstractmethod
    def run(self, coords: np.ndarray, coeff: np.ndarray, element_offset: int = 0,
            out: np.ndarray | None = None) -> np.ndarray:
        """Integrate staged elements: coords (n, 8, 3), coeff (n,) -> (n, 36).

        When out is given, results are written into it (the caller hands the
        backend a disjoint slice of the full values array) and it is returned.
        """

    def close(self) -> None:  # noqa: B027 - optional hook
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class HostBackend(ComputeBackend):
    """Data-parallel execution on host cores.

    Elements map one-to-one onto threads of the compiled integration kernel;
    the worker count is a parallelism hint clamped to the cores available.
    """

    def __init__(self, workers: int = 1, capacity_bytes: int | None = None):
        if workers < 1:
            raise ConfigurationError(f"worker count must be at least 1, got {workers}")
        self.workers = workers
        self.capacity_bytes = capacity_bytes

    def run(self, coords: np.ndarray, coeff: np.ndarray, element_offset: int = 0,
            out: np.ndarray | None = None) -> np.ndarray:
        set_worker_threads(self.workers)
        return stiffness_batch(coords, coeff, element_offset, out=out)


def _check_plan(plan: BatchPlan, n_el: int) -> None:
    if plan.group_count == 0:
        raise ValueError("batch plan has no ranges")
    expected_lo = 0
    for lo, hi in plan.ranges:
        if lo != expected_lo or hi <= lo:
            raise ValueError(f"batch plan ranges must be contiguous and non-empty, got {plan.ranges}")
        expected_lo = hi
    if expected_lo != n_el:
        raise ValueError(f"batch plan covers [0, {expected_lo}) but the mesh has {n_el} elements")


def _stage_group(mesh, lo: int, hi: int):
    """Gather only the data the group's elements need: coords slices and coefficients."""
    conn = mesh.connectivity[lo:hi]
    return mesh.coords[conn], np.ascontiguousarray(mesh.coefficient[lo:hi])


def integrate_all(mesh, backend: ComputeBackend, plan: BatchPlan, mode: str = "sequential",
                  consumer=None) -> LocalValuesBatch:
    """Integrate every element, group by group, onto the given backend.

    mode="sequential" runs any consumer inline after each group. In
    mode="overlapped" completed groups are handed to the consumer through a
    depth-1 queue while later groups integrate, letting a downstream assembly
    stage overlap the integration. The returned values are identical in both
    modes and for any worker count or batch plan.
    """
    if mode not in ("sequential", "overlapped"):
        raise ConfigurationError(f"mode must be 'sequential' or 'overlapped', got {mode!r}")
    _check_plan(plan, mesh.n_el)

    values = np.empty((mesh.n_el, 36))

    for index, (lo, hi) in enumerate(plan.ranges):
        need = required_bytes(hi - lo)
        if backend.capacity_bytes is not None and need > backend.capacity_bytes:
            raise StagingError(index, need, backend.capacity_bytes)

    if mode == "sequential" or consumer is None:
        for lo, hi in plan.ranges:
            coords, coeff = _stage_group(mesh, lo, hi)
            backend.run(coords, coeff, element_offset=lo, out=values[lo:hi])
            if consumer is not None:
                consumer((lo, hi), values[lo:hi])
        return LocalValuesBatch(values=values)

    handoff: queue.Queue = queue.Queue(maxsize=1)
    failure = []

    def drain():
        # Keeps consuming until the sentinel even after a failure, so the
        # producer can never block on a full queue.
        while True:
            item = handoff.get()
            if item is None:
                return
            if failure:
                continue
            try:
                consumer(*item)
            except BaseException as exc:  # propagated after join
                failure.append(exc)

    thread = threading.Thread(target=drain, name="hexfem-assembly-consumer")
    thread.start()
    try:
        for lo, hi in plan.ranges:
            coords, coeff = _stage_group(mesh, lo, hi)
            backend.run(coords, coeff, element_offset=lo, out=values[lo:hi])
            if failure:
                break
            handoff.put(((lo, hi), values[lo:hi]))
    finally:
        handoff.put(None)
        thread.join()
    if failure:
        raise failure[0]
    return LocalValuesBatch(values=values)
