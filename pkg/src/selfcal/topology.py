"""Spanning-tree interconnection layouts for antenna arrays.

Antennas are labeled 1..m and one of them is the designated reference.
With a budget of m-1 transmission lines, every ordinary antenna can reach
the reference exactly when the lines form a spanning tree, so `Topology`
enforces the tree property at construction time.
"""

from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    DuplicateEdge,
    IndexOutOfRange,
    NotEffective,
    SelfLoop,
    WrongEdgeCount,
)

Edge = tuple[int, int]

#: Largest antenna count accepted by exhaustive enumeration (m**(m-2) trees).
ENUMERATION_CAP = 8


@dataclass(frozen=True)
class Topology:
    """A spanning tree on antennas 1..m with a designated reference antenna.

    Edges are stored as sorted (low, high) pairs in a canonical order, so
    two topologies with the same wiring compare equal regardless of how
    their edges were listed.
    """

    m: int
    reference: int
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError(f"need at least 2 antennas, got m={self.m}")
        if not 1 <= self.reference <= self.m:
            raise IndexOutOfRange(
                f"reference {self.reference} outside 1..{self.m}")
        seen: set[Edge] = set()
        canonical: list[Edge] = []
        for pair in self.edges:
            p, q = pair
            if p == q:
                raise SelfLoop(f"antenna {p} wired to itself")
            if not (1 <= p <= self.m and 1 <= q <= self.m):
                raise IndexOutOfRange(f"line ({p},{q}) outside 1..{self.m}")
            edge = (p, q) if p < q else (q, p)
            if edge in seen:
                raise DuplicateEdge(f"line ({edge[0]},{edge[1]}) listed twice")
            seen.add(edge)
            canonical.append(edge)
        if len(canonical) != self.m - 1:
            raise WrongEdgeCount(
                f"{len(canonical)} lines for m={self.m}, expected {self.m - 1}")
        object.__setattr__(self, "edges", tuple(sorted(canonical)))
        # m-1 edges and full reachability from the reference imply a tree.
        if len(self.rooted_edges) != self.m - 1:
            raise NotEffective(
                "wiring does not connect every antenna to the reference")

    @cached_property
    def neighbors(self) -> dict[int, tuple[int, ...]]:
        """Antennas directly wired to each antenna, ascending."""
        adj: dict[int, list[int]] = {k: [] for k in range(1, self.m + 1)}
        for p, q in self.edges:
            adj[p].append(q)
            adj[q].append(p)
        return {k: tuple(sorted(v)) for k, v in adj.items()}

    @cached_property
    def ordinary(self) -> tuple[int, ...]:
        """All antennas except the reference, ascending."""
        return tuple(k for k in range(1, self.m + 1) if k != self.reference)

    @cached_property
    def rooted_edges(self) -> tuple[Edge, ...]:
        """(parent, child) pairs in breadth-first order from the reference."""
        found = {self.reference}
        order: list[Edge] = []
        queue = deque([self.reference])
        while queue:
            node = queue.popleft()
            for other in self.neighbors[node]:
                if other not in found:
                    found.add(other)
                    order.append((node, other))
                    queue.append(other)
        return tuple(order)

    @cached_property
    def directed_pairs(self) -> tuple[Edge, ...]:
        """Every (transmitter, receiver) measurement, both directions of
        every line, in lexicographic order."""
        pairs = list(self.edges) + [(q, p) for p, q in self.edges]
        return tuple(sorted(pairs))

    def degree(self, antenna: int) -> int:
        return len(self.neighbors[antenna])

    def interconnection_matrix(self) -> np.ndarray:
        """Dense 0/1 wiring matrix (m x m), built on demand."""
        a = np.zeros((self.m, self.m), dtype=np.int8)
        for p, q in self.edges:
            a[p - 1, q - 1] = 1
            a[q - 1, p - 1] = 1
        return a


@dataclass(frozen=True)
class DistanceProfile:
    """Hop count from the reference to every ordinary antenna.

    `antennas` and `distances` run over the ordinary antennas in ascending
    index order; `mean` is kept as an exact rational so that closed-form
    comparisons need no tolerance.
    """

    antennas: tuple[int, ...]
    distances: tuple[int, ...]
    mean: Fraction


@dataclass(frozen=True)
class Schedule:
    """Slot-by-slot plan that sounds both directions of every line.

    Each slot is a set of simultaneous (transmitter, receiver)
    measurements in which no antenna takes part twice, matching the single
    transceiver chain per antenna and half-duplex operation.
    """

    slots: tuple[tuple[Edge, ...], ...]
    slot_duration: float

    @property
    def total_time(self) -> float:
        """Seconds needed to run every slot once."""
        return len(self.slots) * self.slot_duration


def _check_m_reference(m: int, reference: int) -> None:
    if m < 2:
        raise ValueError(f"need at least 2 antennas, got m={m}")
    if not 1 <= reference <= m:
        raise IndexOutOfRange(f"reference {reference} outside 1..{m}")


def make_star(m: int, reference: int) -> Topology:
    """Wire every ordinary antenna directly to the reference."""
    _check_m_reference(m, reference)
    return Topology(
        m, reference,
        tuple((reference, k) for k in range(1, m + 1) if k != reference))


def make_daisy(m: int, reference: int) -> Topology:
    """Wire the antennas into the single chain 1-2-...-m.

    Labels are positions along the chain; the reference may sit anywhere
    on it.
    """
    _check_m_reference(m, reference)
    return Topology(m, reference, tuple((k, k + 1) for k in range(1, m)))


def from_edges(m: int, reference: int,
               edges: Iterable[Iterable[int]]) -> Topology:
    """Validate an arbitrary wiring description.

    Raises SelfLoop, IndexOutOfRange, DuplicateEdge, WrongEdgeCount or
    NotEffective depending on what is wrong with the input.
    """
    pairs = tuple((int(p), int(q)) for p, q in edges)
    return Topology(int(m), int(reference), pairs)


def calibration_distances(t: Topology) -> DistanceProfile:
    """Hop count of each ordinary antenna's unique path to the reference."""
    dist = {t.reference: 0}
    for parent, child in t.rooted_edges:
        dist[child] = dist[parent] + 1
    distances = tuple(dist[k] for k in t.ordinary)
    return DistanceProfile(t.ordinary, distances,
                           Fraction(sum(distances), t.m - 1))


def max_degree(t: Topology) -> int:
    """Largest number of lines meeting at any antenna."""
    return max(len(t.neighbors[k]) for k in range(1, t.m + 1))


def decompose_chains(t: Topology) -> list[list[int]]:
    """Split the wiring into chains walking away from the reference.

    When branching only happens at the reference, the chains partition
    the ordinary antennas. A branch below the reference is reported as
    one root-to-leaf chain per leaf, duplicating the shared prefix; each
    antenna still appears at the position given by its hop distance, so
    per-antenna bounds computed chain by chain stay correct.
    """
    chains: list[list[int]] = []

    def walk(node: int, parent: int, prefix: list[int]) -> None:
        children = [k for k in t.neighbors[node] if k != parent]
        if not children:
            chains.append(prefix)
        for child in children:
            walk(child, node, prefix + [child])

    for first in t.neighbors[t.reference]:
        walk(first, t.reference, [first])
    return chains


def measurement_schedule(t: Topology, slot_duration: float) -> Schedule:
    """Pack the 2(m-1) sounding measurements into 2*max_degree slots.

    Lines are first colored so that no two lines sharing an antenna get
    the same color; a greedy parent-to-child pass needs exactly
    max_degree colors on a tree. Every color class then yields one slot
    per direction, parent-to-child first.
    """
    if slot_duration <= 0:
        raise ValueError(f"slot duration must be positive, got {slot_duration}")
    children: dict[int, list[int]] = {}
    for parent, child in t.rooted_edges:
        children.setdefault(parent, []).append(child)
    color_classes: list[list[Edge]] = [[] for _ in range(max_degree(t))]
    parent_color: dict[int, int] = {}
    order = [t.reference] + [child for _, child in t.rooted_edges]
    for node in order:
        color = 0
        blocked = parent_color.get(node)
        for child in children.get(node, ()):
            if color == blocked:
                color += 1
            color_classes[color].append((node, child))
            parent_color[child] = color
            color += 1
    slots: list[tuple[Edge, ...]] = []
    for group in color_classes:
        slots.append(tuple(sorted(group)))
        slots.append(tuple(sorted((c, p) for p, c in group)))
    return Schedule(tuple(slots), float(slot_duration))


def schedule_violations(t: Topology, schedule: Schedule) -> list[str]:
    """Check a schedule against the wiring; an empty list means valid."""
    problems: list[str] = []
    expected = 2 * max_degree(t)
    if len(schedule.slots) != expected:
        problems.append(f"{len(schedule.slots)} slots, expected {expected}")
    counts: dict[Edge, int] = {}
    for i, slot in enumerate(schedule.slots):
        busy: set[int] = set()
        for tx, rx in slot:
            for antenna in (tx, rx):
                if antenna in busy:
                    problems.append(f"antenna {antenna} used twice in slot {i}")
                busy.add(antenna)
            counts[(tx, rx)] = counts.get((tx, rx), 0) + 1
    required = set(t.directed_pairs)
    for pair in required:
        if counts.get(pair, 0) != 1:
            problems.append(
                f"measurement {pair} scheduled {counts.get(pair, 0)} times")
    for pair in counts:
        if pair not in required:
            problems.append(f"measurement {pair} is not on any line")
    return problems


def enumerate_trees(m: int, reference: int = 1,
                    cap: int = ENUMERATION_CAP) -> Iterator[Topology]:
    """Yield every labeled tree on 1..m exactly once (m**(m-2) of them).

    Sequence decoding makes the enumeration exhaustive and duplicate
    free; `cap` bounds the super-exponential growth.
    """
    _check_m_reference(m, reference)
    if m > cap:
        raise ValueError(f"m={m} exceeds the enumeration cap {cap}")
    for seq in itertools.product(range(1, m + 1), repeat=m - 2):
        yield Topology(m, reference, decode_pruefer(seq, m))


def decode_pruefer(seq: Iterable[int], m: int) -> tuple[Edge, ...]:
    """Edges of the labeled tree encoded by a length m-2 sequence over 1..m."""
    seq = tuple(seq)
    if len(seq) != m - 2 or any(not 1 <= x <= m for x in seq):
        raise ValueError(f"sequence {seq} does not encode a tree on 1..{m}")
    degree = [1] * (m + 1)
    for x in seq:
        degree[x] += 1
    leaves = [k for k in range(1, m + 1) if degree[k] == 1]
    heapq.heapify(leaves)
    edges: list[Edge] = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return tuple(edges)


def topology_to_dict(t: Topology) -> dict:
    """JSON-ready description: {"m", "reference", "edges"}."""
    return {"m": t.m, "reference": t.reference,
            "edges": [list(edge) for edge in t.edges]}


def topology_from_dict(data: dict) -> Topology:
    """Inverse of `topology_to_dict`, with full validation."""
    return from_edges(data["m"], data["reference"], data["edges"])


def schedule_to_dict(schedule: Schedule) -> dict:
    """JSON-ready description: {"slot_duration", "slots"}."""
    return {"slot_duration": schedule.slot_duration,
            "slots": [[list(pair) for pair in slot] for slot in schedule.slots]}
