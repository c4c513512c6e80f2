"""Bipartite human/sensor topologies.

Both supported layouts are biregular: every human sees ``k_h`` sensors and
every sensor reports to ``k_s`` humans, so the edges fit in an
``(M, k_h)`` array of sensor indices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOPOLOGY_KINDS = ("partition", "random_bipartite")


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Topology:
    n_humans: int
    n_sensors: int
    neighbors: np.ndarray  # (M, k_h) sensor indices per human

    def __post_init__(self):
        nb = self.neighbors
        if nb.ndim != 2 or nb.shape[0] != self.n_humans or nb.shape[1] < 1:
            raise TopologyError("every human needs at least one sensor")
        if nb.min() < 0 or nb.max() >= self.n_sensors:
            raise TopologyError("sensor index out of range")
        if any(len(set(row)) != len(row) for row in nb.tolist()):
            raise TopologyError("a human is connected to the same sensor twice")
        if np.bincount(nb.ravel(), minlength=self.n_sensors).min() < 1:
            raise TopologyError("every sensor needs at least one human")

    @property
    def human_sensors(self) -> list[list[int]]:
        return self.neighbors.tolist()

    @property
    def sensor_humans(self) -> list[list[int]]:
        out = [[] for _ in range(self.n_sensors)]
        for m, row in enumerate(self.neighbors.tolist()):
            for i in row:
                out[i].append(m)
        return out

    @property
    def sensor_degree(self) -> np.ndarray:
        return np.bincount(self.neighbors.ravel(), minlength=self.n_sensors)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(m, i) for m, row in enumerate(self.neighbors.tolist()) for i in row]


def resolve_degrees(kind: str, n_sensors: int, n_humans: int, k_h=None, k_s=None) -> tuple[int, int]:
    """Fill in and check ``(k_h, k_s)`` so that ``M * k_h == N * k_s``."""
    if kind == "partition":
        if n_sensors % n_humans:
            raise TopologyError(
                f"partition needs N divisible by M: N={n_sensors} is not a multiple of M={n_humans}"
            )
        return n_sensors // n_humans, 1
    if kind != "random_bipartite":
        raise TopologyError(f"unknown topology {kind!r}; expected one of {TOPOLOGY_KINDS}")
    if k_h is None and k_s is None:
        raise TopologyError("random_bipartite needs k_h or k_s")
    if k_h is None:
        if (n_sensors * k_s) % n_humans:
            raise TopologyError(f"N*k_s = {n_sensors * k_s} is not divisible by M={n_humans}")
        k_h = n_sensors * k_s // n_humans
    if k_s is None:
        if (n_humans * k_h) % n_sensors:
            raise TopologyError(f"M*k_h = {n_humans * k_h} is not divisible by N={n_sensors}")
        k_s = n_humans * k_h // n_sensors
    if n_humans * k_h != n_sensors * k_s:
        raise TopologyError(
            f"degree mismatch: M*k_h = {n_humans}*{k_h} = {n_humans * k_h} "
            f"but N*k_s = {n_sensors}*{k_s} = {n_sensors * k_s}"
        )
    if not 1 <= k_h <= n_sensors or not 1 <= k_s <= n_humans:
        raise TopologyError(f"degrees out of range: k_h={k_h}, k_s={k_s}")
    return k_h, k_s


def build_topology(
    kind: str,
    n_sensors: int,
    n_humans: int,
    rng: np.random.Generator | None = None,
    k_h=None,
    k_s=None,
    n_swaps=None,
) -> Topology:
    """Build a partition or random biregular bipartite topology.

    ``random_bipartite`` starts from a circulant biregular graph, relabels
    both sides at random and then mixes with degree-preserving edge swaps.
    """
    k_h, k_s = resolve_degrees(kind, n_sensors, n_humans, k_h, k_s)
    if kind == "partition":
        return Topology(n_humans, n_sensors, np.arange(n_sensors).reshape(n_humans, k_h))
    if rng is None:
        raise TopologyError("random_bipartite needs an rng")

    stubs = np.arange(n_humans * k_h) % n_sensors
    nb = rng.permutation(n_sensors)[stubs].reshape(n_humans, k_h)
    nb = nb[rng.permutation(n_humans)]
    adj = np.zeros((n_humans, n_sensors), dtype=bool)
    adj[np.arange(n_humans)[:, None], nb] = True

    n_edges = n_humans * k_h
    n_swaps = 10 * n_edges if n_swaps is None else n_swaps
    for _ in range(n_swaps):
        m1, m2 = rng.integers(n_humans, size=2)
        j1, j2 = rng.integers(k_h, size=2)
        a, b = nb[m1, j1], nb[m2, j2]
        if m1 == m2 or a == b or adj[m1, b] or adj[m2, a]:
            continue
        nb[m1, j1], nb[m2, j2] = b, a
        adj[m1, a] = adj[m2, b] = False
        adj[m1, b] = adj[m2, a] = True
    return Topology(n_humans, n_sensors, np.sort(nb, axis=1))
