import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from byzfuse.topology import Topology, TopologyError, build_topology, resolve_degrees


def test_partition_layout():
    topo = build_topology("partition", 60, 20)
    assert topo.neighbors.shape == (20, 3)
    assert (topo.sensor_degree == 1).all()
    assert topo.human_sensors[1] == [3, 4, 5]
    assert topo.sensor_humans[4] == [1]


def test_partition_needs_divisibility():
    with pytest.raises(TopologyError, match="N=7"):
        build_topology("partition", 7, 2)


def test_random_bipartite_degrees():
    topo = build_topology("random_bipartite", 60, 20, np.random.default_rng(0), k_h=3, k_s=1)
    assert topo.neighbors.shape == (20, 3)
    assert (topo.sensor_degree == 1).all()


def test_degree_resolution():
    assert resolve_degrees("random_bipartite", 60, 20, k_s=3) == (9, 3)
    assert resolve_degrees("random_bipartite", 60, 20, k_h=9) == (9, 3)
    with pytest.raises(TopologyError, match="degree mismatch"):
        resolve_degrees("random_bipartite", 60, 20, k_h=4, k_s=3)
    with pytest.raises(TopologyError):
        resolve_degrees("random_bipartite", 60, 20)
    with pytest.raises(TopologyError):
        resolve_degrees("ring", 60, 20)
    with pytest.raises(TopologyError):
        build_topology("random_bipartite", 60, 20, rng=None, k_s=3)


def test_topology_validation():
    with pytest.raises(TopologyError):
        Topology(2, 3, np.array([[0, 0], [1, 2]]))
    with pytest.raises(TopologyError):
        Topology(2, 4, np.array([[0, 1], [1, 2]]))
    with pytest.raises(TopologyError):
        Topology(2, 3, np.array([[0, 1], [1, 3]]))


def test_same_rng_same_graph():
    a = build_topology("random_bipartite", 60, 20, np.random.default_rng(4), k_s=3)
    b = build_topology("random_bipartite", 60, 20, np.random.default_rng(4), k_s=3)
    np.testing.assert_array_equal(a.neighbors, b.neighbors)


@given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.integers(1, 6), st.integers(1, 4))
def test_random_bipartite_is_biregular(seed, n_sensors, n_humans, k_s):
    k_s = min(k_s, n_humans)
    if (n_sensors * k_s) % n_humans or n_sensors * k_s // n_humans > n_sensors:
        return
    topo = build_topology("random_bipartite", n_sensors, n_humans, np.random.default_rng(seed), k_s=k_s)
    k_h = n_sensors * k_s // n_humans
    assert topo.neighbors.shape == (n_humans, k_h)
    assert (topo.sensor_degree == k_s).all()
    assert all(len(set(row)) == k_h for row in topo.human_sensors)
    assert sorted(topo.edges) == sorted({e for e in topo.edges})
