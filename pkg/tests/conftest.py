import numpy as np
import pytest

from edgefdr import ObservedGraph, all_pairs

# Toy fixture used throughout: 5 nodes, observed true edges and two
# unsampled pairs, one of which hides a true edge.
TOY_OBSERVED_EDGES = [(0, 1), (0, 3), (1, 2), (1, 4), (2, 4)]
TOY_MISSING = [(1, 3), (2, 3)]
TOY_HIDDEN_EDGE = (1, 3)
TOY_OBSERVED_FALSE = [(0, 2), (0, 4), (3, 4)]


@pytest.fixture
def toy_graph():
    return ObservedGraph(5, TOY_OBSERVED_EDGES, TOY_MISSING)


@pytest.fixture
def make_random_graph():
    """Factory for random observed graphs with a valid mask."""

    def factory(rng, n=12, directed=False, self_pairs=False, p_edge=0.3,
                p_missing=0.2):
        universe = all_pairs(n, directed, self_pairs)
        missing_mask = rng.random(len(universe)) < p_missing
        edge_mask = (rng.random(len(universe)) < p_edge) & ~missing_mask
        return ObservedGraph(n, universe[edge_mask], universe[missing_mask],
                             directed=directed, self_pairs=self_pairs)

    return factory


def pair_set(pairs):
    return set(map(tuple, np.asarray(pairs, dtype=int).tolist()))
