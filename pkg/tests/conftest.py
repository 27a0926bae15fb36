import itertools

import networkx as nx
import pytest

from failover_lab.graph import Graph


def to_graph(nxg, target=None, source=None) -> Graph:
    mapping = {v: i for i, v in enumerate(sorted(nxg.nodes()))}
    edges = [(mapping[u], mapping[v]) for u, v in nxg.edges()]
    return Graph(len(mapping), edges, target=target, source=source)


def atlas_connected(max_n=7, max_m=None, min_n=1):
    """All non-isomorphic connected graphs up to 7 nodes (graph atlas)."""
    out = []
    for nxg in nx.graph_atlas_g():
        n, m = nxg.number_of_nodes(), nxg.number_of_edges()
        if n < min_n or n > max_n:
            continue
        if max_m is not None and m > max_m:
            continue
        if n > 0 and nx.is_connected(nxg):
            out.append(to_graph(nxg))
    return out


def small_connected_corpus_m9():
    """Non-isomorphic connected graphs with at most 9 edges.

    Atlas covers n <= 7; larger orders with m <= 9 are trees plus one or two
    extra edges, generated by augmentation and hash-bucketed iso filtering.
    """
    corpus = atlas_connected(max_n=7, max_m=9)
    seen = {}

    def add(nxg):
        key = nx.weisfeiler_lehman_graph_hash(nxg, iterations=3)
        bucket = seen.setdefault(key, [])
        for other in bucket:
            if nx.is_isomorphic(nxg, other):
                return
        bucket.append(nxg)
        corpus.append(to_graph(nxg))

    def augmented(base_graphs, extra):
        grown = []
        for nxg in base_graphs:
            nodes = sorted(nxg.nodes())
            for u, v in itertools.combinations(nodes, 2):
                if not nxg.has_edge(u, v):
                    h = nxg.copy()
                    h.add_edge(u, v)
                    grown.append(h)
        return grown

    for n in (8, 9, 10):
        trees = list(nx.nonisomorphic_trees(n))
        for t in trees:
            add(t)
        if n <= 9:
            unicyclic = augmented(trees, 1)
            for h in unicyclic:
                if h.number_of_edges() <= 9:
                    add(h)
            if n == 8:
                for h in augmented(unicyclic, 1):
                    if h.number_of_edges() <= 9:
                        add(h)
    return corpus


def complete_graph(n) -> Graph:
    return Graph(n, itertools.combinations(range(n), 2))


@pytest.fixture(scope="session")
def atlas7():
    return atlas_connected(max_n=7)


@pytest.fixture(scope="session")
def atlas6():
    return atlas_connected(max_n=6)
