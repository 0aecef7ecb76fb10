"""Measure validation, parsing, and cumulative edge vectors."""

from __future__ import annotations

import numpy as np
import pytest

from gsobolev import (
    DiscreteMeasure,
    MassNotNormalized,
    NegativeMass,
    NodeOutOfRange,
    ParseError,
    SparseEdgeVector,
    gamma_mass,
    load_measures,
    root_path_edges,
    save_measures,
    shortest_path_tree,
)
from conftest import random_weighted_graph


class TestDiscreteMeasure:
    def test_dirac(self):
        mu = DiscreteMeasure.dirac(3)
        assert mu.nodes == (3,)
        assert mu.masses == (1.0,)
        assert mu.support_size == 1
        assert mu.max_node() == 3

    def test_hashable(self):
        a = DiscreteMeasure((0, 1), (0.5, 0.5))
        b = DiscreteMeasure((0, 1), (0.5, 0.5))
        assert a == b
        assert hash(a) == hash(b)

    def test_duplicate_node(self):
        with pytest.raises(ValueError):
            DiscreteMeasure((1, 1), (0.5, 0.5))

    def test_negative_mass(self):
        with pytest.raises(NegativeMass):
            DiscreteMeasure((0, 1), (1.5, -0.5))

    def test_nan_mass(self):
        with pytest.raises(NegativeMass):
            DiscreteMeasure((0,), (float("nan"),))

    def test_not_normalized(self):
        with pytest.raises(MassNotNormalized):
            DiscreteMeasure((0, 1), (0.5, 0.6))

    def test_within_tolerance(self):
        DiscreteMeasure((0, 1), (0.5, 0.5 + 5e-10))

    def test_negative_node(self):
        with pytest.raises(NodeOutOfRange):
            DiscreteMeasure((-1,), (1.0,))

    def test_empty(self):
        with pytest.raises(ValueError):
            DiscreteMeasure((), ())

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            DiscreteMeasure((0, 1), (1.0,))

    def test_normalized_constructor(self):
        mu = DiscreteMeasure.normalized([(0, 2.0), (1, 6.0)])
        assert mu.masses == (0.25, 0.75)

    def test_normalized_zero_total(self):
        with pytest.raises(MassNotNormalized):
            DiscreteMeasure.normalized([(0, 0.0)])


class TestSparseEdgeVector:
    def test_pairs(self):
        vec = SparseEdgeVector(0, np.array([2, 5]), np.array([0.25, 1.0]))
        assert vec.pairs == [(2, 0.25), (5, 1.0)]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            SparseEdgeVector(0, np.array([1]), np.array([0.5, 0.5]))

    def test_frozen(self):
        vec = SparseEdgeVector(0, np.array([1]), np.array([1.0]))
        with pytest.raises(ValueError):
            vec.values[0] = 2.0


class TestGammaMass:
    def test_path_dirac(self, path_graph):
        rs = shortest_path_tree(path_graph, 0)
        vec = gamma_mass(rs, DiscreteMeasure.dirac(2))
        assert vec.pairs == [(0, 1.0), (1, 1.0)]

    def test_path_mixture(self, path_graph):
        rs = shortest_path_tree(path_graph, 0)
        mu = DiscreteMeasure((1, 2), (0.9, 0.1))
        vec = gamma_mass(rs, mu)
        assert vec.edge_ids.tolist() == [0, 1]
        np.testing.assert_allclose(vec.values, [1.0, 0.1])

    def test_mass_at_root_invisible(self, path_graph):
        rs = shortest_path_tree(path_graph, 0)
        vec = gamma_mass(rs, DiscreteMeasure.dirac(0))
        assert vec.edge_ids.size == 0

    def test_figure_dirac_crosses_two_edges(self, figure_graph):
        rs = shortest_path_tree(figure_graph, 0)
        vec = gamma_mass(rs, DiscreteMeasure.dirac(4))
        assert vec.pairs == [
            (figure_graph.edge_id(0, 1), 1.0),
            (figure_graph.edge_id(1, 4), 1.0),
        ]

    def test_cache_returns_same_object(self, path_graph):
        rs = shortest_path_tree(path_graph, 0)
        mu = DiscreteMeasure((1, 2), (0.5, 0.5))
        assert gamma_mass(rs, mu) is gamma_mass(rs, mu)
        # equal measures hit the same cache slot
        assert gamma_mass(rs, DiscreteMeasure((1, 2), (0.5, 0.5))) is gamma_mass(rs, mu)

    def test_support_outside_graph(self, path_graph):
        rs = shortest_path_tree(path_graph, 0)
        with pytest.raises(NodeOutOfRange):
            gamma_mass(rs, DiscreteMeasure.dirac(7))

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_per_node_walk(self, seed):
        g = random_weighted_graph(seed)
        rng = np.random.default_rng(seed + 100)
        root = int(rng.integers(g.node_count))
        rs = shortest_path_tree(g, root)
        size = int(rng.integers(1, min(6, g.node_count) + 1))
        nodes = rng.choice(g.node_count, size=size, replace=False)
        masses = rng.dirichlet(np.ones(size))
        mu = DiscreteMeasure(tuple(int(x) for x in nodes), tuple(masses / masses.sum()))

        expect = np.zeros(g.edge_count)
        for node, mass in zip(mu.nodes, mu.masses):
            for e in root_path_edges(rs, node):
                expect[e] += mass
        vec = gamma_mass(rs, mu)
        dense = np.zeros(g.edge_count)
        dense[vec.edge_ids] = vec.values
        np.testing.assert_allclose(dense, expect, rtol=1e-12, atol=1e-15)
        assert (np.diff(vec.edge_ids) > 0).all()

    @pytest.mark.parametrize("seed", range(4))
    def test_total_outflow_is_offroot_mass(self, seed):
        # mass leaving the root over its incident tree edges equals the
        # mass supported away from the root
        g = random_weighted_graph(seed)
        rs = shortest_path_tree(g, 0)
        rng = np.random.default_rng(seed)
        nodes = rng.choice(g.node_count, size=min(5, g.node_count), replace=False)
        masses = rng.dirichlet(np.ones(nodes.size))
        mu = DiscreteMeasure(tuple(int(x) for x in nodes), tuple(masses / masses.sum()))
        vec = gamma_mass(rs, mu)
        root_edges = {int(rs.parent_edge[v]) for v in range(g.node_count) if rs.parent[v] == 0}
        out = sum(val for e, val in vec.pairs if e in root_edges)
        away = sum(m for n, m in zip(mu.nodes, mu.masses) if n != 0)
        assert out == pytest.approx(away, abs=1e-12)


class TestMeasureFiles:
    def test_round_trip(self, tmp_path, path_graph):
        mus = [
            DiscreteMeasure.dirac(2),
            DiscreteMeasure((0, 1, 2), (0.25, 0.25, 0.5)),
        ]
        path = str(tmp_path / "m.txt")
        save_measures(mus, path)
        back = load_measures(path, path_graph)
        assert back == mus

    def test_comments_and_spaces(self, tmp_path, path_graph):
        path = tmp_path / "m.txt"
        path.write_text("# measures\n\na 0 0.5 1 0.5\nb 2 1.0\n")
        out = load_measures(str(path), path_graph)
        assert len(out) == 2
        assert out[1] == DiscreteMeasure.dirac(2)

    def test_even_token_count(self, tmp_path, path_graph):
        path = tmp_path / "m.txt"
        path.write_text("a 0 0.5 1\n")
        with pytest.raises(ParseError):
            load_measures(str(path), path_graph)

    def test_bare_label(self, tmp_path, path_graph):
        path = tmp_path / "m.txt"
        path.write_text("a\n")
        with pytest.raises(ParseError):
            load_measures(str(path), path_graph)

    def test_repeated_node(self, tmp_path, path_graph):
        path = tmp_path / "m.txt"
        path.write_text("a 1 0.5 1 0.5\n")
        with pytest.raises(ParseError):
            load_measures(str(path), path_graph)

    def test_node_outside_graph(self, tmp_path, path_graph):
        path = tmp_path / "m.txt"
        path.write_text("a 9 1.0\n")
        with pytest.raises(NodeOutOfRange) as err:
            load_measures(str(path), path_graph)
        assert ":1:" in str(err.value)

    def test_negative_mass(self, tmp_path, path_graph):
        path = tmp_path / "m.txt"
        path.write_text("a 0 1.5 1 -0.5\n")
        with pytest.raises(NegativeMass):
            load_measures(str(path), path_graph)

    def test_unnormalized_rejected_then_rescaled(self, tmp_path, path_graph):
        path = tmp_path / "m.txt"
        path.write_text("a 0 2.0 1 2.0\n")
        with pytest.raises(MassNotNormalized):
            load_measures(str(path), path_graph)
        out = load_measures(str(path), path_graph, normalize=True)
        assert out[0].masses == (0.5, 0.5)

    def test_garbage_mass(self, tmp_path, path_graph):
        path = tmp_path / "m.txt"
        path.write_text("a 0 lots\n")
        with pytest.raises(ParseError):
            load_measures(str(path), path_graph)
