"""Graph representation, ER generation and the pairwise-stability audit."""

import numpy as np
import pytest
from scipy import stats

from herdsim.graph import Graph, degree_histogram, er_random, is_pairwise_stable


class TestGraphBasics:
    def test_empty_graph(self):
        g = Graph(5)
        assert g.n_links == 0
        assert g.density() == 0.0
        assert g.degrees().tolist() == [0] * 5

    def test_star_degrees(self):
        g = Graph(6)
        for leaf in range(1, 6):
            g.add_link(0, leaf)
        assert sorted(g.degrees().tolist()) == [1, 1, 1, 1, 1, 5]

    def test_add_then_remove_restores(self):
        g = Graph(4)
        g.add_link(1, 3)
        before = g.copy()
        g.add_link(0, 2)
        g.remove_link(0, 2)
        assert g == before

    def test_add_updates_both_degrees(self):
        g = Graph(4)
        g.add_link(1, 2)
        assert g.degree(1) == 1 and g.degree(2) == 1

    def test_duplicate_add_rejected(self):
        g = Graph(3)
        g.add_link(0, 1)
        with pytest.raises(ValueError):
            g.add_link(0, 1)
        with pytest.raises(ValueError):
            g.add_link(1, 0)

    def test_remove_missing_rejected(self):
        g = Graph(3)
        with pytest.raises(ValueError):
            g.remove_link(0, 1)

    def test_self_loop_rejected(self):
        g = Graph(3)
        with pytest.raises(ValueError):
            g.add_link(1, 1)

    def test_symmetry_invariant_under_random_op_sequences(self):
        rng = np.random.default_rng(0)
        g = Graph(10)
        for _ in range(500):
            i, j = rng.integers(0, 10, size=2)
            if i == j:
                continue
            if g.has_link(i, j):
                g.remove_link(i, j)
            else:
                g.add_link(i, j)
            assert np.array_equal(g.adj, g.adj.T)
            assert not g.adj.diagonal().any()
            indptr, indices = g.csr()
            assert indptr[-1] == 2 * g.n_links
            assert np.array_equal(np.diff(indptr), g.degrees())


class TestErRandom:
    def test_rho_zero_empty(self):
        g = er_random(30, 0.0, np.random.default_rng(1))
        assert g.n_links == 0

    def test_rho_one_complete(self):
        g = er_random(30, 1.0, np.random.default_rng(2))
        assert g.degrees().tolist() == [29] * 30

    def test_mean_degree(self):
        # binomial oracle: E[degree] = rho (n - 1) = 49.5
        rng = np.random.default_rng(3)
        means = [er_random(100, 0.5, rng).degrees().mean() for _ in range(100)]
        assert abs(np.mean(means) - 49.5) < 1.5

    def test_rejects_bad_density(self):
        with pytest.raises(ValueError):
            er_random(10, 1.5, np.random.default_rng(0))

    def test_edge_count_distribution_chi_square(self):
        # edge count ~ Binomial(n(n-1)/2, rho); GOF at the 1% level
        n, rho, draws = 12, 0.3, 1000
        pairs = n * (n - 1) // 2
        rng = np.random.default_rng(5)
        counts = np.array([er_random(n, rho, rng).n_links for _ in range(draws)])
        lo, hi = stats.binom.ppf([0.005, 0.995], pairs, rho).astype(int)
        edges = np.arange(lo, hi + 1)
        expected = stats.binom.pmf(edges, pairs, rho) * draws
        observed = np.array([(counts == e).sum() for e in edges])
        # pool the tails so expected cell counts stay reasonable
        observed[0] += (counts < lo).sum()
        observed[-1] += (counts > hi).sum()
        expected[0] += stats.binom.cdf(lo - 1, pairs, rho) * draws
        expected[-1] += stats.binom.sf(hi, pairs, rho) * draws
        chi2 = ((observed - expected) ** 2 / expected).sum()
        crit = stats.chi2.ppf(0.99, len(edges) - 1)
        assert chi2 < crit


class TestSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(5)
        g = er_random(15, 0.3, rng)
        assert Graph.from_edge_text(g.to_edge_text()) == g

    def test_header_carries_n_and_density(self):
        g = Graph(4)
        g.add_link(0, 1)
        text = g.to_edge_text()
        head = text.splitlines()[0]
        assert head.startswith("# n=4 density=")

    def test_missing_header_rejected(self):
        with pytest.raises(ValueError):
            Graph.from_edge_text("0 1\n")

    def test_file_round_trip(self, tmp_path):
        g = er_random(10, 0.4, np.random.default_rng(6))
        path = tmp_path / "g.edges"
        g.save(path)
        assert Graph.load(path) == g


class TestDegreeHistogram:
    def test_pooled_counts(self):
        g1 = Graph(3)
        g1.add_link(0, 1)
        g2 = Graph(3)
        counts = degree_histogram([g1, g2])
        assert counts.tolist() == [4, 2]  # four isolated nodes, two of degree 1


class TestPairwiseStability:
    def test_empty_graph_stable_when_links_unprofitable(self):
        g = Graph(4)
        stable, violations = is_pairwise_stable(
            g, lambda i, nb: 0.5, [1.0] * 4
        )  # flat utility: marginal 0 < cost 1
        assert stable and violations == []

    def test_mutual_gain_missing_link_flagged(self):
        g = Graph(2)
        stable, violations = is_pairwise_stable(
            g, lambda i, nb: float(len(nb)), [0.5, 0.5]
        )  # each link worth 1 > cost 0.5
        assert not stable
        assert violations == [(0, 1, "add")]

    def test_deletion_gain_flagged(self):
        g = Graph(2)
        g.add_link(0, 1)
        stable, violations = is_pairwise_stable(
            g, lambda i, nb: -float(len(nb)), [0.0, 0.0]
        )  # links strictly hurt
        assert violations == [(0, 1, "delete")]

    def test_one_sided_gain_is_not_an_addition_violation(self):
        g = Graph(2)
        gains = {0: 1.0, 1: -1.0}
        stable, violations = is_pairwise_stable(
            g, lambda i, nb: gains[i] * len(nb), [0.0, 0.0]
        )
        assert stable
