"""Distance matrices, exponential kernels, and definiteness diagnostics."""

from __future__ import annotations

import math

import numpy as np
import pytest

from gsobolev import (
    DiscreteMeasure,
    GramSpec,
    InvalidBandwidth,
    InvalidExponent,
    KERNEL_EXP,
    KERNEL_EXP_POW,
    NonPositiveEntry,
    RootMismatch,
    SymmetricMatrix,
    VARIANT_SOBOLEV_TRANSPORT,
    check_negative_definite,
    distance_matrix,
    divisibility_check,
    gamma_mass,
    gram_matrix,
    measure_distance,
    min_eigenvalue,
    prepare_root,
    read_matrix_csv,
    write_matrix_csv,
)
from conftest import random_weighted_graph


@pytest.fixture()
def path_triple(path_graph):
    """Prep and cumulative vectors for the three diracs on the unit path."""
    rs, prep = prepare_root(path_graph, 0)
    vecs = [gamma_mass(rs, DiscreteMeasure.dirac(k)) for k in range(3)]
    return rs, prep, vecs


class TestSymmetricMatrix:
    def test_round_trip(self):
        a = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]])
        m = SymmetricMatrix.from_full(a)
        np.testing.assert_array_equal(m.full(), a)
        assert m.value(0, 2) == 3.0
        assert m.value(2, 0) == 3.0
        np.testing.assert_array_equal(m.diagonal(), [1.0, 4.0, 6.0])
        assert m.max_entry() == 6.0

    def test_wrong_triangle_size(self):
        with pytest.raises(ValueError):
            SymmetricMatrix(3, np.zeros(5))

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            SymmetricMatrix.from_full(np.zeros((2, 3)))

    def test_index_error(self):
        m = SymmetricMatrix.from_full(np.zeros((2, 2)))
        with pytest.raises(IndexError):
            m.value(0, 2)

    def test_empty(self):
        m = SymmetricMatrix(0, np.zeros(0))
        assert m.full().shape == (0, 0)
        assert m.max_entry() == 0.0


class TestDistanceMatrix:
    def test_pinned_order_one(self, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, 1.0)
        np.testing.assert_array_equal(
            D.full(), [[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]
        )

    def test_pinned_order_two(self, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, 2.0)
        assert D.value(0, 1) == pytest.approx(0.6367614216550531, rel=1e-15)
        assert D.value(0, 2) == pytest.approx(1.0481470739682048, rel=1e-15)
        assert D.value(1, 2) == pytest.approx(0.8325546111576977, rel=1e-15)

    def test_pinned_order_infinity(self, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, math.inf)
        np.testing.assert_allclose(
            D.full(), [[0.0, 0.5, 1.0], [0.5, 0.0, 1.0], [1.0, 1.0, 0.0]]
        )

    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0, math.inf])
    def test_matches_per_pair(self, p):
        g = random_weighted_graph(3)
        rng = np.random.default_rng(42)
        rs, prep = prepare_root(g, int(rng.integers(g.node_count)))
        pool = []
        for _ in range(8):
            nodes = rng.choice(g.node_count, size=3, replace=False)
            mass = rng.dirichlet(np.ones(3))
            pool.append(
                DiscreteMeasure(tuple(int(x) for x in nodes), tuple(mass / mass.sum()))
            )
        vecs = [gamma_mass(rs, mu) for mu in pool]
        D = distance_matrix(prep, vecs, p)
        for i in range(8):
            for j in range(8):
                want = measure_distance(rs, prep, pool[i], pool[j], p)
                assert D.value(i, j) == pytest.approx(want, rel=1e-12, abs=1e-15)

    def test_transport_variant_matches(self, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, 2.0, variant=VARIANT_SOBOLEV_TRANSPORT)
        # raw unit lengths: same values as the order-1 matrix except the
        # two-edge pair, which collapses to 2 ** (1/2)
        assert D.value(0, 1) == 1.0
        assert D.value(0, 2) == pytest.approx(math.sqrt(2.0), rel=1e-15)

    def test_thread_count_does_not_change_bits(self):
        g = random_weighted_graph(5, n_lo=15, n_hi=25)
        rng = np.random.default_rng(7)
        rs, prep = prepare_root(g, 0)
        pool = []
        for _ in range(12):
            nodes = rng.choice(g.node_count, size=4, replace=False)
            mass = rng.dirichlet(np.ones(4))
            pool.append(
                DiscreteMeasure(tuple(int(x) for x in nodes), tuple(mass / mass.sum()))
            )
        vecs = [gamma_mass(rs, mu) for mu in pool]
        base = distance_matrix(prep, vecs, 1.5, threads=1)
        for threads in (2, 4, 7):
            again = distance_matrix(prep, vecs, 1.5, threads=threads)
            assert np.array_equal(base.upper, again.upper)

    def test_root_mismatch(self, path_graph):
        _, prep0 = prepare_root(path_graph, 0)
        rs2, _ = prepare_root(path_graph, 2)
        vec = gamma_mass(rs2, DiscreteMeasure.dirac(0))
        with pytest.raises(RootMismatch):
            distance_matrix(prep0, [vec], 1.0)

    def test_empty_input(self, path_graph):
        _, prep = prepare_root(path_graph, 0)
        assert distance_matrix(prep, [], 2.0).dim == 0

    def test_all_at_root(self, path_graph):
        rs, prep = prepare_root(path_graph, 0)
        vecs = [gamma_mass(rs, DiscreteMeasure.dirac(0))] * 3
        assert distance_matrix(prep, vecs, 2.0).max_entry() == 0.0
        assert distance_matrix(prep, vecs, math.inf).max_entry() == 0.0


class TestGramMatrix:
    def test_pinned_kernel(self, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, 2.0)
        K = gram_matrix(D, GramSpec(p=2.0, t=1.0))
        np.testing.assert_allclose(
            K.full(),
            [
                [1.0, 0.52900287, 0.35058676],
                [0.52900287, 1.0, 0.43493677],
                [0.35058676, 0.43493677, 1.0],
            ],
            rtol=1e-7,
        )
        assert min_eigenvalue(K) == pytest.approx(0.4570534647840941, rel=1e-12)
        np.testing.assert_array_equal(K.diagonal(), np.ones(3))

    def test_power_form(self, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, 2.0)
        K = gram_matrix(D, GramSpec(p=2.0, t=0.5, form=KERNEL_EXP_POW))
        want = math.exp(-0.5 * D.value(0, 1) ** 2)
        assert K.value(0, 1) == pytest.approx(want, rel=1e-15)

    def test_bandwidth_scales_monotonically(self, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, 1.0)
        k_narrow = gram_matrix(D, GramSpec(p=1.0, t=10.0)).value(0, 2)
        k_wide = gram_matrix(D, GramSpec(p=1.0, t=0.1)).value(0, 2)
        assert k_narrow < k_wide < 1.0

    def test_subset_selection(self, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, 1.0)
        K = gram_matrix(D, GramSpec(p=1.0, t=1.0, measures=(0, 2)))
        assert K.dim == 2
        assert K.value(0, 1) == pytest.approx(math.exp(-2.0), rel=1e-15)

    def test_subset_out_of_range(self, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, 1.0)
        with pytest.raises(IndexError):
            gram_matrix(D, GramSpec(p=1.0, t=1.0, measures=(0, 5)))

    def test_spec_validation(self):
        with pytest.raises(InvalidBandwidth):
            GramSpec(p=1.0, t=0.0)
        with pytest.raises(InvalidBandwidth):
            GramSpec(p=1.0, t=-1.0)
        with pytest.raises(ValueError):
            GramSpec(p=1.0, t=1.0, form="nope")
        with pytest.raises(InvalidExponent):
            GramSpec(p=3.0, t=1.0)
        # outside [1, 2] needs the explicit opt-in
        GramSpec(p=3.0, t=1.0, allow_outside_range=True)


class TestDefiniteness:
    def test_clean_instance(self, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, 2.0)
        rep = check_negative_definite(D, 2.0, trials=200, seed=0)
        assert rep.passed
        assert rep.violations == 0
        assert rep.spectral_passed
        assert rep.spectral_min >= -1e-8
        assert not rep.outside_guaranteed_range

    def test_flags_orders_outside_range(self, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, 1.0)
        rep = check_negative_definite(D, 3.0, trials=10, seed=0)
        assert rep.outside_guaranteed_range

    def test_detects_violation(self):
        # cube of the line metric on four points: the doubly centered
        # negation has an eigenvalue near -5, far past any tolerance
        D = SymmetricMatrix.from_full(
            np.abs(np.subtract.outer(np.arange(4.0), np.arange(4.0))) ** 3
        )
        rep = check_negative_definite(D, 1.0, trials=200, seed=0)
        assert not rep.passed
        assert not rep.spectral_passed
        assert rep.spectral_min == pytest.approx(-5.0, rel=1e-9)
        assert rep.violations > 0
        assert rep.worst > 0.0

    def test_empty_matrix(self):
        rep = check_negative_definite(SymmetricMatrix(0, np.zeros(0)), 1.0)
        assert rep.passed


class TestDivisibility:
    def test_exponential_kernel_divisible(self, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, 2.0)
        K = gram_matrix(D, GramSpec(p=2.0, t=1.0))
        for n in (1, 2, 5, 10):
            assert divisibility_check(K, n)

    def test_rejects_bad_root_count(self, path_triple):
        _, prep, vecs = path_triple
        K = gram_matrix(distance_matrix(prep, vecs, 1.0), GramSpec(p=1.0, t=1.0))
        with pytest.raises(ValueError):
            divisibility_check(K, 0)

    def test_rejects_zero_entries(self):
        m = SymmetricMatrix.from_full(np.array([[1.0, 0.0], [0.0, 1.0]]))
        with pytest.raises(NonPositiveEntry):
            divisibility_check(m, 2)


class TestMatrixCsv:
    def test_round_trip_exact(self, tmp_path, path_triple):
        _, prep, vecs = path_triple
        D = distance_matrix(prep, vecs, 2.0)
        path = str(tmp_path / "d.csv")
        write_matrix_csv(D, path)
        back = read_matrix_csv(path)
        assert back.dim == 3
        np.testing.assert_array_equal(back.upper, D.upper)
        first = open(path).readline().strip()
        assert first == "3"

    def test_empty_file(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("")
        with pytest.raises(ValueError):
            read_matrix_csv(str(path))

    def test_row_count_mismatch(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("2\n0.0,1.0\n")
        with pytest.raises(ValueError):
            read_matrix_csv(str(path))
