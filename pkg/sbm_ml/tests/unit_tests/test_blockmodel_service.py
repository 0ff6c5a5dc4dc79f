import numpy as np
from hypothesis import given, settings as hypothesis_settings, strategies as st
from hypothesis.extra.django import TestCase

from sbm_ml.exceptions import InvalidGraphError, InvalidPermutationError, InvalidSpecError
from sbm_ml.models import BlockSpec, Dyad, Graph, Vertex
from sbm_ml.services import BlockmodelService

specs = st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=4).filter(
    lambda sizes: sum(sizes) >= 2
).map(lambda sizes: BlockSpec(tuple(sizes)))

FIGURE_EDGES = [
    ((1, 1), (1, 2)), ((1, 2), (1, 3)), ((1, 2), (3, 3)), ((1, 3), (3, 1)),
    ((2, 1), (1, 1)), ((2, 1), (2, 2)), ((2, 1), (1, 2)), ((2, 1), (3, 2)),
    ((2, 2), (1, 3)), ((2, 2), (2, 3)), ((2, 2), (3, 2)), ((2, 3), (2, 4)),
    ((2, 3), (3, 3)), ((2, 4), (3, 1)), ((3, 1), (3, 2)),
]


class BlockmodelServiceTest(TestCase):
    def setUp(self) -> None:
        self.service = BlockmodelService()

    def test_block_spec_invalid(self):
        for sizes in [(), (0, 2), (1,), (2, -1)]:
            with self.assertRaises(InvalidSpecError):
                BlockSpec(sizes)

    def test_dyad_canonical_order(self):
        dyad = Dyad.of((2, 1), (1, 3))
        self.assertEqual(dyad.first, Vertex(1, 3))
        self.assertEqual(dyad, Dyad.of((1, 3), (2, 1)))
        with self.assertRaises(InvalidGraphError):
            Dyad.of((1, 1), (1, 1))

    def test_enumerate_dyads_success(self):
        dyads = self.service.enumerate_dyads(BlockSpec((3, 2)))
        self.assertEqual(len(dyads), 10)
        self.assertEqual(dyads[0], Dyad.of((1, 1), (1, 2)))
        self.assertEqual(dyads[-1], Dyad.of((2, 1), (2, 2)))
        self.assertEqual(dyads, sorted(dyads))

    def test_design_matrix_three_two(self):
        design = self.service.design_matrix(BlockSpec((3, 2)))
        expected = np.array([
            [1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
            [1, 0, 0, 0, 1, 1, 1, 0, 0, 0],
            [0, 1, 0, 0, 1, 0, 0, 1, 1, 0],
            [0, 0, 1, 0, 0, 1, 0, 1, 0, 1],
            [0, 0, 0, 1, 0, 0, 1, 0, 1, 1],
            [1, 1, 0, 0, 1, 0, 0, 0, 0, 0],
            [0, 0, 1, 1, 0, 1, 1, 1, 1, 0],
            [0, 0, 0, 0, 0, 0, 0, 0, 0, 1],
        ])
        np.testing.assert_array_equal(design.entries, expected)
        self.assertEqual(design.row_labels[0], 'beta(1,1)')
        self.assertEqual(design.row_labels[-2], 'alpha(1,2)')
        self.assertEqual(design.column_labels[2], 'p(1,1)(2,1)')

    @given(specs)
    @hypothesis_settings(max_examples=30, deadline=None)
    def test_design_matrix_columns_sum_to_three(self, spec):
        design = self.service.design_matrix(spec)
        k = spec.k
        self.assertEqual(design.shape[0], spec.n + k + k * (k - 1) // 2)
        self.assertTrue(np.all(design.entries.sum(axis=0) == 3))

    def test_sufficient_statistic_figure_graph(self):
        graph = Graph(BlockSpec((3, 4, 3)), frozenset(Dyad.of(a, b) for a, b in FIGURE_EDGES))
        statistic = self.service.sufficient_statistic(graph)
        self.assertEqual(statistic.vector, (2, 4, 3, 4, 4, 3, 2, 3, 3, 2, 2, 3, 2, 3, 4, 1))
        self.assertEqual(sum(statistic.degrees), 2 * sum(statistic.block_counts))

    def test_sufficient_statistic_empty_graph(self):
        statistic = self.service.sufficient_statistic(Graph(BlockSpec((2, 2))))
        self.assertEqual(set(statistic.vector), {0})

    def test_graph_with_foreign_vertex(self):
        with self.assertRaises(InvalidGraphError):
            Graph(BlockSpec((2, 1)), frozenset({Dyad.of((1, 1), (2, 2))}))

    def test_rank_exact_success(self):
        for sizes, rank in [((3, 2), 6), ((4,), 4), ((2,), 1), ((1, 1, 1), 3)]:
            design = self.service.design_matrix(BlockSpec(sizes))
            self.assertEqual(self.service.rank_exact(design).rank, rank)

    def test_rank_exact_pivots_are_lexicographically_first(self):
        result = self.service.rank_exact(self.service.design_matrix(BlockSpec((3, 2))))
        self.assertEqual(result.pivot_rows, (0, 1, 2, 3, 4, 5))

    @given(specs)
    @hypothesis_settings(max_examples=30, deadline=None)
    def test_row_dependencies_annihilate(self, spec):
        design = self.service.design_matrix(spec)
        dependencies = np.array(self.service.row_dependencies(spec))
        self.assertEqual(dependencies.shape, (spec.k, design.shape[0]))
        self.assertFalse(np.any(dependencies @ design.entries))

    def test_permute_blocks_success(self):
        spec = BlockSpec((5, 3, 1))
        self.assertEqual(self.service.permute_blocks(spec, [3, 1, 2]), BlockSpec((1, 5, 3)))

    def test_permute_blocks_invalid(self):
        with self.assertRaises(InvalidPermutationError):
            self.service.permute_blocks(BlockSpec((2, 2)), [1, 1])

    def test_descending_permutation_success(self):
        spec = BlockSpec((1, 3, 2, 3))
        tau = self.service.descending_permutation(spec)
        self.assertEqual(tau, [2, 4, 3, 1])
        self.assertEqual(self.service.permute_blocks(spec, tau), BlockSpec((3, 3, 2, 1)))

    def test_block_relabeling_preserves_design(self):
        spec = BlockSpec((3, 2))
        tau = [2, 1]
        columns = self.service.block_relabeling(spec, tau)
        self.assertEqual(sorted(columns), list(range(10)))
        permuted = self.service.design_matrix(self.service.permute_blocks(spec, tau))
        original = self.service.design_matrix(spec)
        self.assertTrue(self.service.row_space_equal(permuted.entries, original.entries[:, columns]))

    def test_hypersimplex_row_space(self):
        for n in range(3, 7):
            design = self.service.design_matrix(BlockSpec((n,)))
            self.assertTrue(self.service.row_space_equal(design.entries, self.service.hypersimplex_matrix(n)))

    def test_contracted_single_vertex_block_matches_single_block(self):
        for n in range(2, 6):
            with_star = self.service.design_matrix(BlockSpec((n, 1)))
            single = self.service.design_matrix(BlockSpec((n + 1,)))
            relabeled = tuple(
                Dyad(*(Vertex(1, n + 1) if v.block == 2 else v for v in d.endpoints))
                for d in with_star.columns
            )
            self.assertEqual(relabeled, single.columns)
            self.assertTrue(self.service.row_space_equal(with_star.entries, single.entries))

    @given(st.data())
    @hypothesis_settings(max_examples=40, deadline=None)
    def test_sufficient_statistic_is_design_times_indicator(self, data):
        spec = data.draw(specs.filter(lambda spec: spec.n <= 8))
        dyads = self.service.enumerate_dyads(spec)
        chosen = data.draw(st.lists(st.booleans(), min_size=len(dyads), max_size=len(dyads)))
        graph = Graph(spec, frozenset(d for d, keep in zip(dyads, chosen) if keep))
        design = self.service.design_matrix(spec)
        statistic = self.service.sufficient_statistic(graph)
        self.assertEqual(list(statistic.vector), (design.entries @ self.service.indicator(graph, design)).tolist())
        self.assertEqual(sum(statistic.degrees), 2 * sum(statistic.block_counts))

    @given(specs, st.randoms())
    @hypothesis_settings(max_examples=30, deadline=None)
    def test_rank_exact_invariant_under_permutation(self, spec, random):
        tau = list(range(1, spec.k + 1))
        random.shuffle(tau)
        permuted = self.service.permute_blocks(spec, tau)
        self.assertEqual(
            self.service.rank_exact(self.service.design_matrix(spec)).rank,
            self.service.rank_exact(self.service.design_matrix(permuted)).rank,
        )

    @given(specs)
    @hypothesis_settings(max_examples=30, deadline=None)
    def test_rank_exact_bounded_by_block_dependencies(self, spec):
        k = spec.k
        rank = self.service.rank_exact(self.service.design_matrix(spec)).rank
        self.assertLessEqual(rank, spec.n + k + k * (k - 1) // 2 - k)
