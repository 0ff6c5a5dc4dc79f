import numpy as np
from django.test import TestCase, tag

from sbm_ml.exceptions import ContractionError, NonGenericInputError
from sbm_ml.models import BlockSpec, Dyad, Vertex
from sbm_ml.services import BinomialService, BlockmodelService, FactorizationService


class FactorizationServiceTest(TestCase):
    def setUp(self) -> None:
        self.service = FactorizationService()
        self.blockmodel_service = BlockmodelService()

    def test_contraction_pair_success(self):
        pair = self.service.contraction_pair(BlockSpec((3, 2)))
        self.assertEqual(pair.m1_spec, BlockSpec((3, 1)))
        self.assertEqual(pair.m2_spec, BlockSpec((1, 2)))
        # |E1| = |E_11| + n_1, |E2| = n_k + C(n_k, 2)
        self.assertEqual(len(pair.m1_sources), 3 + 3)
        self.assertEqual(len(pair.m2_sources), 2 + 1)
        self.assertEqual(set(pair.m1_star_columns), {Vertex(1, 1), Vertex(1, 2), Vertex(1, 3)})
        self.assertEqual(set(pair.m2_star_columns), {1, 2})

    def test_contraction_pair_covers_cross_dyads(self):
        spec = BlockSpec((2, 3, 2))
        pair = self.service.contraction_pair(spec)
        columns = self.blockmodel_service.design_matrix(spec).columns
        cross = {c for c, d in enumerate(columns) if d.second.block == 3 and d.first.block < 3}
        m1_star = {c for col in pair.m1_star_columns.values() for c in pair.m1_sources[col]}
        m2_star = {c for col in pair.m2_star_columns.values() for c in pair.m2_sources[col]}
        self.assertEqual(m1_star, cross)
        self.assertEqual(m2_star, cross)
        self.assertTrue(np.all(pair.m1_aggregation.sum(axis=0) <= 1))
        self.assertTrue(np.all(pair.m2_aggregation.sum(axis=0) <= 1))

    def test_contraction_pair_single_block(self):
        with self.assertRaises(ContractionError):
            self.service.contraction_pair(BlockSpec((4,)))

    def test_contract_data_ones(self):
        spec = BlockSpec((3, 2))
        pair = self.service.contraction_pair(spec)
        u1, u2 = self.service.contract_data(spec, np.ones(10))
        for col in pair.m1_star_columns.values():
            self.assertEqual(u1[col], 2)
        for col in pair.m2_star_columns.values():
            self.assertEqual(u2[col], 3)

    def test_contract_data_star_sums(self):
        spec = BlockSpec((2, 2))
        u = np.random.default_rng(4).uniform(1, 2, 6)
        pair = self.service.contraction_pair(spec)
        u1, u2 = self.service.contract_data(spec, u)
        index = self.blockmodel_service.design_matrix(spec).column_index
        self.assertAlmostEqual(
            u1[pair.m1_star_columns[Vertex(1, 1)]],
            u[index[Dyad.of((1, 1), (2, 1))]] + u[index[Dyad.of((1, 1), (2, 2))]],
        )
        cross = sum(u[c] for d, c in index.items() if d.block_pair == (1, 2))
        self.assertAlmostEqual(sum(u1[c] for c in pair.m1_star_columns.values()), cross)
        self.assertAlmostEqual(sum(u2[c] for c in pair.m2_star_columns.values()), cross)

    def test_phi_inverse_ones(self):
        spec = BlockSpec((2, 2))
        p = self.service.phi_inverse(spec, np.ones(3), np.ones(3))
        index = self.blockmodel_service.design_matrix(spec).column_index
        for dyad, col in index.items():
            self.assertAlmostEqual(p[col], 0.5 if dyad.block_pair == (1, 2) else 1.0)

    def test_phi_inverse_non_generic(self):
        spec = BlockSpec((2, 2))
        pair = self.service.contraction_pair(spec)
        p2 = np.ones(3)
        p2[pair.m2_star_columns[2]] = -1.0
        with self.assertRaises(NonGenericInputError):
            self.service.phi_inverse(spec, np.ones(3), p2)

    def test_round_trip_on_toric_point(self):
        spec = BlockSpec((3, 2, 2))
        binomial_service = BinomialService()
        p = binomial_service.toric_point(spec, binomial_service.random_toric_params(spec, np.random.default_rng(8)))
        p1, p2 = self.service.phi(spec, p)
        self.assertTrue(np.all(p1 > 0) and np.all(p2 > 0))
        self.assertLessEqual(self.service.summation_gap(spec, p1, p2), 1e-12)
        np.testing.assert_allclose(self.service.phi_inverse(spec, p1, p2), p, rtol=1e-12)

    def test_verify_factorization_two_two(self):
        report = self.service.verify_factorization(BlockSpec((2, 2)))
        self.assertEqual((report.s_count, report.s1_count, report.s2_count), (1, 1, 1))
        self.assertTrue(report.passed(1e-8), report)

    def test_verify_factorization_three_two(self):
        report = self.service.verify_factorization(BlockSpec((3, 2)))
        self.assertEqual((report.s_count, report.s1_count, report.s2_count), (4, 4, 1))
        self.assertTrue(report.injective)
        self.assertTrue(report.surjective)
        self.assertLessEqual(report.membership_residual, 1e-8)
        self.assertLessEqual(report.forward_round_trip, 1e-8)
        self.assertLessEqual(report.backward_round_trip, 1e-8)
        self.assertTrue(report.passed(1e-8))

    @tag('slow')
    def test_verify_factorization_larger_models(self):
        for sizes, counts in [((3, 3), (16, 4, 4)), ((3, 2, 1), (4, 4, 1))]:
            report = self.service.verify_factorization(BlockSpec(sizes))
            self.assertEqual((report.s_count, report.s1_count, report.s2_count), counts)
            self.assertTrue(report.passed(1e-8), report)
