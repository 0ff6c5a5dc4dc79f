from itertools import permutations

from django.conf import settings
from django.test import override_settings, tag
from hypothesis import given, settings as hypothesis_settings, strategies as st
from hypothesis.extra.django import TestCase

from sbm_ml.exceptions import DeskScaleError
from sbm_ml.models import BlockSpec
from sbm_ml.services import BlockmodelService, MLDegreeService

specs = st.lists(st.integers(min_value=1, max_value=6), min_size=1, max_size=4).filter(
    lambda sizes: sum(sizes) >= 2 and sum(sizes) <= 12
).map(lambda sizes: BlockSpec(tuple(sizes)))


def ascents(permutation) -> int:
    return sum(1 for a, b in zip(permutation, permutation[1:]) if a < b)


class MLDegreeFormulaTest(TestCase):
    def setUp(self) -> None:
        self.service = MLDegreeService()

    def test_eulerian_success(self):
        self.assertEqual(self.service.eulerian(4, 1), 11)
        self.assertEqual(self.service.eulerian(5, 1), 26)
        for n in range(1, 10):
            self.assertEqual(self.service.eulerian(n, 0), 1)

    def test_eulerian_brute_force(self):
        for n in range(1, 9):
            counts = [0] * n
            for permutation in permutations(range(n)):
                counts[ascents(permutation)] += 1
            self.assertEqual([self.service.eulerian(n, k) for k in range(n)], counts)

    def test_eulerian_out_of_range(self):
        for n, k in [(3, 3), (3, -1), (0, 0)]:
            with self.assertRaises(ValueError):
                self.service.eulerian(n, k)

    def test_mldeg_formula_examples(self):
        cases = {
            (5, 3, 1, 6, 1, 2): 5928,
            (2,): 1,
            (2, 2, 1): 1,
            (4,): 4,
            (3, 3): 16,
            (3,): 1,
            (3, 2, 1): 4,
            (4, 2): 11,
        }
        for sizes, degree in cases.items():
            self.assertEqual(self.service.mldeg_formula(BlockSpec(sizes)), degree, sizes)

    def test_mldeg_formula_single_block(self):
        for n in range(3, 13):
            self.assertEqual(self.service.mldeg_formula(BlockSpec((n,))), 2 ** (n - 1) - n)
            self.assertEqual(self.service.mldeg_formula(BlockSpec((n,))), self.service.eulerian(n - 1, 1))

    def test_mldeg_formula_star_block(self):
        for n in range(2, 13):
            spec = BlockSpec((n, 1))
            self.assertEqual(self.service.mldeg_formula(spec), self.service.mldeg_formula(BlockSpec((n + 1,))))
            self.assertEqual(self.service.mldeg_formula(spec), self.service.eulerian(n, 1))

    def test_mldeg_formula_small_blocks(self):
        for sizes in [(1, 1), (2, 1, 2), (2, 2, 2, 2), (1, 2, 1, 2, 1)]:
            self.assertEqual(self.service.mldeg_formula(BlockSpec(sizes)), 1)

    @given(specs, st.randoms())
    @hypothesis_settings(max_examples=50, deadline=None)
    def test_mldeg_formula_permutation_invariant(self, spec, random):
        tau = list(range(1, spec.k + 1))
        random.shuffle(tau)
        permuted = BlockmodelService().permute_blocks(spec, tau)
        self.assertEqual(self.service.mldeg_formula(spec), self.service.mldeg_formula(permuted))

    @given(specs.filter(lambda spec: spec.k >= 2))
    @hypothesis_settings(max_examples=50, deadline=None)
    def test_mldeg_formula_factors(self, spec):
        contracted = BlockSpec(spec.sizes[:-1] + (1,))
        star = BlockSpec((spec.sizes[-1], 1))
        self.assertEqual(
            self.service.mldeg_formula(spec),
            self.service.mldeg_formula(contracted) * self.service.mldeg_formula(star),
        )

    @given(st.data())
    @hypothesis_settings(max_examples=200, deadline=None)
    def test_mldeg_formula_monotone(self, data):
        larger = data.draw(specs)
        j = data.draw(st.integers(min_value=1, max_value=larger.k))
        smaller = [data.draw(st.integers(min_value=1, max_value=n)) for n in larger.sizes[:j]]
        if sum(smaller) < 2:
            smaller[0] += 1
            if smaller[0] > larger.sizes[0]:
                return
        self.assertLessEqual(
            self.service.mldeg_formula(BlockSpec(tuple(smaller))),
            self.service.mldeg_formula(larger),
        )

    def test_codimension_and_gate(self):
        self.assertEqual(self.service.codimension(BlockSpec((3, 2))), 4)
        with self.assertRaises(DeskScaleError) as cm:
            self.service.check_gate(BlockSpec((5, 3, 1, 6, 1, 2)))
        self.assertGreater(cm.exception.codim, settings.MLDEG['MAX_CODIM'])
        self.assertEqual(self.service.check_gate(BlockSpec((4,)), max_codim=1, override=True), 2)


class MLDegreeNumericTest(TestCase):
    def setUp(self) -> None:
        self.service = MLDegreeService()

    def assert_count(self, sizes, expected):
        report = self.service.mldeg_numeric(BlockSpec(sizes))
        self.assertTrue(report.stable, report.per_seed_counts)
        self.assertEqual(report.numeric_count, expected, report.per_seed_counts)
        self.assertTrue(report.agreement)
        self.assertEqual(len(report.seeds), 3)

    def test_numeric_trivial_chart(self):
        for sizes in [(2,), (1, 1), (3,), (2, 1), (1, 1, 1)]:
            self.assert_count(sizes, 1)

    def test_numeric_single_block(self):
        self.assert_count((4,), 4)

    def test_numeric_two_blocks(self):
        self.assert_count((2, 2), 1)
        self.assert_count((3, 1), 4)
        self.assert_count((3, 2), 4)

    @tag('slow')
    def test_numeric_acceptance_suite(self):
        cases = {
            (5,): 11, (6,): 26, (4, 1): 11, (4, 2): 11, (3, 3): 16, (2, 1, 1): 1, (3, 2, 1): 4,
        }
        for sizes, expected in cases.items():
            self.assert_count(sizes, expected)

    @tag('slow')
    def test_numeric_transposed_blocks(self):
        a = self.service.mldeg_numeric(BlockSpec((3, 2)))
        b = self.service.mldeg_numeric(BlockSpec((2, 3)))
        self.assertEqual(a.numeric_count, b.numeric_count)

    def test_numeric_requires_enough_seeds(self):
        report = self.service.mldeg_numeric(BlockSpec((4,)), seeds=[1729])
        self.assertIsNone(report.numeric_count)
        self.assertEqual(report.per_seed_counts, (4,))

    def test_numeric_gated(self):
        with self.assertRaises(DeskScaleError):
            self.service.mldeg_numeric(BlockSpec((4, 4)), max_codim=3)

    def test_report_gated_spec(self):
        report = self.service.mldeg_report(BlockSpec((5, 3, 1, 6, 1, 2)))
        self.assertEqual(report.formula_value, 5928)
        self.assertIsNone(report.numeric_count)
        self.assertIsNone(report.agreement)
        self.assertTrue(report.gated)

    def test_report_success(self):
        report = self.service.mldeg_report(BlockSpec((3,)))
        self.assertEqual((report.formula_value, report.numeric_count), (1, 1))
        self.assertTrue(report.agreement)

    @override_settings(MLDEG={**settings.MLDEG, 'THREADS': 2})
    def test_numeric_threaded(self):
        report = self.service.mldeg_numeric(BlockSpec((4,)))
        self.assertEqual(report.numeric_count, 4)

    def test_zero_residual_tolerance_is_honoured(self):
        spec = BlockSpec((4,))
        likelihood_service = self.service.likelihood_service
        u = likelihood_service.sample_generic_u(spec, 21).u
        system = likelihood_service.assemble(spec, u)
        default = self.service.likelihood_solutions(spec, u, seed=21)
        self.assertEqual(default.count, 4)
        strict = self.service.likelihood_solutions(spec, u, seed=21, residual_tolerance=0.0)
        self.assertLessEqual(strict.count, default.count)
        for p in strict.points:
            self.assertEqual(likelihood_service.full_residual(system, p), 0.0)

    def test_solver_output_kept_per_seed(self):
        report = self.service.mldeg_numeric(BlockSpec((4,)))
        self.assertEqual([s.seed for s in report.solutions], list(report.seeds))
        self.assertEqual([s.count for s in report.solutions], list(report.per_seed_counts))

    @tag('slow')
    def test_no_two_paths_share_a_regular_root(self):
        for sizes, seeds in [((6,), (1729, 1730, 1731)), ((3, 3), (1729,))]:
            report = self.service.mldeg_numeric(BlockSpec(sizes), seeds=seeds)
            for solutions in report.solutions:
                self.assertEqual(set(solutions.multiplicities), {1}, (sizes, solutions.seed))
                self.assertEqual(solutions.count, self.service.mldeg_formula(BlockSpec(sizes)),
                                 (sizes, solutions.seed))
