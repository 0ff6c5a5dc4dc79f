import logging
from itertools import product
from typing import Sequence

import numpy as np
from django.conf import settings

from ..exceptions import ContractionError, NonGenericInputError
from ..models import BlockSpec, ContractionPair, Dyad, FactorizationReport, LikelihoodSolutions, TrackerConfig, Vertex
from .job_service import JobService
from .mldeg_service import MLDegreeService

logger = logging.getLogger(__name__)


def relative_distance(a: np.ndarray, b: np.ndarray) -> float:
    size = max(1.0, float(np.abs(a).max(initial=0.0)), float(np.abs(b).max(initial=0.0)))
    return float(np.abs(np.asarray(a) - np.asarray(b)).max(initial=0.0)) / size


class FactorizationService:
    def __init__(self, mldeg_service: MLDegreeService | None = None):
        self.mldeg_service = mldeg_service or MLDegreeService()
        self.likelihood_service = self.mldeg_service.likelihood_service
        self.blockmodel_service = self.mldeg_service.blockmodel_service

    def contraction_pair(self, spec: BlockSpec) -> ContractionPair:
        """
        M1 contracts the last block to a star vertex (k, 1); M2 contracts all
        other blocks to a star vertex (1, 1) and renumbers block k as block 2
        """
        if spec.k < 2:
            raise ContractionError(f'{spec} has a single block; contraction needs k >= 2')
        k, n_k = spec.k, spec.sizes[-1]
        index = self.blockmodel_service.design_matrix(spec).column_index
        m1_spec = BlockSpec(spec.sizes[:-1] + (1,))
        m2_spec = BlockSpec((1, n_k))
        last_block = [Vertex(k, w) for w in range(1, n_k + 1)]
        others = [v for v in spec.vertices() if v.block < k]

        m1_sources, m1_star_columns = [], {}
        for col, dyad in enumerate(self.blockmodel_service.enumerate_dyads(m1_spec)):
            if dyad.second.block == k:
                m1_sources.append(tuple(index[Dyad(dyad.first, w)] for w in last_block))
                m1_star_columns[dyad.first] = col
            else:
                m1_sources.append((index[dyad],))

        m2_sources, m2_star_columns = [], {}
        for col, dyad in enumerate(self.blockmodel_service.enumerate_dyads(m2_spec)):
            if dyad.first.block == 1:
                w = dyad.second.index
                m2_sources.append(tuple(index[Dyad(v, Vertex(k, w))] for v in others))
                m2_star_columns[w] = col
            else:
                m2_sources.append((index[Dyad(Vertex(k, dyad.first.index), Vertex(k, dyad.second.index))],))

        return ContractionPair(
            spec=spec,
            m1_spec=m1_spec,
            m2_spec=m2_spec,
            m1_sources=tuple(m1_sources),
            m2_sources=tuple(m2_sources),
            m1_star_columns=m1_star_columns,
            m2_star_columns=m2_star_columns,
            num_dyads=len(index),
        )

    def contract_data(self, spec: BlockSpec, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pair = self.contraction_pair(spec)
        u = np.asarray(u)
        return pair.m1_aggregation @ u, pair.m2_aggregation @ u

    def phi(self, spec: BlockSpec, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Image of a solution of L(M) in the solution spaces of L(M1) and L(M2)."""
        return self.contract_data(spec, p)

    def phi_inverse(self, spec: BlockSpec, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
        """
        Rebuild p from a pair of contracted solutions; each star coordinate of p1
        is split across block k in the proportions of the star coordinates of p2
        :raises NonGenericInputError: star coordinates of p2 sum to zero
        """
        pair = self.contraction_pair(spec)
        p1, p2 = np.asarray(p1), np.asarray(p2)
        p = np.zeros(pair.num_dyads, dtype=np.result_type(p1, p2, complex))

        for col, sources in enumerate(pair.m1_sources):
            if len(sources) == 1 and col not in pair.m1_star_columns.values():
                p[sources[0]] = p1[col]
        for col, sources in enumerate(pair.m2_sources):
            if col not in pair.m2_star_columns.values():
                p[sources[0]] = p2[col]

        stars = np.array([p2[c] for _, c in sorted(pair.m2_star_columns.items())])
        total = stars.sum()
        if abs(total) <= 1e-14 * max(1.0, float(np.abs(stars).max())):
            raise NonGenericInputError(f'{spec}: star coordinates of the second contraction sum to zero')

        index = self.blockmodel_service.design_matrix(spec).column_index
        k = spec.k
        for vertex, col in pair.m1_star_columns.items():
            for w, share in enumerate(stars, start=1):
                p[index[Dyad(vertex, Vertex(k, w))]] = p1[col] * share / total
        return p

    def summation_gap(self, spec: BlockSpec, p1: np.ndarray, p2: np.ndarray) -> float:
        pair = self.contraction_pair(spec)
        left = sum(p1[c] for c in pair.m1_star_columns.values())
        right = sum(p2[c] for c in pair.m2_star_columns.values())
        return abs(left - right) / max(1.0, abs(left), abs(right))

    def _nearest(self, point: np.ndarray, candidates: Sequence[np.ndarray], tolerance: float) -> tuple[int, bool]:
        """
        :return: Index of the unique candidate within tolerance (-1 if none) and
            whether more than one candidate was within tolerance
        """
        close = [i for i, c in enumerate(candidates) if relative_distance(point, c) <= tolerance]
        if len(close) == 1:
            return close[0], False
        return -1, len(close) > 1

    def verify_factorization(
        self,
        spec: BlockSpec,
        seeds: Sequence[int] | None = None,
        config: TrackerConfig | None = None,
        max_codim: int | None = None,
        override_gate: bool = False,
        max_workers: int | None = None,
    ) -> FactorizationReport:
        """
        Solve L(M), L(M1), L(M2) from one data vector and check that phi is a
        bijection between the solution set and the product of the contracted ones
        :return: First conclusive report over the seeds, or the last inconclusive one
        """
        seeds = list(seeds) if seeds is not None else [settings.MLDEG['DEFAULT_SEED']]
        self.mldeg_service.check_gate(spec, max_codim, override_gate)
        report = None
        for seed in seeds:
            report = self._verify_seed(spec, seed, config, max_workers)
            if not report.inconclusive:
                return report
            logger.warning('%s seed %d: factorization check inconclusive (%s)', spec, seed, '; '.join(report.notes))
        return report

    def _verify_seed(self, spec: BlockSpec, seed: int, config: TrackerConfig | None,
                     max_workers: int | None) -> FactorizationReport:
        tolerance = settings.MLDEG['DEDUP_TOLERANCE']
        pair = self.contraction_pair(spec)
        u = self.likelihood_service.sample_generic_u(spec, seed).u
        u1, u2 = self.contract_data(spec, u)
        workers = max_workers or settings.MLDEG['THREADS']

        def solve(job: tuple[BlockSpec, np.ndarray]) -> LikelihoodSolutions:
            model, data = job
            return self.mldeg_service.likelihood_solutions(model, data, seed, config, workers)

        with JobService(min(3, workers)) as jobs:
            s, s1, s2 = jobs.map(solve, [(spec, u), (pair.m1_spec, u1), (pair.m2_spec, u2)])

        notes = []
        inconclusive = bool(s.failed or s1.failed or s2.failed)
        if inconclusive:
            notes.append(f'failed paths: {s.failed}/{s1.failed}/{s2.failed}')

        system1 = self.likelihood_service.assemble(pair.m1_spec, u1)
        system2 = self.likelihood_service.assemble(pair.m2_spec, u2)
        membership = 0.0
        forward = 0.0
        matches = []
        for p in s.points:
            p1, p2 = self.phi(spec, p)
            membership = max(membership,
                             self.likelihood_service.full_residual(system1, p1),
                             self.likelihood_service.full_residual(system2, p2))
            i1, tie1 = self._nearest(p1, s1.points, tolerance)
            i2, tie2 = self._nearest(p2, s2.points, tolerance)
            if tie1 or tie2:
                logger.warning('%s: ambiguous match for the image of a solution', spec)
                notes.append('ambiguous nearest-neighbour match')
            matches.append((i1, i2))
            try:
                forward = max(forward, relative_distance(self.phi_inverse(spec, p1, p2), p))
            except NonGenericInputError as exc:
                notes.append(str(exc))
                inconclusive = True

        backward = 0.0
        gap = 0.0
        for q1, q2 in product(s1.points, s2.points):
            gap = max(gap, self.summation_gap(spec, q1, q2))
            try:
                r1, r2 = self.phi(spec, self.phi_inverse(spec, q1, q2))
            except NonGenericInputError as exc:
                notes.append(str(exc))
                inconclusive = True
                continue
            backward = max(backward, relative_distance(r1, q1), relative_distance(r2, q2))

        valid = [m for m in matches if -1 not in m]
        injective = len(valid) == len(matches) and len(set(valid)) == len(valid)
        surjective = set(valid) == set(product(range(s1.count), range(s2.count)))
        report = FactorizationReport(
            spec=spec,
            seed=seed,
            s_count=s.count,
            s1_count=s1.count,
            s2_count=s2.count,
            matches=tuple(matches),
            membership_residual=membership,
            forward_round_trip=forward,
            backward_round_trip=backward,
            summation_gap=gap,
            injective=injective,
            surjective=surjective,
            inconclusive=inconclusive,
            notes=tuple(notes),
        )
        logger.info('%s seed %d: |S| = %d, |S1| = %d, |S2| = %d', spec, seed, s.count, s1.count, s2.count)
        return report
