import logging
from typing import Sequence

import numpy as np
from django.conf import settings

from ..exceptions import DeskScaleError
from ..models import BlockSpec, LikelihoodSolutions, MLDegreeReport, TrackerConfig
from .blockmodel_service import BlockmodelService
from .homotopy_service import HomotopyService
from .job_service import JobService
from .likelihood_service import LikelihoodService

logger = logging.getLogger(__name__)


def _derived_seeds(seed: int, count: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


class MLDegreeService:
    def __init__(
        self,
        likelihood_service: LikelihoodService | None = None,
        homotopy_service: HomotopyService | None = None,
    ):
        self.likelihood_service = likelihood_service or LikelihoodService()
        self.blockmodel_service: BlockmodelService = self.likelihood_service.blockmodel_service
        self.homotopy_service = homotopy_service or HomotopyService()

    def eulerian(self, n: int, k: int) -> int:
        """
        Number of permutations of 1..n with exactly k ascents
        :return: A(n, k) from A(n, k) = (k + 1) A(n-1, k) + (n - k) A(n-1, k-1)
        """
        if n < 1 or not 0 <= k < n:
            raise ValueError(f'eulerian number needs n >= 1 and 0 <= k < n, got n={n}, k={k}')
        row = [1]
        for m in range(2, n + 1):
            row = [
                (j + 1) * (row[j] if j < len(row) else 0) + (m - j) * (row[j - 1] if j > 0 else 0)
                for j in range(m)
            ]
        return row[k]

    def mldeg_formula(self, spec: BlockSpec) -> int:
        if spec.k == 1:
            n = spec.n
            return 1 if n == 2 else 2 ** (n - 1) - n
        degree = 1
        for size in spec.sizes:
            if size > 2:
                degree *= 2 ** size - size - 1
        return degree

    def codimension(self, spec: BlockSpec) -> int:
        design = self.blockmodel_service.design_matrix(spec)
        return len(design.columns) - self.blockmodel_service.rank_exact(design).rank

    def check_gate(self, spec: BlockSpec, max_codim: int | None = None, override: bool = False) -> int:
        """
        :return: Codimension of the likelihood chart
        :raises DeskScaleError: more than 2^max_codim paths and no override
        """
        max_codim = settings.MLDEG['MAX_CODIM'] if max_codim is None else max_codim
        codim = self.codimension(spec)
        if codim > max_codim and not override:
            raise DeskScaleError(codim, max_codim)
        return codim

    def likelihood_solutions(
        self,
        spec: BlockSpec,
        u: np.ndarray,
        seed: int,
        config: TrackerConfig | None = None,
        max_workers: int | None = None,
        residual_tolerance: float | None = None,
    ) -> LikelihoodSolutions:
        """
        Complex solutions of the likelihood equations for the data u
        :param seed: Drives gamma and the squaring-up combination
        :return: Solutions in p-coordinates, filtered by full residual and deduplicated
        """
        if residual_tolerance is None:
            residual_tolerance = settings.MLDEG['RESIDUAL_TOLERANCE']
        dedup_tolerance = settings.MLDEG['DEDUP_TOLERANCE']
        system = self.likelihood_service.assemble(spec, u)
        chart = self.likelihood_service.kernel_chart(system)
        if chart.codim == 0:
            return LikelihoodSolutions(spec=spec, u=system.u, seed=seed,
                                       points=(np.asarray(system.u, dtype=complex),), multiplicities=(1,))

        gamma_seed, combination_seed = _derived_seeds(seed, 2)
        square = self.likelihood_service.square_up(system, chart, combination_seed)
        config = config or self.homotopy_service.default_config(gamma_seed)
        solution_set = self.homotopy_service.solve(square, config, max_workers=max_workers)

        points, weights = [], []
        for y, multiplicity in zip(solution_set.points, solution_set.multiplicities):
            p = chart.point(y)
            residual = self.likelihood_service.full_residual(system, p)
            if residual <= residual_tolerance:
                points.append(p)
                weights.append(multiplicity)
            else:
                logger.debug('%s: dropped extraneous endpoint, residual %.2e', spec, residual)

        clusters = self.homotopy_service.dedup(points, dedup_tolerance)
        logger.info('%s seed %d: %d of %d endpoints solve the likelihood equations',
                    spec, seed, len(clusters), solution_set.count)
        return LikelihoodSolutions(
            spec=spec,
            u=system.u,
            seed=seed,
            points=tuple(c.representative for c in clusters),
            multiplicities=tuple(sum(weights[i] for i in c.members) for c in clusters),
            solution_set=solution_set,
        )

    def _solutions_for_seed(self, spec: BlockSpec, seed: int, config: TrackerConfig | None,
                            max_workers: int | None, residual_tolerance: float | None) -> LikelihoodSolutions:
        u = self.likelihood_service.sample_generic_u(spec, seed).u
        solutions = self.likelihood_solutions(spec, u, seed, config, max_workers, residual_tolerance)
        if solutions.failed:
            retry_seed = _derived_seeds(seed, 3)[2]
            logger.warning('%s seed %d: %d paths failed, reseeding with %d',
                           spec, seed, solutions.failed, retry_seed)
            u = self.likelihood_service.sample_generic_u(spec, retry_seed).u
            retry = self.likelihood_solutions(spec, u, retry_seed, config, max_workers, residual_tolerance)
            solutions = LikelihoodSolutions(
                spec=spec, u=retry.u, seed=retry.seed, points=retry.points,
                multiplicities=retry.multiplicities, solution_set=retry.solution_set, reseeded=True,
            )
        return solutions

    def mldeg_numeric(
        self,
        spec: BlockSpec,
        seeds: Sequence[int] | None = None,
        config: TrackerConfig | None = None,
        max_codim: int | None = None,
        override_gate: bool = False,
        max_workers: int | None = None,
        residual_tolerance: float | None = None,
    ) -> MLDegreeReport:
        """
        Count complex solutions of the likelihood equations for one generic u per seed
        :return: Report whose count is set only when enough seeds agree
        """
        if seeds is None:
            first = settings.MLDEG['DEFAULT_SEED']
            seeds = [first + i for i in range(settings.MLDEG['TRIALS'])]
        seeds = list(seeds)
        self.check_gate(spec, max_codim, override_gate)
        workers = max_workers or settings.MLDEG['THREADS']

        def run(seed: int) -> LikelihoodSolutions:
            return self._solutions_for_seed(spec, seed, config, workers, residual_tolerance)

        with JobService(min(workers, len(seeds))) as jobs:
            results = jobs.map(run, seeds)

        counts = tuple(r.count for r in results)
        for seed, count in zip(seeds, counts):
            logger.debug('%s seed %d: %d solutions', spec, seed, count)
        stable = len(set(counts)) <= 1
        if not stable:
            logger.warning('%s: solution counts disagree across seeds %s: %s', spec, seeds, counts)
        enough = len(seeds) >= settings.MLDEG['MIN_AGREEING_SEEDS']
        return MLDegreeReport(
            spec=spec,
            formula_value=self.mldeg_formula(spec),
            numeric_count=counts[0] if stable and enough and counts else None,
            paths_tracked=sum(r.paths_tracked for r in results),
            diverged=sum(r.diverged for r in results),
            failed=sum(r.failed for r in results),
            seeds=tuple(r.seed for r in results),
            per_seed_counts=counts,
            stable=stable,
            solutions=tuple(results),
        )

    def mldeg_report(self, spec: BlockSpec, seeds: Sequence[int] | None = None,
                     config: TrackerConfig | None = None, **kwargs) -> MLDegreeReport:
        """Formula value alongside the numeric count; a gated spec reports no count."""
        try:
            return self.mldeg_numeric(spec, seeds, config, **kwargs)
        except DeskScaleError as exc:
            logger.info('%s: %s', spec, exc)
            return MLDegreeReport(spec=spec, formula_value=self.mldeg_formula(spec), gated=True)
