import logging

import numpy as np

from .. import linalg
from ..exceptions import DataShapeError, TrivialChartError
from ..models import BlockSpec, GenericData, KernelChart, LikelihoodSystem, SquareSystem
from .binomial_service import BinomialService
from .blockmodel_service import BlockmodelService

logger = logging.getLogger(__name__)


class LikelihoodService:
    def __init__(
        self,
        blockmodel_service: BlockmodelService | None = None,
        binomial_service: BinomialService | None = None,
    ):
        self.blockmodel_service = blockmodel_service or BlockmodelService()
        self.binomial_service = binomial_service or BinomialService(self.blockmodel_service)

    def sample_generic_u(self, spec: BlockSpec, seed: int) -> GenericData:
        """
        Reproducible data point, coordinates uniform in [1, 2]
        :param spec: Block sizes
        :param seed: 64-bit seed
        """
        rng = np.random.default_rng(seed)
        num_dyads = len(self.blockmodel_service.enumerate_dyads(spec))
        return GenericData(u=rng.uniform(1.0, 2.0, num_dyads), seed=seed)

    def assemble(self, spec: BlockSpec, u: np.ndarray) -> LikelihoodSystem:
        design = self.blockmodel_service.design_matrix(spec)
        u = np.asarray(u)
        if u.shape != (len(design.columns),):
            raise DataShapeError(f'{spec} has {len(design.columns)} dyads, got data of shape {u.shape}')
        if np.iscomplexobj(u) or np.any(u <= 0):
            raise DataShapeError('data must be real and strictly positive')
        rank = self.blockmodel_service.rank_exact(design)
        binomials = self.binomial_service.enumerate_binomials(spec)
        logger.info('%s: %d variables, %d of %d linear rows independent, %d quadratics',
                    spec, len(design.columns), rank.rank, design.shape[0], len(binomials))
        return LikelihoodSystem(
            spec=spec,
            u=u,
            design=design,
            pivot_rows=rank.pivot_rows,
            binomials=tuple(binomials),
        )

    def kernel_chart(self, system: LikelihoodSystem) -> KernelChart:
        """
        Affine chart p = u + K y on the solutions of A(p - u) = 0
        :return: Chart with an exact rational kernel basis K of size |E| x c
        """
        kernel = linalg.kernel_basis(system.design.entries)
        num_dyads = system.num_variables
        basis = tuple(tuple(vector[row] for vector in kernel) for row in range(num_dyads))
        return KernelChart(particular=system.u, basis=basis if kernel else tuple(() for _ in range(num_dyads)))

    def square_up(
        self,
        system: LikelihoodSystem,
        chart: KernelChart,
        seed: int,
        combination: np.ndarray | None = None,
    ) -> SquareSystem:
        """
        Restrict every binomial to the chart and take c random combinations
        :param combination: Optional c x m matrix replacing the random one
        :return: Square system in the chart coordinates y
        """
        c = chart.codim
        if c == 0:
            raise TrivialChartError(f'{system.spec} has codimension 0; the only solution is p = u')

        k = chart.matrix
        u = chart.particular
        plus, minus = system.plus_columns, system.minus_columns
        m = len(system.binomials)

        # (u_a + K_a y)(u_b + K_b y) - (u_c + K_c y)(u_d + K_d y)
        quadratic = (
            np.einsum('mj,mk->mjk', k[plus[:, 0]], k[plus[:, 1]])
            - np.einsum('mj,mk->mjk', k[minus[:, 0]], k[minus[:, 1]])
        )
        linear = (
            u[plus[:, 0], None] * k[plus[:, 1]] + u[plus[:, 1], None] * k[plus[:, 0]]
            - u[minus[:, 0], None] * k[minus[:, 1]] - u[minus[:, 1], None] * k[minus[:, 0]]
        )
        constant = u[plus[:, 0]] * u[plus[:, 1]] - u[minus[:, 0]] * u[minus[:, 1]]

        if combination is None:
            rng = np.random.default_rng(seed)
            phases = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, (c, m)))
            combination = phases * rng.uniform(0.5, 1.5, (c, m))
        combination = np.asarray(combination, dtype=complex)

        return SquareSystem(
            quadratic=np.einsum('im,mjk->ijk', combination, quadratic.astype(complex)),
            linear=combination @ linear.astype(complex),
            constant=combination @ constant.astype(complex),
            combination=combination,
        )

    def full_residual(self, system: LikelihoodSystem, p: np.ndarray) -> float:
        """
        Largest violation of L(M) at p: linear rows relative to the data
        marginals, binomials relative to max |p_e|^2
        """
        p = np.asarray(p)
        if p.shape != (system.num_variables,):
            raise DataShapeError(f'expected {system.num_variables} coordinates, got {p.shape}')
        linear = np.abs(system.reduced_rows @ p - system.rhs)
        residual = float(linear.max(initial=0.0)) / max(1.0, float(np.abs(system.rhs).max(initial=0.0)))
        if system.binomials:
            plus, minus = system.plus_columns, system.minus_columns
            values = p[plus[:, 0]] * p[plus[:, 1]] - p[minus[:, 0]] * p[minus[:, 1]]
            scale = max(1.0, float(np.abs(p).max()) ** 2)
            residual = max(residual, float(np.abs(values).max()) / scale)
        return residual

    def export_system(self, system: LikelihoodSystem, chart: KernelChart) -> dict:
        return {
            'spec': list(system.spec.sizes),
            'variables': list(system.design.column_labels),
            'u': [float(x) for x in np.real(system.u)],
            'linear': [
                {
                    'row': system.design.row_labels[r],
                    'coefficients': [int(x) for x in system.design.entries[r]],
                    'rhs': float(np.real(rhs)),
                }
                for r, rhs in zip(system.pivot_rows, system.rhs)
            ],
            'quadratics': [
                {
                    'kind': b.kind.value,
                    'plus': list(b.plus_columns),
                    'minus': list(b.minus_columns),
                }
                for b in system.binomials
            ],
            'chart': [
                [[x.numerator, x.denominator] for x in row]
                for row in chart.basis
            ],
        }
