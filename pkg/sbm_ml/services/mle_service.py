import logging
from typing import Iterable

import numpy as np
from django.conf import settings

from ..exceptions import DataShapeError, FitConvergenceError
from ..models import BlockSpec, LikelihoodSolutions, MLEFit
from .blockmodel_service import BlockmodelService

logger = logging.getLogger(__name__)

# accept a stalled line search once the gradient is this small (relative)
_STAGNATION_TOLERANCE = 1e-10


class MLEService:
    def __init__(self, blockmodel_service: BlockmodelService | None = None):
        self.blockmodel_service = blockmodel_service or BlockmodelService()

    def fit(
        self,
        spec: BlockSpec,
        u: np.ndarray,
        gradient_tolerance: float | None = None,
        max_iterations: int | None = None,
        initial_theta: np.ndarray | None = None,
    ) -> MLEFit:
        """
        Minimize F(theta) = sum_e exp(a_e . theta) - (A u) . theta over the
        pivot rows of A by damped Newton
        :param u: Strictly positive data indexed by dyads
        :param initial_theta: Starting point, zero by default
        :return: Fit with p_hat = exp(A_red^T theta)
        :raises FitConvergenceError: gradient still above tolerance when the iterations run out
        """
        options = settings.MLDEG['MLE']
        gradient_tolerance = options['GRADIENT_TOLERANCE'] if gradient_tolerance is None else gradient_tolerance
        max_iterations = options['MAX_ITERATIONS'] if max_iterations is None else max_iterations

        design = self.blockmodel_service.design_matrix(spec)
        u = np.asarray(u, dtype=float)
        if u.shape != (len(design.columns),):
            raise DataShapeError(f'{spec} has {len(design.columns)} dyads, got data of shape {u.shape}')
        if np.any(u <= 0):
            raise DataShapeError('data must be strictly positive')

        rows = self.blockmodel_service.rank_exact(design).pivot_rows
        reduced = design.entries[list(rows)].astype(float)
        target = reduced @ u
        scale = max(1.0, float(np.abs(target).max()))

        def objective(theta):
            with np.errstate(over='ignore'):
                return float(np.exp(reduced.T @ theta).sum() - target @ theta)

        theta = np.zeros(len(rows)) if initial_theta is None else np.asarray(initial_theta, dtype=float)
        value = objective(theta)
        iterations = 0
        converged = False
        while iterations < max_iterations:
            p = np.exp(reduced.T @ theta)
            gradient = reduced @ p - target
            grad_norm = float(np.abs(gradient).max())
            if grad_norm <= gradient_tolerance * scale:
                converged = True
                break
            iterations += 1
            try:
                step = np.linalg.solve((reduced * p) @ reduced.T, -gradient)
            except np.linalg.LinAlgError:
                break
            slope = float(gradient @ step)
            t = 1.0
            while t >= 1e-12:
                candidate = theta + t * step
                new_value = objective(candidate)
                if new_value <= value + 1e-4 * t * slope:
                    break
                if t == 1.0:
                    new_gradient = reduced @ np.exp(reduced.T @ candidate) - target
                    if np.abs(new_gradient).max() < grad_norm:
                        break
                t /= 2
            else:
                logger.debug('%s: line search stalled at iteration %d', spec, iterations)
                break
            theta, value = candidate, new_value

        p_hat = np.exp(reduced.T @ theta)
        grad_norm = float(np.abs(reduced @ p_hat - target).max())
        if not converged and grad_norm > _STAGNATION_TOLERANCE * scale:
            raise FitConvergenceError(f'MLE for {spec} did not converge', iterations, grad_norm)
        if not converged:
            logger.warning('%s: MLE accepted at gradient %.2e, above the tolerance %.2e', spec, grad_norm,
                           gradient_tolerance * scale)

        marginals = design.entries @ u
        marginal_residual = float(np.abs(design.entries @ p_hat - marginals).max()) / max(
            1.0, float(np.abs(marginals).max()))
        logger.info('%s: MLE after %d Newton steps, gradient %.2e', spec, iterations, grad_norm)
        return MLEFit(
            spec=spec,
            theta=theta,
            theta_rows=tuple(design.row_labels[r] for r in rows),
            p_hat=p_hat,
            grad_norm=grad_norm,
            iterations=iterations,
            marginal_residual=marginal_residual,
            converged=converged,
        )

    def reconcile(self, solutions: LikelihoodSolutions | Iterable[np.ndarray], fit: MLEFit,
                  tolerance: float = 1e-8) -> bool:
        """
        Whether the MLE is one of the complex solutions, and that solution is real and positive
        """
        points = solutions.points if isinstance(solutions, LikelihoodSolutions) else solutions
        for point in points:
            point = np.asarray(point)
            size = max(1.0, float(np.abs(point).max()), float(np.abs(fit.p_hat).max()))
            if np.abs(point - fit.p_hat).max() > tolerance * size:
                continue
            real = np.abs(np.imag(point)).max(initial=0.0) <= tolerance * size
            return bool(real and np.all(np.real(point) > 0))
        return False
