import logging
from dataclasses import replace
from fractions import Fraction
from typing import Protocol, Sequence

import numpy as np
from django.conf import settings
from numpy.polynomial import polynomial as P

from ..models import (
    Cluster,
    Endpoint,
    EndpointStatus,
    SolutionSet,
    SquareSystem,
    TotalDegreeStart,
    TrackerConfig,
)
from .job_service import JobService

logger = logging.getLogger(__name__)

# paths whose norm grew this much since t = 0.9 are heading to infinity
_GROWTH_FACTOR = 100.0
_NEAR_END = 0.9
# first Newton correction allowed, relative to the predictor displacement
_CORRECTION_RATIO = 0.1
_CORRECTOR_ITERATIONS = 3
# endpoints below this Jacobian condition are regular roots; two paths may not share one
_REGULAR_CONDITION = 1e8


class PolynomialMap(Protocol):
    def evaluate(self, y: np.ndarray) -> np.ndarray: ...

    def jacobian(self, y: np.ndarray) -> np.ndarray: ...


def _norm(y: np.ndarray) -> float:
    return float(np.abs(y).max(initial=0.0))


def relative_residual(system: SquareSystem, y: np.ndarray) -> float:
    return _norm(system.evaluate(y)) / (system.coefficient_scale * max(1.0, _norm(y)) ** 2)


def _to_exact(z: complex) -> tuple[Fraction, Fraction]:
    return Fraction(float(z.real)), Fraction(float(z.imag))


def _mul(a: tuple[Fraction, Fraction], b: tuple[Fraction, Fraction]) -> tuple[Fraction, Fraction]:
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def exact_evaluate(system: SquareSystem, y: np.ndarray) -> np.ndarray:
    """F(y) with every product and sum carried out exactly, rounded once at the end."""
    c = system.codim
    ys = [_to_exact(z) for z in y]
    products = [[_mul(ys[j], ys[k]) for k in range(c)] for j in range(c)]
    values = []
    for i in range(c):
        re, im = _to_exact(system.constant[i])
        for j in range(c):
            lre, lim = _mul(_to_exact(system.linear[i, j]), ys[j])
            re, im = re + lre, im + lim
            for k in range(c):
                q = system.quadratic[i, j, k]
                if q == 0:
                    continue
                qre, qim = _mul(_to_exact(q), products[j][k])
                re, im = re + qre, im + qim
        values.append(complex(float(re), float(im)))
    return np.array(values, dtype=complex)


class HomotopyService:
    def __init__(self, max_workers: int | None = None):
        self.max_workers = max_workers

    def default_config(self, seed: int) -> TrackerConfig:
        """Tracker settings from MLDEG['TRACKER'] with a seed-drawn unit gamma."""
        tracker = settings.MLDEG['TRACKER']
        rng = np.random.default_rng(seed)
        return TrackerConfig(
            initial_step=tracker['INITIAL_STEP'],
            min_step=tracker['MIN_STEP'],
            max_step=tracker['MAX_STEP'],
            corrector_tolerance=tracker['CORRECTOR_TOLERANCE'],
            max_corrector_iterations=tracker['MAX_CORRECTOR_ITERATIONS'],
            divergence_norm=tracker['DIVERGENCE_NORM'],
            max_steps=tracker['MAX_STEPS'],
            gamma=complex(np.exp(2j * np.pi * rng.uniform())),
            seed=seed,
        )

    def total_degree_start(self, square: SquareSystem) -> tuple[TotalDegreeStart, np.ndarray]:
        """
        Start system y_i^2 - 1 and its 2^c solutions
        :return: Start system and the sign vectors in {-1, +1}^c, one per row
        """
        start = TotalDegreeStart(square.codim)
        return start, start.solutions()

    def track_path(
        self,
        square: SquareSystem,
        start_point: np.ndarray,
        config: TrackerConfig,
        start_system: PolynomialMap | None = None,
    ) -> Endpoint:
        """
        Follow H(y, t) = (1 - t) gamma G(y) + t F(y) from t = 0 to t = 1
        :param start_point: Solution of the start system
        :return: Endpoint; failed paths are retried once with 10x smaller steps
        """
        start_system = start_system or TotalDegreeStart(square.codim)
        endpoint = self._track(square, start_system, np.asarray(start_point, dtype=complex), config)
        if endpoint.status is EndpointStatus.FAILED:
            endpoint = self.retrack_path(square, start_point, config, start_system)
        return endpoint

    def retrack_path(self, square: SquareSystem, start_point: np.ndarray, config: TrackerConfig,
                     start_system: PolynomialMap | None = None) -> Endpoint:
        start_system = start_system or TotalDegreeStart(square.codim)
        tight = replace(config, initial_step=config.initial_step / 10, min_step=config.min_step / 10,
                        max_step=config.max_step / 10)
        endpoint = self._track(square, start_system, np.asarray(start_point, dtype=complex), tight)
        return replace(endpoint, retried=True)

    def _track(self, square: SquareSystem, start_system: PolynomialMap,
               y: np.ndarray, config: TrackerConfig) -> Endpoint:
        gamma = config.gamma

        def h_value(y, t):
            return (1 - t) * gamma * start_system.evaluate(y) + t * square.evaluate(y)

        def h_y(y, t):
            return (1 - t) * gamma * start_system.jacobian(y) + t * square.jacobian(y)

        def h_t(y):
            return square.evaluate(y) - gamma * start_system.evaluate(y)

        def tangent(y, t):
            return np.linalg.solve(h_y(y, t), -h_t(y))

        def correct(y, t, displacement):
            previous = None
            for _ in range(min(config.max_corrector_iterations, _CORRECTOR_ITERATIONS)):
                delta = np.linalg.solve(h_y(y, t), -h_value(y, t))
                y = y + delta
                size = _norm(delta)
                if previous is None:
                    # a large first correction means the prediction left its path
                    if size > 0.1 * (1 + _norm(y)):
                        return None
                    if size > max(_CORRECTION_RATIO * displacement,
                                  config.corrector_tolerance * (1 + _norm(y))):
                        return None
                elif size > 0.5 * previous:
                    return None
                if size <= config.corrector_tolerance * (1 + _norm(y)):
                    return y
                previous = size
            return None

        t = 0.0
        h = config.initial_step
        streak = 0
        steps = 0
        norm_mark = None
        while t < 1.0:
            if steps >= config.max_steps:
                return self._endpoint(square, EndpointStatus.FAILED, y, steps)
            steps += 1
            t1 = min(t + h, 1.0)
            if 1.0 - t1 < config.min_step:
                t1 = 1.0
            dt = t1 - t
            try:
                k1 = tangent(y, t)
                k2 = tangent(y + dt / 2 * k1, t + dt / 2)
                k3 = tangent(y + dt / 2 * k2, t + dt / 2)
                k4 = tangent(y + dt * k3, t1)
                step = dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                y1 = correct(y + step, t1, _norm(step))
            except np.linalg.LinAlgError:
                y1 = None

            if y1 is not None and np.all(np.isfinite(y1)):
                t, y = t1, y1
                streak += 1
                if streak >= 3:
                    h = min(h * 1.5, config.max_step)
                    streak = 0
                norm = _norm(y)
                if norm_mark is None and t >= _NEAR_END:
                    norm_mark = max(1.0, norm)
                if norm > config.divergence_norm:
                    return self._endpoint(square, EndpointStatus.DIVERGED, y, steps)
                continue

            streak = 0
            h /= 2
            if h < config.min_step:
                growing = norm_mark is not None and _norm(y) > _GROWTH_FACTOR * norm_mark
                status = EndpointStatus.DIVERGED if growing else EndpointStatus.FAILED
                return self._endpoint(square, status, y, steps)

        y, refined = self.newton_refine(square, y, iterations=config.max_corrector_iterations)
        residual = relative_residual(square, y)
        converged = refined and residual <= config.corrector_tolerance
        status = EndpointStatus.CONVERGED if converged else EndpointStatus.FAILED
        return self._endpoint(square, status, y, steps, residual)

    def _endpoint(self, square: SquareSystem, status: EndpointStatus, y: np.ndarray,
                  steps: int, residual: float | None = None) -> Endpoint:
        try:
            condition = float(np.linalg.cond(square.jacobian(y)))
        except np.linalg.LinAlgError:
            condition = float('inf')
        if residual is None:
            residual = relative_residual(square, y) if np.all(np.isfinite(y)) else float('inf')
        return Endpoint(
            status=status,
            point=y if status is EndpointStatus.CONVERGED else None,
            residual=residual,
            steps=steps,
            condition=condition,
        )

    def newton_refine(
        self,
        system: SquareSystem,
        point: np.ndarray,
        iterations: int = 5,
        tolerance: float = 1e-13,
    ) -> tuple[np.ndarray, bool]:
        """
        Newton's method on F; switches to exactly evaluated residuals once the
        floating residual stops decreasing above tolerance
        :return: Refined point and False if the Jacobian was singular
        """
        y = np.asarray(point, dtype=complex)
        exact = False
        previous = relative_residual(system, y)
        for _ in range(iterations):
            if previous <= tolerance:
                break
            value = exact_evaluate(system, y) if exact else system.evaluate(y)
            try:
                delta = np.linalg.solve(system.jacobian(y), -value)
            except np.linalg.LinAlgError:
                return np.asarray(point, dtype=complex), False
            if not np.all(np.isfinite(delta)):
                return np.asarray(point, dtype=complex), False
            y = y + delta
            current = relative_residual(system, y)
            if not exact and current > 0.5 * previous:
                exact = True
            previous = current
        return y, True

    def solve(self, square: SquareSystem, config: TrackerConfig,
              max_workers: int | None = None, dedup_tolerance: float | None = None) -> SolutionSet:
        """
        Track every total-degree path and collect the distinct finite endpoints
        :return: Solution set; endpoints kept in start-point order
        """
        start_system, starts = self.total_degree_start(square)
        workers = max_workers or self.max_workers or settings.MLDEG['THREADS']
        chunks = [c for c in np.array_split(np.arange(len(starts)), max(1, workers * 4)) if len(c)]

        def track_chunk(indices: np.ndarray) -> list[Endpoint]:
            return [self.track_path(square, starts[i], config, start_system) for i in indices]

        with JobService(workers) as jobs:
            endpoints = [e for chunk in jobs.map(track_chunk, chunks) for e in chunk]

        tolerance = settings.MLDEG['DEDUP_TOLERANCE'] if dedup_tolerance is None else dedup_tolerance
        retracked = set()
        for path in self.colliding_paths(endpoints, tolerance):
            endpoints[path] = self.retrack_path(square, starts[path], config, start_system)
            retracked.add(path)
        for path in self.colliding_paths(endpoints, tolerance):
            logger.warning('path %d still lands on a regular root reached by another path', path)
            endpoints[path] = replace(endpoints[path], status=EndpointStatus.FAILED, point=None,
                                      retried=path in retracked)

        paths = [i for i, e in enumerate(endpoints) if e.status is EndpointStatus.CONVERGED]
        clusters = self.dedup([endpoints[i].point for i in paths], tolerance)
        for cluster in clusters:
            if cluster.multiplicity > 1:
                logger.warning('%d paths converged to one solution (paths %s)',
                               cluster.multiplicity, [paths[i] for i in cluster.members])
        solution_set = SolutionSet(
            points=tuple(c.representative for c in clusters),
            multiplicities=tuple(c.multiplicity for c in clusters),
            endpoints=tuple(endpoints),
            config=config,
        )
        logger.debug('tracked %d paths: %d distinct, %d diverged, %d failed',
                     solution_set.paths_tracked, solution_set.count,
                     solution_set.diverged, solution_set.failed)
        return solution_set

    def dedup(self, points: Sequence[np.ndarray], tolerance: float) -> list[Cluster]:
        """
        Single-linkage clustering under relative infinity-norm distance
        :return: Clusters in order of their first member
        """
        if not points:
            return []
        stacked = np.array(points)
        sizes = np.abs(stacked).max(axis=1)
        parent = list(range(len(points)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(len(points)):
            distance = np.abs(stacked[i + 1:] - stacked[i]).max(axis=1, initial=0.0)
            scale = np.maximum(1.0, np.maximum(sizes[i + 1:], sizes[i]))
            for j in np.nonzero(distance <= tolerance * scale)[0]:
                a, b = find(i), find(i + 1 + int(j))
                if a != b:
                    parent[max(a, b)] = min(a, b)

        members: dict[int, list[int]] = {}
        for i in range(len(points)):
            members.setdefault(find(i), []).append(i)
        return [Cluster(representative=stacked[root], members=tuple(group))
                for root, group in sorted(members.items())]

    def colliding_paths(self, endpoints: Sequence[Endpoint], tolerance: float) -> list[int]:
        """
        Paths that converged onto a well-conditioned root already reached by an
        earlier path; a regular root has exactly one path, so these jumped
        :return: Path indices, the first path of each cluster excluded
        """
        paths = [i for i, e in enumerate(endpoints) if e.status is EndpointStatus.CONVERGED]
        collisions = []
        for cluster in self.dedup([endpoints[i].point for i in paths], tolerance):
            members = [paths[i] for i in cluster.members]
            if len(members) > 1 and endpoints[members[0]].condition < _REGULAR_CONDITION:
                collisions.extend(members[1:])
        return collisions

    def solve_bivariate_quadratics(self, square: SquareSystem) -> np.ndarray:
        """
        Roots of two quadratics in (x, y) by eliminating x with the resultant
        and solving the quartic in y from its companion matrix
        :return: Array of shape (r, 2), r <= 4, polished by Newton
        """
        if square.codim != 2:
            raise ValueError('resultant elimination needs exactly two equations in two unknowns')
        q, b, c = square.quadratic, square.linear, square.constant
        # f_i = a2 x^2 + a1(y) x + a0(y), coefficients in y lowest degree first
        coeffs = [
            (np.array([q[i, 0, 0]]),
             np.array([b[i, 0], q[i, 0, 1] + q[i, 1, 0]]),
             np.array([c[i], b[i, 1], q[i, 1, 1]]))
            for i in range(2)
        ]
        (a2, a1, a0), (b2, b1, b0) = coeffs
        p_poly = P.polysub(P.polymul(a2, b0), P.polymul(b2, a0))
        r_poly = P.polysub(P.polymul(a2, b1), P.polymul(b2, a1))
        s_poly = P.polysub(P.polymul(a1, b0), P.polymul(a0, b1))
        resultant = P.polysub(P.polymul(p_poly, p_poly), P.polymul(r_poly, s_poly))
        resultant = np.trim_zeros(resultant, 'b')
        if len(resultant) < 2:
            return np.zeros((0, 2), dtype=complex)

        companion = np.diag(np.ones(len(resultant) - 2, dtype=complex), -1)
        companion[0] = -(resultant[:-1][::-1] / resultant[-1])
        roots = []
        for y in np.linalg.eigvals(companion):
            x = -P.polyval(y, p_poly) / P.polyval(y, r_poly)
            point, _ = self.newton_refine(square, np.array([x, y]), iterations=3)
            roots.append(point)
        return np.array(roots, dtype=complex).reshape(-1, 2)
