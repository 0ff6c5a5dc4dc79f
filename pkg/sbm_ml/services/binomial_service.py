import logging
from collections import Counter
from itertools import combinations

import numpy as np

from ..exceptions import InapplicableMoveError
from ..models import BlockSpec, DesignMatrix, Dyad, Graph, MoveKind, QuadBinomial, ToricParams
from .blockmodel_service import BlockmodelService

logger = logging.getLogger(__name__)

# sorted block multiplicities of the four vertices -> move family
_KIND_BY_PATTERN = {
    (4,): MoveKind.WITHIN_BLOCK,
    (3, 1): MoveKind.THREE_ONE,
    (2, 2): MoveKind.TWO_TWO,
    (2, 1, 1): MoveKind.TWO_ONE_ONE,
}


class BinomialService:
    def __init__(self, blockmodel_service: BlockmodelService | None = None):
        self.blockmodel_service = blockmodel_service or BlockmodelService()

    def enumerate_binomials(self, spec: BlockSpec) -> list[QuadBinomial]:
        """
        Every quadratic binomial of the toric ideal: for each set of four
        vertices, each pair of its perfect matchings whose block pairs agree
        :param spec: Block sizes
        :return: Canonical binomials sorted by (plus, minus)
        """
        design = self.blockmodel_service.design_matrix(spec)
        found: dict[tuple, QuadBinomial] = {}
        for a, b, c, d in combinations(spec.vertices(), 4):
            matchings = [
                (Dyad(a, b), Dyad(c, d)),
                (Dyad(a, c), Dyad(b, d)),
                (Dyad(a, d), Dyad(b, c)),
            ]
            kind = _KIND_BY_PATTERN.get(
                tuple(sorted(Counter(v.block for v in (a, b, c, d)).values(), reverse=True))
            )
            if kind is None:
                continue
            for left, right in combinations(matchings, 2):
                if sorted(x.block_pair for x in left) != sorted(x.block_pair for x in right):
                    continue
                binomial = self.canonical(left, right, kind, design)
                found.setdefault((binomial.plus, binomial.minus), binomial)
        binomials = sorted(found.values())
        logger.debug('%s: %d quadratic binomials', spec, len(binomials))
        return binomials

    def canonical(self, left: tuple[Dyad, Dyad], right: tuple[Dyad, Dyad],
                  kind: MoveKind, design: DesignMatrix) -> QuadBinomial:
        left = tuple(sorted(left))
        right = tuple(sorted(right))
        plus, minus = (left, right) if left < right else (right, left)
        index = design.column_index
        return QuadBinomial(
            plus=plus,
            minus=minus,
            kind=kind,
            plus_columns=(index[plus[0]], index[plus[1]]),
            minus_columns=(index[minus[0]], index[minus[1]]),
        )

    def evaluate_binomial(self, binomial: QuadBinomial, p: np.ndarray) -> complex:
        (a, b), (c, d) = binomial.plus_columns, binomial.minus_columns
        return p[a] * p[b] - p[c] * p[d]

    def exponent_vector(self, binomial: QuadBinomial, num_dyads: int) -> np.ndarray:
        e = np.zeros(num_dyads, dtype=np.int64)
        for col in binomial.plus_columns:
            e[col] += 1
        for col in binomial.minus_columns:
            e[col] -= 1
        return e

    def in_kernel(self, design: DesignMatrix, binomial: QuadBinomial) -> bool:
        return not np.any(design.entries @ self.exponent_vector(binomial, len(design.columns)))

    def toric_point(self, spec: BlockSpec, theta: ToricParams) -> np.ndarray:
        """
        Monomial parameterization p_(i,v)(j,w) = beta'_(i,v) beta'_(j,w) alpha'_(i,j)
        :param theta: beta' in vertex order, alpha' in block-pair order
        :return: Vector indexed by dyads
        """
        design = self.blockmodel_service.design_matrix(spec)
        params = np.concatenate([np.asarray(theta.beta), np.asarray(theta.alpha)])
        return np.prod(np.where(design.entries == 1, params[:, None], 1.0), axis=0)

    def random_toric_params(self, spec: BlockSpec, rng: np.random.Generator,
                            low: float = 0.5, high: float = 2.0) -> ToricParams:
        return ToricParams(
            beta=rng.uniform(low, high, spec.n),
            alpha=rng.uniform(low, high, len(spec.block_pairs())),
        )

    def toric_params_from_log_odds(self, beta: np.ndarray, alpha: np.ndarray) -> ToricParams:
        """logit p = beta_(i,v) + beta_(j,w) + alpha_(i,j) gives odds = beta' beta' alpha'."""
        return ToricParams(beta=np.exp(np.asarray(beta, dtype=float)), alpha=np.exp(np.asarray(alpha, dtype=float)))

    def edge_probabilities(self, spec: BlockSpec, theta: ToricParams) -> np.ndarray:
        odds = self.toric_point(spec, theta)
        return odds / (1.0 + odds)

    def apply_move(self, graph: Graph, binomial: QuadBinomial) -> Graph:
        """
        Swap the minus-side edges for the plus-side edges
        :return: Graph with the same sufficient statistic
        """
        if not set(binomial.minus) <= graph.edges or set(binomial.plus) & graph.edges:
            raise InapplicableMoveError(
                f'move {binomial.kind.value} needs edges {[str(d) for d in binomial.minus]} '
                f'present and {[str(d) for d in binomial.plus]} absent'
            )
        return Graph(spec=graph.spec, edges=(graph.edges - set(binomial.minus)) | set(binomial.plus))
