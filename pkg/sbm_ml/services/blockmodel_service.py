import logging
from itertools import combinations
from typing import Sequence

import numpy as np

from .. import linalg
from ..exceptions import BlockmodelError, InvalidPermutationError
from ..models import BlockSpec, DesignMatrix, Dyad, Graph, RankResult, SufficientStatistic, Vertex

logger = logging.getLogger(__name__)


class BlockmodelService:
    def enumerate_dyads(self, spec: BlockSpec) -> list[Dyad]:
        """
        All potential edges of the model in design-matrix column order
        :param spec: Block sizes
        :return: Dyads sorted lexicographically on ((i,v),(j,w))
        """
        return [Dyad(a, b) for a, b in combinations(spec.vertices(), 2)]

    def design_matrix(self, spec: BlockSpec) -> DesignMatrix:
        vertices = spec.vertices()
        pairs = spec.block_pairs()
        dyads = self.enumerate_dyads(spec)
        vertex_row = {v: r for r, v in enumerate(vertices)}
        pair_row = {pair: len(vertices) + r for r, pair in enumerate(pairs)}

        entries = np.zeros((len(vertices) + len(pairs), len(dyads)), dtype=np.int64)
        for col, dyad in enumerate(dyads):
            entries[vertex_row[dyad.first], col] = 1
            entries[vertex_row[dyad.second], col] = 1
            entries[pair_row[dyad.block_pair], col] = 1

        row_labels = tuple(f'beta{v}' for v in vertices) + tuple(f'alpha({i},{j})' for i, j in pairs)
        return DesignMatrix(spec=spec, entries=entries, row_labels=row_labels, columns=tuple(dyads))

    def indicator(self, graph: Graph, design: DesignMatrix | None = None) -> np.ndarray:
        design = design or self.design_matrix(graph.spec)
        x = np.zeros(len(design.columns), dtype=np.int64)
        for edge in graph.edges:
            x[design.column_index[edge]] = 1
        return x

    def sufficient_statistic(self, graph: Graph) -> SufficientStatistic:
        """
        Degree sequence followed by block-pair edge counts
        :param graph: Graph on the model's vertex set
        :return: t(G) = A x(G), vertices and block pairs in lexicographic order
        """
        design = self.design_matrix(graph.spec)
        t = design.entries @ self.indicator(graph, design)
        n = graph.spec.n
        return SufficientStatistic(
            spec=graph.spec,
            degrees=tuple(int(d) for d in t[:n]),
            block_counts=tuple(int(c) for c in t[n:]),
        )

    def rank_exact(self, design: DesignMatrix) -> RankResult:
        return linalg.independent_rows(design.entries)

    def row_dependencies(self, spec: BlockSpec) -> list[list[int]]:
        """
        One left-null vector of A per block i:
        sum_v beta_(i,v) - 2 alpha_(i,i) - sum_{j != i} alpha_(i,j)
        """
        design = self.design_matrix(spec)
        n = spec.n
        pair_row = {pair: n + r for r, pair in enumerate(spec.block_pairs())}
        dependencies = []
        for i in range(1, spec.k + 1):
            vector = [0] * design.shape[0]
            for r, v in enumerate(spec.vertices()):
                if v.block == i:
                    vector[r] = 1
            for (a, b), r in pair_row.items():
                if a == b == i:
                    vector[r] = -2
                elif i in (a, b):
                    vector[r] = -1
            if any(linalg.left_multiply(vector, design.entries.tolist())):
                raise BlockmodelError(f'row dependency for block {i} of {spec} does not annihilate A')
            dependencies.append(vector)
        return dependencies

    def permute_blocks(self, spec: BlockSpec, tau: Sequence[int]) -> BlockSpec:
        """
        Reorder blocks: block i of the result is block tau(i) of spec
        :param spec: Block sizes
        :param tau: 1-based images (tau(1), ..., tau(k))
        :return: M(n_tau(1), ..., n_tau(k))
        """
        tau = list(tau)
        if sorted(tau) != list(range(1, spec.k + 1)):
            raise InvalidPermutationError(f'{tau} is not a permutation of 1..{spec.k}')
        return BlockSpec(tuple(spec.sizes[t - 1] for t in tau))

    def descending_permutation(self, spec: BlockSpec) -> list[int]:
        return sorted(range(1, spec.k + 1), key=lambda i: -spec.sizes[i - 1])

    def block_relabeling(self, spec: BlockSpec, tau: Sequence[int]) -> list[int]:
        """
        Column map between a permuted model and the original
        :return: entry c is the column of spec matching column c of permute_blocks(spec, tau)
        """
        permuted = self.permute_blocks(spec, tau)
        original = self.design_matrix(spec).column_index
        relabeled = []
        for dyad in self.enumerate_dyads(permuted):
            a = Vertex(tau[dyad.first.block - 1], dyad.first.index)
            b = Vertex(tau[dyad.second.block - 1], dyad.second.index)
            relabeled.append(original[Dyad(a, b)])
        return relabeled

    def hypersimplex_matrix(self, n: int) -> np.ndarray:
        """Vertex-edge incidence matrix of K_n, columns in dyad order."""
        return self.design_matrix(BlockSpec((n,))).entries[:n].copy()

    def row_space_equal(self, a: np.ndarray, b: np.ndarray) -> bool:
        return linalg.row_space_equal(a.tolist(), b.tolist())
