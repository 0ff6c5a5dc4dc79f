from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from itertools import product
from threading import Event
from uuid import UUID

import numpy as np

from .exceptions import InvalidGraphError, InvalidSpecError


@dataclass(frozen=True, order=True)
class Vertex:
    block: int
    index: int

    def __str__(self):
        return f'({self.block},{self.index})'

    def as_list(self) -> list[int]:
        return [self.block, self.index]


@dataclass(frozen=True, order=True)
class Dyad:
    """Unordered pair of distinct vertices, stored smaller endpoint first."""
    first: Vertex
    second: Vertex

    def __post_init__(self):
        if self.first == self.second:
            raise InvalidGraphError(f'dyad endpoints must be distinct, got {self.first} twice')
        if self.second < self.first:
            first, second = self.second, self.first
            object.__setattr__(self, 'first', first)
            object.__setattr__(self, 'second', second)

    @classmethod
    def of(cls, a: tuple[int, int], b: tuple[int, int]) -> "Dyad":
        return cls(Vertex(*a), Vertex(*b))

    @property
    def block_pair(self) -> tuple[int, int]:
        return self.first.block, self.second.block

    @property
    def endpoints(self) -> tuple[Vertex, Vertex]:
        return self.first, self.second

    def __str__(self):
        return f'p{self.first}{self.second}'

    def as_list(self) -> list[list[int]]:
        return [self.first.as_list(), self.second.as_list()]


@dataclass(frozen=True)
class BlockSpec:
    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(self.sizes)
        if not sizes:
            raise InvalidSpecError('a block spec needs at least one block')
        for size in sizes:
            if isinstance(size, bool) or not isinstance(size, (int, np.integer)) or size < 1:
                raise InvalidSpecError(f'block sizes must be positive integers, got {size!r}')
        if sum(sizes) < 2:
            raise InvalidSpecError('a model needs at least two vertices')
        object.__setattr__(self, 'sizes', tuple(int(s) for s in sizes))

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    def vertices(self) -> list[Vertex]:
        return [Vertex(i, v) for i, size in enumerate(self.sizes, start=1) for v in range(1, size + 1)]

    def block_pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(1, self.k + 1) for j in range(i, self.k + 1)]

    def contains(self, vertex: Vertex) -> bool:
        return 1 <= vertex.block <= self.k and 1 <= vertex.index <= self.sizes[vertex.block - 1]

    def __str__(self):
        return 'M(' + ','.join(str(s) for s in self.sizes) + ')'


@dataclass(frozen=True)
class Graph:
    spec: BlockSpec
    edges: frozenset[Dyad] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'edges', frozenset(self.edges))
        for edge in self.edges:
            for vertex in edge.endpoints:
                if not self.spec.contains(vertex):
                    raise InvalidGraphError(f'edge {edge} uses vertex {vertex} outside {self.spec}')


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    spec: BlockSpec
    entries: np.ndarray
    row_labels: tuple[str, ...]
    columns: tuple[Dyad, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def column_labels(self) -> tuple[str, ...]:
        return tuple(str(d) for d in self.columns)

    @cached_property
    def column_index(self) -> dict[Dyad, int]:
        return {dyad: col for col, dyad in enumerate(self.columns)}


@dataclass(frozen=True)
class SufficientStatistic:
    spec: BlockSpec
    degrees: tuple[int, ...]
    block_counts: tuple[int, ...]

    @property
    def vector(self) -> tuple[int, ...]:
        return self.degrees + self.block_counts


@dataclass(frozen=True)
class RankResult:
    rank: int
    pivot_rows: tuple[int, ...]


class MoveKind(Enum):
    WITHIN_BLOCK = 'within'
    THREE_ONE = '3-1'
    TWO_TWO = '2-2'
    TWO_ONE_ONE = '2-1-1'


@dataclass(frozen=True, order=True)
class QuadBinomial:
    """p[plus_0]p[plus_1] - p[minus_0]p[minus_1], canonical sign: plus < minus."""
    plus: tuple[Dyad, Dyad]
    minus: tuple[Dyad, Dyad]
    kind: MoveKind = field(compare=False)
    plus_columns: tuple[int, int] = field(compare=False, default=(0, 0))
    minus_columns: tuple[int, int] = field(compare=False, default=(0, 0))

    @property
    def vertices(self) -> frozenset[Vertex]:
        return frozenset(v for d in self.plus for v in d.endpoints)


@dataclass(frozen=True, eq=False)
class ToricParams:
    beta: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.beta) <= 0) or np.any(np.asarray(self.alpha) <= 0):
            raise ValueError('toric parameters must be strictly positive')


@dataclass(frozen=True, eq=False)
class GenericData:
    u: np.ndarray
    seed: int


@dataclass(frozen=True, eq=False)
class LikelihoodSystem:
    spec: BlockSpec
    u: np.ndarray
    design: DesignMatrix
    pivot_rows: tuple[int, ...]
    binomials: tuple[QuadBinomial, ...]

    @property
    def num_variables(self) -> int:
        return len(self.design.columns)

    @property
    def rank(self) -> int:
        return len(self.pivot_rows)

    @property
    def codim(self) -> int:
        return self.num_variables - self.rank

    @cached_property
    def reduced_rows(self) -> np.ndarray:
        return self.design.entries[list(self.pivot_rows)]

    @cached_property
    def rhs(self) -> np.ndarray:
        return self.reduced_rows @ self.u

    @cached_property
    def plus_columns(self) -> np.ndarray:
        return np.array([b.plus_columns for b in self.binomials], dtype=int).reshape(-1, 2)

    @cached_property
    def minus_columns(self) -> np.ndarray:
        return np.array([b.minus_columns for b in self.binomials], dtype=int).reshape(-1, 2)


@dataclass(frozen=True, eq=False)
class KernelChart:
    particular: np.ndarray
    basis: tuple[tuple[Fraction, ...], ...]

    @property
    def codim(self) -> int:
        return len(self.basis[0]) if self.basis else 0

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.basis], dtype=float).reshape(
            len(self.basis), self.codim
        )

    def point(self, y: np.ndarray) -> np.ndarray:
        return self.particular + self.matrix @ y


@dataclass(frozen=True, eq=False)
class SquareSystem:
    """c equations y^T Q_i y + B_i y + C_i = 0 in c unknowns."""
    quadratic: np.ndarray
    linear: np.ndarray
    constant: np.ndarray
    combination: np.ndarray

    @property
    def codim(self) -> int:
        return self.constant.shape[0]

    @cached_property
    def symmetric_quadratic(self) -> np.ndarray:
        return self.quadratic + self.quadratic.transpose(0, 2, 1)

    @cached_property
    def coefficient_scale(self) -> float:
        scale = max(
            np.abs(self.quadratic).max(initial=0.0),
            np.abs(self.linear).max(initial=0.0),
            np.abs(self.constant).max(initial=0.0),
        )
        return float(scale) or 1.0

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        return np.einsum('ijk,j,k->i', self.quadratic, y, y) + self.linear @ y + self.constant

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        return self.symmetric_quadratic @ y + self.linear


@dataclass(frozen=True)
class TotalDegreeStart:
    """g_i(y) = y_i^2 - 1, solved by every sign vector."""
    codim: int

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        return y * y - 1

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        return np.diag(2 * y)

    def solutions(self) -> np.ndarray:
        return np.array(list(product((1.0, -1.0), repeat=self.codim)), dtype=complex).reshape(-1, self.codim)


@dataclass(frozen=True)
class TrackerConfig:
    initial_step: float = 0.05
    min_step: float = 1e-7
    max_step: float = 0.1
    corrector_tolerance: float = 1e-10
    max_corrector_iterations: int = 5
    divergence_norm: float = 1e8
    max_steps: int = 50_000
    gamma: complex = complex(0.6, 0.8)
    seed: int = 0

    def __post_init__(self):
        for name in ('initial_step', 'min_step', 'max_step', 'corrector_tolerance',
                     'max_corrector_iterations', 'divergence_norm', 'max_steps'):
            if getattr(self, name) <= 0:
                raise ValueError(f'tracker setting {name} must be positive')
        if not self.min_step < self.initial_step:
            raise ValueError('min_step must be smaller than initial_step')
        if abs(self.gamma) == 0:
            raise ValueError('gamma must be nonzero')


class EndpointStatus(Enum):
    FAILED = -1
    CONVERGED = 0
    DIVERGED = 1


@dataclass(frozen=True, eq=False)
class Endpoint:
    status: EndpointStatus
    point: np.ndarray | None
    residual: float
    steps: int
    condition: float
    retried: bool = False


@dataclass(frozen=True, eq=False)
class Cluster:
    representative: np.ndarray
    members: tuple[int, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.members)


@dataclass(frozen=True, eq=False)
class SolutionSet:
    points: tuple[np.ndarray, ...]
    multiplicities: tuple[int, ...]
    endpoints: tuple[Endpoint, ...]
    config: TrackerConfig

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def paths_tracked(self) -> int:
        return len(self.endpoints)

    def tally(self, status: EndpointStatus) -> int:
        return sum(1 for e in self.endpoints if e.status is status)

    @property
    def diverged(self) -> int:
        return self.tally(EndpointStatus.DIVERGED)

    @property
    def failed(self) -> int:
        return self.tally(EndpointStatus.FAILED)


@dataclass(frozen=True, eq=False)
class LikelihoodSolutions:
    """Solutions of L(M) for one data vector, in p-coordinates."""
    spec: BlockSpec
    u: np.ndarray
    seed: int
    points: tuple[np.ndarray, ...]
    multiplicities: tuple[int, ...]
    solution_set: SolutionSet | None = None
    reseeded: bool = False

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def paths_tracked(self) -> int:
        return self.solution_set.paths_tracked if self.solution_set else 0

    @property
    def diverged(self) -> int:
        return self.solution_set.diverged if self.solution_set else 0

    @property
    def failed(self) -> int:
        return self.solution_set.failed if self.solution_set else 0


@dataclass(frozen=True)
class MLDegreeReport:
    spec: BlockSpec
    formula_value: int
    numeric_count: int | None = None
    paths_tracked: int = 0
    diverged: int = 0
    failed: int = 0
    seeds: tuple[int, ...] = ()
    per_seed_counts: tuple[int, ...] = ()
    stable: bool = True
    gated: bool = False
    solutions: tuple[LikelihoodSolutions, ...] = field(default=(), compare=False, repr=False)

    @property
    def agreement(self) -> bool | None:
        if self.numeric_count is None:
            return None
        return self.numeric_count == self.formula_value


@dataclass(frozen=True, eq=False)
class ContractionPair:
    spec: BlockSpec
    m1_spec: BlockSpec
    m2_spec: BlockSpec
    m1_sources: tuple[tuple[int, ...], ...]
    m2_sources: tuple[tuple[int, ...], ...]
    m1_star_columns: dict[Vertex, int]
    m2_star_columns: dict[int, int]
    num_dyads: int

    @cached_property
    def m1_aggregation(self) -> np.ndarray:
        return _aggregation(self.m1_sources, self.num_dyads)

    @cached_property
    def m2_aggregation(self) -> np.ndarray:
        return _aggregation(self.m2_sources, self.num_dyads)


def _aggregation(sources: tuple[tuple[int, ...], ...], width: int) -> np.ndarray:
    matrix = np.zeros((len(sources), width), dtype=int)
    for row, columns in enumerate(sources):
        matrix[row, list(columns)] = 1
    return matrix


@dataclass(frozen=True)
class FactorizationReport:
    spec: BlockSpec
    seed: int
    s_count: int
    s1_count: int
    s2_count: int
    matches: tuple[tuple[int, int], ...] = ()
    membership_residual: float = 0.0
    forward_round_trip: float = 0.0
    backward_round_trip: float = 0.0
    summation_gap: float = 0.0
    injective: bool = False
    surjective: bool = False
    inconclusive: bool = False
    notes: tuple[str, ...] = ()

    @property
    def cardinality_ok(self) -> bool:
        return self.s_count == self.s1_count * self.s2_count

    def passed(self, tolerance: float) -> bool:
        return (
            not self.inconclusive
            and self.cardinality_ok
            and self.injective
            and self.surjective
            and self.membership_residual <= tolerance
            and self.forward_round_trip <= tolerance
            and self.backward_round_trip <= tolerance
            and self.summation_gap <= tolerance
        )


@dataclass(frozen=True, eq=False)
class MLEFit:
    spec: BlockSpec
    theta: np.ndarray
    theta_rows: tuple[str, ...]
    p_hat: np.ndarray
    grad_norm: float
    iterations: int
    marginal_residual: float
    # false when a stalled line search was accepted short of the gradient tolerance
    converged: bool = True


class Operation:
    id: UUID
    done: bool

    def __init__(self, id: UUID, done: bool = False, result=None) -> None:
        self.id = id
        self.done = done
        self.result = result
        self.error: BaseException | None = None
        self.finished = Event()

    def __eq__(self, other: "Operation") -> bool:
        return (
            self.id == other.id
            and self.done == other.done
            and self.result == other.result
        )
