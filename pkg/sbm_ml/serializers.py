import math

from rest_framework import serializers
from rest_enumfield import EnumField

from .exceptions import BlockmodelError
from .models import BlockSpec, Dyad, EndpointStatus, Graph, Vertex


class FiniteFloatField(serializers.FloatField):
    """Float output with inf and nan rendered as null."""

    def to_representation(self, value):
        value = float(value)
        return value if math.isfinite(value) else None


class ComplexVectorField(serializers.Field):
    """Complex vector as a list of [re, im] pairs."""

    def to_representation(self, value):
        return [[float(z.real), float(z.imag)] for z in value]


class SpecField(serializers.Field):
    def to_representation(self, value: BlockSpec):
        return list(value.sizes)


class DyadField(serializers.Field):
    def to_representation(self, value: Dyad):
        return value.as_list()


class BlockSpecSerializer(serializers.Serializer):
    sizes = serializers.ListField(
        child=serializers.IntegerField(min_value=1),
        allow_empty=False,
    )

    def validate_sizes(self, value):
        if sum(value) < 2:
            raise serializers.ValidationError('a model needs at least two vertices')
        return value

    def create(self, validated_data) -> BlockSpec:
        return BlockSpec(tuple(validated_data['sizes']))


class VertexListField(serializers.ListField):
    child = serializers.IntegerField(min_value=1)

    def __init__(self, **kwargs):
        super().__init__(min_length=2, max_length=2, **kwargs)


class GraphSerializer(serializers.Serializer):
    """Graph JSON: {"blocks": [n1, ..., nk], "edges": [[[i, v], [j, w]], ...]}, 1-based."""
    blocks = serializers.ListField(child=serializers.IntegerField(min_value=1), allow_empty=False)
    edges = serializers.ListField(
        child=serializers.ListField(child=VertexListField(), min_length=2, max_length=2),
        default=list,
    )

    def validate(self, attrs):
        try:
            spec = BlockSpec(tuple(attrs['blocks']))
        except BlockmodelError as exc:
            raise serializers.ValidationError({'blocks': [str(exc)]})

        errors = {}
        seen = set()
        for position, (a, b) in enumerate(attrs['edges']):
            try:
                dyad = Dyad(Vertex(*a), Vertex(*b))
                for vertex in dyad.endpoints:
                    if not spec.contains(vertex):
                        raise BlockmodelError(f'vertex {vertex} is not in {spec}')
            except BlockmodelError as exc:
                errors[str(position)] = [str(exc)]
                continue
            if dyad in seen:
                errors[str(position)] = [f'duplicate edge {dyad}']
            seen.add(dyad)
        if errors:
            raise serializers.ValidationError({'edges': errors})
        attrs['spec'] = spec
        attrs['dyads'] = frozenset(seen)
        return attrs

    def create(self, validated_data) -> Graph:
        return Graph(spec=validated_data['spec'], edges=validated_data['dyads'])


class SufficientStatisticSerializer(serializers.Serializer):
    spec = SpecField()
    degrees = serializers.ListField(child=serializers.IntegerField())
    block_counts = serializers.ListField(child=serializers.IntegerField())
    statistic = serializers.ListField(child=serializers.IntegerField(), source='vector')


class QuadBinomialSerializer(serializers.Serializer):
    kind = serializers.CharField(source='kind.value')
    plus = serializers.ListField(child=DyadField())
    minus = serializers.ListField(child=DyadField())
    plus_columns = serializers.ListField(child=serializers.IntegerField())
    minus_columns = serializers.ListField(child=serializers.IntegerField())


class MLDegreeReportSerializer(serializers.Serializer):
    spec = SpecField()
    formula_value = serializers.IntegerField()
    numeric_count = serializers.IntegerField(allow_null=True)
    agreement = serializers.BooleanField(allow_null=True)
    paths_tracked = serializers.IntegerField()
    diverged = serializers.IntegerField()
    failed = serializers.IntegerField()
    seeds = serializers.ListField(child=serializers.IntegerField())
    per_seed_counts = serializers.ListField(child=serializers.IntegerField())
    stable = serializers.BooleanField()
    gated = serializers.BooleanField()


class TrackerConfigSerializer(serializers.Serializer):
    initial_step = serializers.FloatField()
    min_step = serializers.FloatField()
    max_step = serializers.FloatField()
    corrector_tolerance = serializers.FloatField()
    max_corrector_iterations = serializers.IntegerField()
    divergence_norm = serializers.FloatField()
    max_steps = serializers.IntegerField()
    gamma = serializers.SerializerMethodField()
    seed = serializers.IntegerField()

    def get_gamma(self, obj):
        return [obj.gamma.real, obj.gamma.imag]


class EndpointSerializer(serializers.Serializer):
    status = EnumField(choices=EndpointStatus)
    residual = FiniteFloatField()
    steps = serializers.IntegerField()
    condition = FiniteFloatField()
    retried = serializers.BooleanField()


class SolutionSetSerializer(serializers.Serializer):
    config = TrackerConfigSerializer()
    count = serializers.IntegerField()
    paths_tracked = serializers.IntegerField()
    converged = serializers.SerializerMethodField()
    diverged = serializers.IntegerField()
    failed = serializers.IntegerField()
    multiplicities = serializers.ListField(child=serializers.IntegerField())
    solutions = serializers.ListField(child=ComplexVectorField(), source='points')
    endpoints = EndpointSerializer(many=True)

    def get_converged(self, obj):
        return obj.tally(EndpointStatus.CONVERGED)


class LikelihoodSolutionsSerializer(serializers.Serializer):
    """Solver report for one seed; the solver block is null when the chart is trivial."""
    seed = serializers.IntegerField()
    reseeded = serializers.BooleanField()
    count = serializers.IntegerField()
    multiplicities = serializers.ListField(child=serializers.IntegerField())
    points = serializers.ListField(child=ComplexVectorField())
    solver = SolutionSetSerializer(source='solution_set', allow_null=True)


class MLEFitSerializer(serializers.Serializer):
    spec = SpecField()
    theta = serializers.SerializerMethodField()
    p_hat = serializers.SerializerMethodField()
    grad_norm = FiniteFloatField()
    iterations = serializers.IntegerField()
    marginal_residual = FiniteFloatField()
    converged = serializers.BooleanField()

    def get_theta(self, obj):
        return dict(zip(obj.theta_rows, (float(x) for x in obj.theta)))

    def get_p_hat(self, obj):
        labels = self.context.get('columns') or [str(i) for i in range(len(obj.p_hat))]
        return dict(zip(labels, (float(x) for x in obj.p_hat)))


class FactorizationReportSerializer(serializers.Serializer):
    spec = SpecField()
    seed = serializers.IntegerField()
    s_count = serializers.IntegerField()
    s1_count = serializers.IntegerField()
    s2_count = serializers.IntegerField()
    cardinality_ok = serializers.BooleanField()
    matches = serializers.ListField(child=serializers.ListField(child=serializers.IntegerField()))
    membership_residual = FiniteFloatField()
    forward_round_trip = FiniteFloatField()
    backward_round_trip = FiniteFloatField()
    summation_gap = FiniteFloatField()
    injective = serializers.BooleanField()
    surjective = serializers.BooleanField()
    inconclusive = serializers.BooleanField()
    passed = serializers.SerializerMethodField()
    notes = serializers.ListField(child=serializers.CharField())

    def get_passed(self, obj):
        return obj.passed(self.context.get('tolerance', 1e-8))
