class BlockmodelError(Exception):
    """Base class for every error raised by the sbm_ml services."""


class InvalidSpecError(BlockmodelError, ValueError):
    pass


class InvalidPermutationError(BlockmodelError, ValueError):
    pass


class InvalidGraphError(BlockmodelError, ValueError):
    pass


class DataShapeError(BlockmodelError, ValueError):
    pass


class InapplicableMoveError(BlockmodelError, ValueError):
    pass


class TrivialChartError(BlockmodelError):
    """The linear equations already pin down p = u; there is nothing to square up."""


class DeskScaleError(BlockmodelError):
    def __init__(self, codim: int, max_codim: int):
        super().__init__(
            f"codimension {codim} exceeds the desk-scale gate {max_codim} "
            f"({2 ** codim} paths); pass an override to run anyway"
        )
        self.codim = codim
        self.max_codim = max_codim


class ContractionError(BlockmodelError, ValueError):
    pass


class NonGenericInputError(BlockmodelError, ArithmeticError):
    pass


class FitConvergenceError(BlockmodelError, ArithmeticError):
    def __init__(self, message: str, iterations: int, grad_norm: float):
        super().__init__(f"{message} (iterations={iterations}, grad_norm={grad_norm:.3e})")
        self.iterations = iterations
        self.grad_norm = grad_norm
