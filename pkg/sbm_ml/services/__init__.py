__all__ = [
    'BinomialService',
    'BlockmodelService',
    'ExportService',
    'FactorizationService',
    'HomotopyService',
    'JobService',
    'LikelihoodService',
    'MLDegreeService',
    'MLEService',
]

from .binomial_service import BinomialService
from .blockmodel_service import BlockmodelService
from .export_service import ExportService
from .factorization_service import FactorizationService
from .homotopy_service import HomotopyService
from .job_service import JobService
from .likelihood_service import LikelihoodService
from .mldeg_service import MLDegreeService
from .mle_service import MLEService
