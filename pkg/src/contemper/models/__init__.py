from .base import ParameterLayout, ParameterVector, TargetModel, tempered_log_posterior
from .bimodal import BimodalModel
from .galaxy import GalaxyMixtureModel
from .sir import SIRModel

__all__ = [
    "ParameterLayout", "ParameterVector", "TargetModel", "tempered_log_posterior",
    "BimodalModel", "GalaxyMixtureModel", "SIRModel",
]
