"""Short-term load forecasting with VMD, chaos-initialised PSO and extreme learning machines."""

from .config import ExperimentConfig, ModelKind, SearchConfig, SyntheticSpec
from .elm import ElmConfig, ElmModel
from .partition import FrequencyPartition, HistogramSpec
from .pipeline import compare, generate_synthetic, run_repeated, run_single
from .pso import ChaosConfig, InitMode, PsoConfig
from .series import TimeSeries
from .vmd import ModeSet, VmdConfig, decompose

__all__ = [
    "ChaosConfig",
    "ElmConfig",
    "ElmModel",
    "ExperimentConfig",
    "FrequencyPartition",
    "HistogramSpec",
    "InitMode",
    "ModeSet",
    "ModelKind",
    "PsoConfig",
    "SearchConfig",
    "SyntheticSpec",
    "TimeSeries",
    "VmdConfig",
    "compare",
    "decompose",
    "generate_synthetic",
    "run_repeated",
    "run_single",
]
