"""High-impedance fault location toolkit.

Simulates phase-a-to-ground faults on a two-source transmission line,
models the distance relay's R-X impedance locus and mho trip logic, and
trains multilayer perceptrons (GDX / SCG / CGB) to estimate the fault
distance from the locus.
"""

from .config import ExperimentConfig, default_config, paper_grid_config
from .features import (Dataset, FeatureVector, NormalizationParams, RasterImage,
                       RasterWindow, apply_normalizer, build_dataset,
                       extract_focal_features, fit_normalizer, rasterize_locus,
                       simulate_locus)
from .harness import ResultsTable, evaluate_locator
from .mlp import MlpModel, init_mlp, mlp_forward, mlp_gradient
from .netmodel import (FaultScenario, LineParams, NetworkSolution, SourceParams,
                       WaveformSet, prefault_state, solve_slg_fault,
                       synthesize_waveforms)
from .relay import (ImpedanceLocus, MhoZone, PhasorEstimate, RelayDecision,
                    apparent_impedance, decide_trip, dft_phasor, mho_contains,
                    residual_compensation_factor, track_locus, zone1_for_line)
from .training import (TrainConfig, TrainingReport, train_cgb, train_gdx,
                       train_mlp, train_scg)

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig", "default_config", "paper_grid_config",
    "Dataset", "FeatureVector", "NormalizationParams", "RasterImage",
    "RasterWindow", "apply_normalizer", "build_dataset",
    "extract_focal_features", "fit_normalizer", "rasterize_locus",
    "simulate_locus",
    "ResultsTable", "evaluate_locator",
    "MlpModel", "init_mlp", "mlp_forward", "mlp_gradient",
    "FaultScenario", "LineParams", "NetworkSolution", "SourceParams",
    "WaveformSet", "prefault_state", "solve_slg_fault", "synthesize_waveforms",
    "ImpedanceLocus", "MhoZone", "PhasorEstimate", "RelayDecision",
    "apparent_impedance", "decide_trip", "dft_phasor", "mho_contains",
    "residual_compensation_factor", "track_locus", "zone1_for_line",
    "TrainConfig", "TrainingReport", "train_cgb", "train_gdx", "train_mlp",
    "train_scg",
]
