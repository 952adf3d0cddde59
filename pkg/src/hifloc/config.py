"""Experiment configuration: one JSON file describes a full run.

Keys carry their units (ohm, km, Hz, seconds).  Complex impedances are
stored as two-element [real, imag] lists.  Two presets ship with the
package: the default augmented study grid (1 km distance steps, five
fault-resistance levels, 70/15/15 split) and the coarse "paper-grid"
(ten distances times 50/100 ohm, all rows in training).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import IoFailure
from .netmodel import FaultScenario, LineParams, SourceParams
from .training import TrainConfig

NOMINAL_KV = 154.0


@dataclass
class RelaySettings:
    reach_fraction: float = 0.8
    dwell: int = 3
    samples_per_cycle: int = 20
    use_compensation: bool = True


@dataclass
class SimSettings:
    inception_s: float = 0.04
    duration_s: float = 0.12


@dataclass
class ScenarioGrid:
    distances_km: tuple[float, ...]
    resistances_ohm: tuple[float, ...]

    def scenarios(self, inception_s: float) -> list[FaultScenario]:
        """Distance-major ordering, matching dataset row order."""
        return [FaultScenario(distance_km=d, rf_ohm=rf, inception_s=inception_s)
                for d in self.distances_km for rf in self.resistances_ohm]


@dataclass
class FeatureSettings:
    mode: str = "focal"
    r_min: float = -10.0
    r_max: float = 120.0
    x_min: float = -10.0
    x_max: float = 60.0
    n: int = 32


@dataclass
class SplitSettings:
    train: float = 0.7
    validation: float = 0.15
    test: float = 0.15
    seed: int = 2023


@dataclass
class ExperimentConfig:
    line: LineParams
    source_a: SourceParams
    source_b: Optional[SourceParams]
    relay: RelaySettings = field(default_factory=RelaySettings)
    sim: SimSettings = field(default_factory=SimSettings)
    grid: ScenarioGrid = field(default_factory=lambda: ScenarioGrid((25.0,), (50.0,)))
    features: FeatureSettings = field(default_factory=FeatureSettings)
    split: SplitSettings = field(default_factory=SplitSettings)
    training: dict[str, TrainConfig] = field(default_factory=dict)
    output_dir: str = "out"

    def scenarios(self) -> list[FaultScenario]:
        return self.grid.scenarios(self.sim.inception_s)


def _default_line() -> LineParams:
    # typical 154 kV overhead constants; the study grid stays within 60 km
    return LineParams(z1_per_km=0.05 + 0.488j, z0_per_km=0.25 + 1.45j,
                      length_km=60.0, f_hz=50.0)


def _source(mag_v: float, angle_deg: float, z1: complex, z0: complex) -> SourceParams:
    return SourceParams(emf=cmath.rect(mag_v, math.radians(angle_deg)), z1=z1, z0=z0)


def _default_sources() -> tuple[SourceParams, SourceParams]:
    e = NOMINAL_KV * 1e3 / math.sqrt(3.0)
    src_a = _source(e, 0.0, 10j, 15j)
    src_b = _source(e, -10.0, 12j, 18j)  # angle lag creates the pre-fault load point
    return src_a, src_b


def _default_training(max_epochs_gdx: int = 8000, max_epochs_cg: int = 3000,
                      goal_mse: float = 1e-7, max_fail: int = 25) -> dict[str, TrainConfig]:
    mk = lambda opt, epochs: TrainConfig(
        optimizer=opt, max_epochs=epochs, goal_mse=goal_mse, seed=7,
        hidden_layers=(10,), max_validation_failures=max_fail)
    return {"gdx": mk("gdx", max_epochs_gdx),
            "scg": mk("scg", max_epochs_cg),
            "cgb": mk("cgb", max_epochs_cg)}


def default_config() -> ExperimentConfig:
    """Augmented study: 1 km distance steps, rf in 25..125 ohm step 25."""
    src_a, src_b = _default_sources()
    return ExperimentConfig(
        line=_default_line(), source_a=src_a, source_b=src_b,
        grid=ScenarioGrid(distances_km=tuple(float(d) for d in range(5, 51)),
                          resistances_ohm=(25.0, 50.0, 75.0, 100.0, 125.0)),
        training=_default_training())


def paper_grid_config() -> ExperimentConfig:
    """Coarse 10-distance x {50, 100} ohm grid, every row in training."""
    src_a, src_b = _default_sources()
    return ExperimentConfig(
        line=_default_line(), source_a=src_a, source_b=src_b,
        grid=ScenarioGrid(distances_km=tuple(float(d) for d in range(5, 51, 5)),
                          resistances_ohm=(50.0, 100.0)),
        split=SplitSettings(train=1.0, validation=0.0, test=0.0, seed=2023),
        training=_default_training(max_epochs_gdx=5000, max_epochs_cg=5000,
                                   goal_mse=5e-5))


PRESETS = {"default": default_config, "paper-grid": paper_grid_config}


# --- JSON (de)serialisation --------------------------------------------------

def _cplx(z: complex) -> list[float]:
    return [z.real, z.imag]


def _as_cplx(v) -> complex:
    return complex(v[0], v[1])


def config_to_dict(cfg: ExperimentConfig) -> dict:
    d = {
        "line": {
            "z1_per_km_ohm": _cplx(cfg.line.z1_per_km),
            "z0_per_km_ohm": _cplx(cfg.line.z0_per_km),
            "length_km": cfg.line.length_km,
            "f_hz": cfg.line.f_hz,
        },
        "source_a": {
            "emf_v": _cplx(cfg.source_a.emf),
            "z1_ohm": _cplx(cfg.source_a.z1),
            "z0_ohm": _cplx(cfg.source_a.z0),
        },
        "source_b": None if cfg.source_b is None else {
            "emf_v": _cplx(cfg.source_b.emf),
            "z1_ohm": _cplx(cfg.source_b.z1),
            "z0_ohm": _cplx(cfg.source_b.z0),
        },
        "relay": {
            "reach_fraction": cfg.relay.reach_fraction,
            "dwell": cfg.relay.dwell,
            "samples_per_cycle": cfg.relay.samples_per_cycle,
            "use_compensation": cfg.relay.use_compensation,
        },
        "sim": {"inception_s": cfg.sim.inception_s, "duration_s": cfg.sim.duration_s},
        "grid": {
            "distances_km": list(cfg.grid.distances_km),
            "resistances_ohm": list(cfg.grid.resistances_ohm),
        },
        "features": {
            "mode": cfg.features.mode,
            "r_min_ohm": cfg.features.r_min, "r_max_ohm": cfg.features.r_max,
            "x_min_ohm": cfg.features.x_min, "x_max_ohm": cfg.features.x_max,
            "n": cfg.features.n,
        },
        "split": {
            "train": cfg.split.train, "validation": cfg.split.validation,
            "test": cfg.split.test, "seed": cfg.split.seed,
        },
        "training": {name: tc.to_dict() for name, tc in cfg.training.items()},
        "output_dir": cfg.output_dir,
    }
    return d


def config_from_dict(d: dict) -> ExperimentConfig:
    line = LineParams(z1_per_km=_as_cplx(d["line"]["z1_per_km_ohm"]),
                      z0_per_km=_as_cplx(d["line"]["z0_per_km_ohm"]),
                      length_km=float(d["line"]["length_km"]),
                      f_hz=float(d["line"]["f_hz"]))

    def src(block) -> Optional[SourceParams]:
        if block is None:
            return None
        return SourceParams(emf=_as_cplx(block["emf_v"]),
                            z1=_as_cplx(block["z1_ohm"]),
                            z0=_as_cplx(block["z0_ohm"]))

    r = d.get("relay", {})
    s = d.get("sim", {})
    f = d.get("features", {})
    p = d.get("split", {})
    return ExperimentConfig(
        line=line,
        source_a=src(d["source_a"]),
        source_b=src(d.get("source_b")),
        relay=RelaySettings(
            reach_fraction=float(r.get("reach_fraction", 0.8)),
            dwell=int(r.get("dwell", 3)),
            samples_per_cycle=int(r.get("samples_per_cycle", 20)),
            use_compensation=bool(r.get("use_compensation", True))),
        sim=SimSettings(inception_s=float(s.get("inception_s", 0.04)),
                        duration_s=float(s.get("duration_s", 0.12))),
        grid=ScenarioGrid(
            distances_km=tuple(float(v) for v in d["grid"]["distances_km"]),
            resistances_ohm=tuple(float(v) for v in d["grid"]["resistances_ohm"])),
        features=FeatureSettings(
            mode=f.get("mode", "focal"),
            r_min=float(f.get("r_min_ohm", -10.0)), r_max=float(f.get("r_max_ohm", 120.0)),
            x_min=float(f.get("x_min_ohm", -10.0)), x_max=float(f.get("x_max_ohm", 60.0)),
            n=int(f.get("n", 32))),
        split=SplitSettings(train=float(p.get("train", 0.7)),
                            validation=float(p.get("validation", 0.15)),
                            test=float(p.get("test", 0.15)),
                            seed=int(p.get("seed", 2023))),
        training={name: TrainConfig.from_dict(tc)
                  for name, tc in d.get("training", {}).items()},
        output_dir=d.get("output_dir", "out"))


def save_config(cfg: ExperimentConfig, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write config {path}: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return config_from_dict(json.load(fh))
    except OSError as exc:
        raise IoFailure(f"cannot read config {path}: {exc}") from exc
