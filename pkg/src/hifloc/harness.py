"""Model evaluation tables: real vs estimated fault distances per optimizer.

A ResultsTable mirrors the layout of a published fault-location study:
one row per evaluated scenario ordered by true distance, one prediction
column per trained network, and a footer with the mean squared error on
both the km scale and the normalized [0.1, 0.9] scale (the two differ by
the square of the affine scaling factor, so both are reported).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .features import NormalizationParams
from .mlp import MlpModel, mlp_forward


@dataclass
class ResultsTable:
    real_km: np.ndarray
    predictions_km: dict[str, np.ndarray] = field(default_factory=dict)
    mse_km2: dict[str, float] = field(default_factory=dict)
    mse_normalized: dict[str, float] = field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        return list(self.predictions_km.keys())

    def merged_with(self, other: "ResultsTable") -> "ResultsTable":
        if not np.array_equal(self.real_km, other.real_km):
            raise DimensionMismatch("tables evaluate different scenario rows")
        return ResultsTable(
            real_km=self.real_km,
            predictions_km={**self.predictions_km, **other.predictions_km},
            mse_km2={**self.mse_km2, **other.mse_km2},
            mse_normalized={**self.mse_normalized, **other.mse_normalized})


def prediction_table(real_km: np.ndarray, predicted_km: np.ndarray,
                     normalizer: NormalizationParams,
                     name: str = "model") -> ResultsTable:
    """Assemble a single-column table from already-computed predictions.

    Rows are ordered by ascending true distance (stable for ties); both
    MSE scales are derived from the same prediction column.
    """
    real_km = np.asarray(real_km, dtype=float)
    predicted_km = np.asarray(predicted_km, dtype=float)
    if real_km.shape != predicted_km.shape:
        raise DimensionMismatch("real and predicted columns differ in length")
    order = np.argsort(real_km, kind="stable")
    real_km = real_km[order]
    predicted_km = predicted_km[order]
    err_km = predicted_km - real_km
    err_norm = normalizer.forward_target(predicted_km) - normalizer.forward_target(real_km)
    return ResultsTable(
        real_km=real_km,
        predictions_km={name: predicted_km},
        mse_km2={name: float(np.mean(err_km ** 2))},
        mse_normalized={name: float(np.mean(err_norm ** 2))})


def evaluate_locator(model: MlpModel, normalizer: NormalizationParams,
                     features_raw: np.ndarray, targets_km: np.ndarray,
                     name: str = "model") -> ResultsTable:
    """Run the locator over raw feature rows and tabulate the estimates.

    Features are normalized with `normalizer`, the network output is
    inverse-normalized back to km.

    Raises
    ------
    DimensionMismatch
        If the feature width does not match the normalizer or model.
    """
    features_raw = np.asarray(features_raw, dtype=float)
    x = normalizer.forward(features_raw)
    if x.shape[-1] != model.n_inputs:
        raise DimensionMismatch(
            f"model expects {model.n_inputs} inputs, features have {x.shape[-1]}")
    y = mlp_forward(model, x)
    predicted_km = normalizer.inverse_target(y[:, 0])
    return prediction_table(targets_km, predicted_km, normalizer, name)


def results_to_csv(table: ResultsTable) -> str:
    """CSV rows by ascending distance plus MSE footer rows."""
    names = table.names
    lines = ["real_km," + ",".join(names)]
    for i, real in enumerate(table.real_km):
        vals = ",".join(repr(float(table.predictions_km[n][i])) for n in names)
        lines.append(f"{float(real)!r},{vals}")
    lines.append("mse_km2," + ",".join(repr(table.mse_km2[n]) for n in names))
    lines.append("mse_normalized," + ",".join(repr(table.mse_normalized[n])
                                              for n in names))
    return "\n".join(lines) + "\n"


def results_to_text(table: ResultsTable) -> str:
    """Aligned table with fixed 4-decimal km columns."""
    names = table.names
    width = max([12] + [len(n) + 2 for n in names])
    header = "real_km".rjust(10) + "".join(n.rjust(width) for n in names)
    lines = [header, "-" * len(header)]
    for i, real in enumerate(table.real_km):
        row = f"{float(real):10.4f}" + "".join(
            f"{float(table.predictions_km[n][i]):{width}.4f}" for n in names)
        lines.append(row)
    lines.append("-" * len(header))
    lines.append("mse_km2".rjust(10) + "".join(
        f"{table.mse_km2[n]:{width}.4e}" for n in names))
    lines.append("mse_norm".rjust(10) + "".join(
        f"{table.mse_normalized[n]:{width}.4e}" for n in names))
    return "\n".join(lines) + "\n"
