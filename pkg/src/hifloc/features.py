"""Impedance-locus feature pipeline for the distance estimator.

A tracked locus is reduced to network inputs in two ways: a compact
"focal" vector (settled fault-point coordinates, locus arc length and
approach angle) or the flattened binary pixels of a rasterized R-X
image.  Features and the distance target are rescaled into [0.1, 0.9]
with per-feature min/max taken from the training rows only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, EmptyDataset, EmptyLocus, HiflocError
from .netmodel import (FaultScenario, _prefault_solution, solve_slg_fault,
                       synthesize_waveforms)
from .relay import ImpedanceLocus, residual_compensation_factor, track_locus

FEATURE_MODES = ("focal", "pixels")

# chords shorter than this (ohm) are treated as a stationary locus
CHORD_FLOOR_OHM = 1e-9


@dataclass(frozen=True)
class RasterWindow:
    """R-X plot window in ohms: (r_min, r_max, x_min, x_max)."""

    r_min: float
    r_max: float
    x_min: float
    x_max: float

    def __post_init__(self) -> None:
        if self.r_max <= self.r_min or self.x_max <= self.x_min:
            raise ValueError("raster window must have positive extent")


@dataclass
class RasterImage:
    """n x n visit-count grid; row 0 is the top of the window (x_max)."""

    grid: np.ndarray
    window: RasterWindow
    n: int


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    mode: str


@dataclass
class NormalizationParams:
    """Affine per-feature map onto [lo, hi] fitted on training rows.

    Degenerate features (max == min) map to the range midpoint forward
    and back to their min on inversion.  The same rule rescales the
    distance target using (target_min, target_max) bounds.
    """

    feature_min: np.ndarray
    feature_max: np.ndarray
    target_min: float
    target_max: float
    lo: float = 0.1
    hi: float = 0.9

    @property
    def n_features(self) -> int:
        return len(self.feature_min)

    @property
    def degenerate(self) -> np.ndarray:
        return self.feature_max == self.feature_min

    def _check_width(self, arr: np.ndarray) -> None:
        if arr.shape[-1] != self.n_features:
            raise DimensionMismatch(
                f"normalizer has {self.n_features} features, data has {arr.shape[-1]}")

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        self._check_width(x)
        span = self.feature_max - self.feature_min
        mid = 0.5 * (self.lo + self.hi)
        # convex form keeps the extrema exactly at lo / hi in floating point
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (x - self.feature_min) / span
            scaled = self.lo * (1.0 - u) + self.hi * u
        return np.where(self.degenerate, mid, scaled)

    def inverse(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        self._check_width(y)
        v = (y - self.lo) / (self.hi - self.lo)
        raw = self.feature_min * (1.0 - v) + self.feature_max * v
        return np.where(self.degenerate, self.feature_min, raw)

    def forward_target(self, t):
        t = np.asarray(t, dtype=float)
        u = (t - self.target_min) / (self.target_max - self.target_min)
        return self.lo * (1.0 - u) + self.hi * u

    def inverse_target(self, y):
        y = np.asarray(y, dtype=float)
        v = (y - self.lo) / (self.hi - self.lo)
        return self.target_min * (1.0 - v) + self.target_max * v

    def to_dict(self) -> dict:
        return {
            "feature_min": [float(v) for v in self.feature_min],
            "feature_max": [float(v) for v in self.feature_max],
            "target_min": float(self.target_min),
            "target_max": float(self.target_max),
            "lo": float(self.lo),
            "hi": float(self.hi),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NormalizationParams":
        return cls(feature_min=np.asarray(data["feature_min"], dtype=float),
                   feature_max=np.asarray(data["feature_max"], dtype=float),
                   target_min=float(data["target_min"]),
                   target_max=float(data["target_max"]),
                   lo=float(data.get("lo", 0.1)), hi=float(data.get("hi", 0.9)))


@dataclass
class Dataset:
    """Feature rows with distance targets and a train/validation/test label."""

    features: np.ndarray          # (n_rows, n_features)
    targets_km: np.ndarray        # (n_rows,)
    split: np.ndarray             # (n_rows,) of {"train","validation","test"}
    seed: Optional[int] = None
    mode: str = "focal"

    def __len__(self) -> int:
        return len(self.targets_km)

    def rows_for(self, split: str) -> np.ndarray:
        return np.flatnonzero(self.split == split)


# --- rasterization ---------------------------------------------------------

def _clip_segment(p0: complex, p1: complex,
                  win: RasterWindow) -> Optional[tuple[complex, complex]]:
    """Liang-Barsky clip of segment p0-p1 (R + jX) against the window."""
    dx = p1.real - p0.real
    dy = p1.imag - p0.imag
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, p0.real - win.r_min), (dx, win.r_max - p0.real),
                 (-dy, p0.imag - win.x_min), (dy, win.x_max - p0.imag)):
        if p == 0.0:
            if q < 0.0:
                return None
            continue
        r = q / p
        if p < 0.0:
            if r > t1:
                return None
            t0 = max(t0, r)
        else:
            if r < t0:
                return None
            t1 = min(t1, r)
    if t0 > t1:
        return None
    delta = p1 - p0
    return (p0 + t0 * delta, p0 + t1 * delta)


def _to_pixel(z: complex, win: RasterWindow, n: int) -> tuple[int, int]:
    """(row, col) of an in-window point; row 0 = top = x_max."""
    u = (z.real - win.r_min) / (win.r_max - win.r_min)
    v = (win.x_max - z.imag) / (win.x_max - win.x_min)
    col = min(max(int(u * n), 0), n - 1)
    row = min(max(int(v * n), 0), n - 1)
    return row, col


def _bresenham(r0: int, c0: int, r1: int, c1: int):
    """Integer grid cells of the discrete line from (r0,c0) to (r1,c1)."""
    dr = abs(r1 - r0)
    dc = abs(c1 - c0)
    sr = 1 if r1 >= r0 else -1
    sc = 1 if c1 >= c0 else -1
    err = dc - dr
    r, c = r0, c0
    while True:
        yield r, c
        if r == r1 and c == c1:
            break
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr


def rasterize_locus(locus: ImpedanceLocus, window: RasterWindow,
                    n: int = 32) -> RasterImage:
    """Draw the locus polyline into an n x n visit-count grid.

    Consecutive points are joined with discrete (Bresenham) lines after
    clipping each segment to the window; out-of-window single points are
    dropped.  A pixel shared by the end of one segment and the start of
    the next is counted once.

    Raises
    ------
    EmptyLocus
        If the locus holds no points.
    """
    if n < 8:
        raise ValueError("grid side must be at least 8")
    if len(locus) == 0:
        raise EmptyLocus("cannot rasterize an empty locus")
    grid = np.zeros((n, n), dtype=int)
    pts = locus.z_ohm

    last_cell: Optional[tuple[int, int]] = None
    if len(pts) == 1:
        clipped = _clip_segment(complex(pts[0]), complex(pts[0]), window)
        if clipped is not None:
            r, c = _to_pixel(clipped[0], window, n)
            grid[r, c] += 1
        return RasterImage(grid=grid, window=window, n=n)

    for i in range(len(pts) - 1):
        clipped = _clip_segment(complex(pts[i]), complex(pts[i + 1]), window)
        if clipped is None:
            last_cell = None
            continue
        r0, c0 = _to_pixel(clipped[0], window, n)
        r1, c1 = _to_pixel(clipped[1], window, n)
        for cell in _bresenham(r0, c0, r1, c1):
            if cell == last_cell:
                continue
            grid[cell] += 1
            last_cell = cell
    return RasterImage(grid=grid, window=window, n=n)


# --- feature extraction ----------------------------------------------------

def extract_focal_features(locus: ImpedanceLocus,
                           image: Optional[RasterImage] = None,
                           mode: str = "focal",
                           cycle_points: int = 20) -> FeatureVector:
    """Reduce a locus (or its raster image) to a fixed-length vector.

    mode "focal": settled fault-point R and X (component-wise median of
    the last cycle_points locus points), total arc length in ohms, and
    the approach angle in degrees of the last chord longer than 1e-9 ohm
    (0 for a stationary locus).  Angles are reported in [0, 360) so the
    leftward approach typical of relay loci stays continuous.

    mode "pixels": the raster grid flattened row-major, one 0/1 value
    per pixel.

    Raises
    ------
    EmptyLocus
        If the locus holds no points (or no image is given in pixel mode).
    """
    if len(locus) == 0:
        raise EmptyLocus("cannot extract features from an empty locus")
    if mode == "pixels":
        if image is None:
            raise EmptyLocus("pixel features need a raster image")
        values = (image.grid.ravel() > 0).astype(float)
        return FeatureVector(values=values, mode="pixels")
    if mode != "focal":
        raise ValueError(f"unknown feature mode {mode!r}")

    z = locus.z_ohm
    tail = z[-min(cycle_points, len(z)):]
    settled_r = float(np.median(tail.real))
    settled_x = float(np.median(tail.imag))
    arc = float(np.sum(np.abs(np.diff(z)))) if len(z) > 1 else 0.0

    angle = 0.0
    for i in range(len(z) - 2, -1, -1):
        chord = complex(z[i + 1] - z[i])
        if abs(chord) > CHORD_FLOOR_OHM:
            angle = math.degrees(math.atan2(chord.imag, chord.real)) % 360.0
            break
    return FeatureVector(values=np.array([settled_r, settled_x, arc, angle]),
                         mode="focal")


# --- normalization ---------------------------------------------------------

def fit_normalizer(dataset: Dataset, target_max: float,
                   target_min: float = 0.0, lo: float = 0.1,
                   hi: float = 0.9) -> NormalizationParams:
    """Per-feature min/max over the TRAINING rows only (no leakage).

    Raises
    ------
    EmptyDataset
        If the dataset or its training split holds no rows.
    """
    if len(dataset) == 0:
        raise EmptyDataset("cannot fit a normalizer on an empty dataset")
    train_idx = dataset.rows_for("train")
    if len(train_idx) == 0:
        raise EmptyDataset("dataset has no training rows to fit on")
    x = dataset.features[train_idx]
    return NormalizationParams(feature_min=x.min(axis=0), feature_max=x.max(axis=0),
                               target_min=float(target_min),
                               target_max=float(target_max), lo=lo, hi=hi)


def apply_normalizer(x, params: NormalizationParams,
                     direction: str = "forward"):
    """Apply (or invert) the affine feature scaling.

    Accepts a FeatureVector, a 1-D vector or a 2-D row matrix; returns
    the same kind.  Out-of-range inputs extrapolate linearly.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"unknown direction {direction!r}")
    if isinstance(x, FeatureVector):
        out = apply_normalizer(x.values, params, direction)
        return FeatureVector(values=out, mode=x.mode)
    arr = np.asarray(x, dtype=float)
    return params.forward(arr) if direction == "forward" else params.inverse(arr)


def normalized_arrays(dataset: Dataset,
                      params: NormalizationParams) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Normalized (X, y) pairs keyed by split name (absent splits -> empty)."""
    out = {}
    for split in ("train", "validation", "test"):
        idx = dataset.rows_for(split)
        x = params.forward(dataset.features[idx]) if len(idx) else \
            np.empty((0, params.n_features))
        y = params.forward_target(dataset.targets_km[idx]) if len(idx) else np.empty(0)
        out[split] = (x, y)
    return out


# --- dataset assembly ------------------------------------------------------

def assign_splits(n_rows: int, ratios: tuple[float, float, float],
                  seed: int) -> np.ndarray:
    """Seeded random split labels with counts within one row of the ratios."""
    r = np.asarray(ratios, dtype=float)
    if r.min() < 0 or abs(r.sum() - 1.0) > 1e-9:
        raise ValueError("split ratios must be non-negative and sum to 1")
    counts = np.floor(r * n_rows).astype(int)
    frac = r * n_rows - counts
    order = np.argsort(-frac, kind="stable")  # ties favour train, then validation
    for i in range(n_rows - counts.sum()):
        counts[order[i % 3]] += 1
    labels = np.array(["train"] * counts[0] + ["validation"] * counts[1]
                      + ["test"] * counts[2], dtype=object)
    out = np.empty(n_rows, dtype=object)
    out[np.random.default_rng(seed).permutation(n_rows)] = labels
    return out


def simulate_locus(cfg, scenario: FaultScenario) -> ImpedanceLocus:
    """Full simulation chain for one scenario: network -> waveforms -> locus."""
    line = cfg.line
    pre = _prefault_solution(line, cfg.source_a, cfg.source_b)
    post = solve_slg_fault(line, cfg.source_a, cfg.source_b, scenario)
    fs = cfg.relay.samples_per_cycle * line.f_hz
    waves = synthesize_waveforms(pre, post, scenario, fs, cfg.sim.duration_s,
                                 f_hz=line.f_hz)
    k0 = residual_compensation_factor(line.z1_per_km, line.z0_per_km) \
        if cfg.relay.use_compensation else 0j
    return track_locus(waves, cfg.relay.samples_per_cycle, k0)


def scenario_features(cfg, scenario: FaultScenario) -> np.ndarray:
    """Feature vector of one scenario under the configured mode."""
    locus = simulate_locus(cfg, scenario)
    fw = cfg.features
    window = RasterWindow(fw.r_min, fw.r_max, fw.x_min, fw.x_max)
    image = rasterize_locus(locus, window, fw.n)
    vec = extract_focal_features(locus, image, mode=fw.mode,
                                 cycle_points=cfg.relay.samples_per_cycle)
    return vec.values


def build_dataset(scenarios: list[FaultScenario], cfg) -> Dataset:
    """Simulate every scenario and assemble the labelled dataset.

    Row order follows the scenario list; split labels are drawn from the
    seeded generator with the configured ratios.  Simulation errors are
    re-raised annotated with the offending scenario.

    Raises
    ------
    EmptyDataset
        If the scenario list is empty.
    """
    if not scenarios:
        raise EmptyDataset("no scenarios to simulate")
    rows = []
    for sc in scenarios:
        try:
            rows.append(scenario_features(cfg, sc))
        except HiflocError as exc:
            raise type(exc)(
                f"scenario d={sc.distance_km} km rf={sc.rf_ohm} ohm: {exc}") from exc
    features = np.vstack(rows)
    targets = np.array([sc.distance_km for sc in scenarios], dtype=float)
    ratios = (cfg.split.train, cfg.split.validation, cfg.split.test)
    split = assign_splits(len(scenarios), ratios, cfg.split.seed)
    return Dataset(features=features, targets_km=targets, split=split,
                   seed=cfg.split.seed, mode=cfg.features.mode)


# --- CSV persistence -------------------------------------------------------

def dataset_to_csv(dataset: Dataset) -> str:
    """Header f1,...,fk,target_km,split; full double precision."""
    k = dataset.features.shape[1]
    header = ",".join(f"f{i + 1}" for i in range(k)) + ",target_km,split"
    lines = [header]
    for i in range(len(dataset)):
        feats = ",".join(repr(float(v)) for v in dataset.features[i])
        lines.append(f"{feats},{float(dataset.targets_km[i])!r},{dataset.split[i]}")
    return "\n".join(lines) + "\n"


def dataset_from_csv(text: str, mode: str = "focal") -> Dataset:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if len(lines) < 2:
        raise EmptyDataset("CSV holds no data rows")
    features = []
    targets = []
    split = []
    for ln in lines[1:]:
        parts = ln.split(",")
        features.append([float(v) for v in parts[:-2]])
        targets.append(float(parts[-2]))
        split.append(parts[-1])
    return Dataset(features=np.asarray(features, dtype=float),
                   targets_km=np.asarray(targets, dtype=float),
                   split=np.asarray(split, dtype=object), seed=None, mode=mode)
