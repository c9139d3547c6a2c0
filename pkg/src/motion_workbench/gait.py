"""Gait event detection and spatiotemporal parameters from kinematics.

Events come from the coordinate method: project each heel and the pelvis
onto the walking direction and pick peaks of the heel-minus-pelvis signal
(maxima = heel strikes, minima = toe-offs). Detector defaults were tuned
once against the synthetic oracle and are frozen here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks, peak_prominences

from .store import KinematicSeries


class GaitError(Exception):
    pass


class NoLocomotionError(GaitError):
    """Pelvis does not travel far enough to define a walking direction."""


class InsufficientEventsError(GaitError):
    pass


@dataclass(frozen=True)
class DetectorConfig:
    window_s: float = 0.15  # moving-average smoothing window
    min_separation_s: float = 0.4  # minimum spacing between same-kind events
    min_prominence_m: float = 0.05
    min_net_displacement_m: float = 0.2


DEFAULTS = DetectorConfig()


@dataclass
class GaitEvents:
    heel_strikes_left: list[float] = field(default_factory=list)
    toe_offs_left: list[float] = field(default_factory=list)
    heel_strikes_right: list[float] = field(default_factory=list)
    toe_offs_right: list[float] = field(default_factory=list)
    warning: str | None = None

    def heel_strikes(self, side: str) -> list[float]:
        return self.heel_strikes_left if side == "left" else self.heel_strikes_right

    def toe_offs(self, side: str) -> list[float]:
        return self.toe_offs_left if side == "left" else self.toe_offs_right

    def is_empty(self) -> bool:
        return not (
            self.heel_strikes_left or self.toe_offs_left or self.heel_strikes_right or self.toe_offs_right
        )


@dataclass
class SideParameters:
    step_length_m: float
    stride_length_m: float
    stride_time_s: float
    stance_s: float
    swing_s: float
    stance_swing_ratio: float
    cadence_spm: float


@dataclass
class SpatioTemporal:
    walk_speed_mps: float
    cadence_spm: float
    left: SideParameters
    right: SideParameters
    step_length_asymmetry_pct: float
    stride_time_asymmetry_pct: float

    def side(self, name: str) -> SideParameters:
        return self.left if name == "left" else self.right


def moving_average(x: np.ndarray, window_samples: int) -> np.ndarray:
    """Length-preserving moving average with edge padding."""
    x = np.asarray(x, dtype=float)
    if window_samples <= 1 or x.size == 0:
        return x.copy()
    w = min(window_samples, x.size)
    left = (w - 1) // 2
    padded = np.pad(x, (left, w - 1 - left), mode="edge")
    return np.convolve(padded, np.ones(w) / w, mode="valid")


def smooth(x: np.ndarray, rate_hz: float, window_s: float = DEFAULTS.window_s) -> np.ndarray:
    return moving_average(x, max(1, int(round(window_s * rate_hz))))


def forward_axis(series: KinematicSeries, config: DetectorConfig = DEFAULTS) -> np.ndarray:
    """Principal horizontal direction of pelvis travel, oriented with it."""
    pelvis = series.keypoint("pelvis")
    xy = np.stack(
        [smooth(pelvis[:, 0], series.sample_rate_hz, config.window_s),
         smooth(pelvis[:, 1], series.sample_rate_hz, config.window_s)],
        axis=1,
    )
    net = xy[-1] - xy[0]
    if float(np.hypot(*net)) < config.min_net_displacement_m:
        raise NoLocomotionError("no locomotion direction: pelvis net horizontal displacement too small")
    centered = xy - xy.mean(axis=0)
    cov = centered.T @ centered
    eigvals, eigvecs = np.linalg.eigh(cov)
    axis = eigvecs[:, int(np.argmax(eigvals))]
    if float(np.dot(net, axis)) < 0:
        axis = -axis
    return np.array([axis[0], axis[1], 0.0])


def _relative_forward(series: KinematicSeries, side: str, axis: np.ndarray, config: DetectorConfig) -> np.ndarray:
    heel = series.keypoint(f"heel_{side}")
    pelvis = series.keypoint("pelvis")
    rel = (heel[:, :2] - pelvis[:, :2]) @ axis[:2]
    return smooth(rel, series.sample_rate_hz, config.window_s)


def _alternate(events: list[tuple[float, str, float]]) -> list[tuple[float, str, float]]:
    """Drop the weaker of two same-kind consecutive events."""
    out: list[tuple[float, str, float]] = []
    for ev in sorted(events):
        if out and out[-1][1] == ev[1]:
            if ev[2] > out[-1][2]:
                out[-1] = ev
        else:
            out.append(ev)
    return out


def detect_events(series: KinematicSeries, config: DetectorConfig = DEFAULTS) -> GaitEvents:
    """Heel strikes and toe-offs per side from heel-relative-to-pelvis peaks."""
    try:
        axis = forward_axis(series, config)
    except NoLocomotionError as exc:
        return GaitEvents(warning=str(exc))

    rate = series.sample_rate_hz
    distance = max(1, int(round(config.min_separation_s * rate)))
    events = GaitEvents()
    for side in ("left", "right"):
        r = _relative_forward(series, side, axis, config)
        maxima, _ = find_peaks(r, distance=distance, prominence=config.min_prominence_m)
        minima, _ = find_peaks(-r, distance=distance, prominence=config.min_prominence_m)
        tagged = [(i / rate, "strike", p) for i, p in zip(maxima, peak_prominences(r, maxima)[0])]
        tagged += [(i / rate, "toe_off", p) for i, p in zip(minima, peak_prominences(-r, minima)[0])]
        for t, kind, _ in _alternate(tagged):
            if kind == "strike":
                events.heel_strikes(side).append(t)
            else:
                events.toe_offs(side).append(t)

    if len(events.heel_strikes_left) < 2 and len(events.heel_strikes_right) < 2:
        return GaitEvents(warning="fewer than one stride detected")
    return events


def asymmetry_index(left: float, right: float) -> float:
    """|L - R| / mean(L, R) * 100; symmetric and bounded to [0, 200]."""
    if left < 0 or right < 0:
        raise ValueError("asymmetry_index takes non-negative quantities")
    if left + right == 0:
        raise ValueError("asymmetry_index undefined when both sides are zero")
    return abs(left - right) / ((left + right) / 2.0) * 100.0


def range_of_motion(values: np.ndarray, sample_rate_hz: float, window_s: float = DEFAULTS.window_s) -> float:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise GaitError("range_of_motion of an empty channel")
    if not np.isfinite(values).all():
        raise GaitError("range_of_motion of a non-finite channel")
    smoothed = smooth(values, sample_rate_hz, window_s)
    return float(smoothed.max() - smoothed.min())


def count_events(events: GaitEvents) -> dict[str, int]:
    return {"left": len(events.heel_strikes_left), "right": len(events.heel_strikes_right)}


def _frame(t: float, rate: float, n: int) -> int:
    return int(np.clip(round(t * rate), 0, n - 1))


def _stance_swing(strikes: list[float], toe_offs: list[float]) -> tuple[list[float], list[float]]:
    stances, swings = [], []
    for a, b in zip(strikes, strikes[1:]):
        inside = [t for t in toe_offs if a < t < b]
        if len(inside) == 1:
            stances.append(inside[0] - a)
            swings.append(b - inside[0])
    return stances, swings


def spatiotemporal(series: KinematicSeries, events: GaitEvents, config: DetectorConfig = DEFAULTS) -> SpatioTemporal:
    """Walkway-style parameters from detected events and heel trajectories."""
    if len(events.heel_strikes_left) < 2 or len(events.heel_strikes_right) < 2:
        raise InsufficientEventsError("need at least 2 heel strikes per side")
    axis = forward_axis(series, config)
    rate = series.sample_rate_hz
    n = series.frame_count

    pelvis_proj = smooth(series.keypoint("pelvis")[:, :2] @ axis[:2], rate, config.window_s)
    heel_proj = {
        side: smooth(series.keypoint(f"heel_{side}")[:, :2] @ axis[:2], rate, config.window_s)
        for side in ("left", "right")
    }

    all_strikes = sorted(
        [(t, "left") for t in events.heel_strikes_left] + [(t, "right") for t in events.heel_strikes_right]
    )
    t_first, t_last = all_strikes[0][0], all_strikes[-1][0]
    elapsed = t_last - t_first
    if elapsed <= 0:
        raise InsufficientEventsError("heel strikes span zero time")

    walk_speed = (pelvis_proj[_frame(t_last, rate, n)] - pelvis_proj[_frame(t_first, rate, n)]) / elapsed
    cadence = 60.0 * len(all_strikes) / elapsed

    sides = {}
    for side in ("left", "right"):
        other = "right" if side == "left" else "left"
        strikes = events.heel_strikes(side)

        step_lengths = []
        for t in strikes:
            prior = [tp for tp in events.heel_strikes(other) if tp < t]
            if prior:
                step_lengths.append(
                    heel_proj[side][_frame(t, rate, n)] - heel_proj[other][_frame(prior[-1], rate, n)]
                )
        stride_lengths = [
            heel_proj[side][_frame(b, rate, n)] - heel_proj[side][_frame(a, rate, n)]
            for a, b in zip(strikes, strikes[1:])
        ]
        stride_times = list(np.diff(strikes))
        stances, swings = _stance_swing(strikes, events.toe_offs(side))
        stance = float(np.mean(stances)) if stances else float("nan")
        swing = float(np.mean(swings)) if swings else float("nan")
        side_elapsed = strikes[-1] - strikes[0]
        sides[side] = SideParameters(
            step_length_m=float(np.mean(step_lengths)) if step_lengths else float("nan"),
            stride_length_m=float(np.mean(stride_lengths)) if stride_lengths else float("nan"),
            stride_time_s=float(np.mean(stride_times)),
            stance_s=stance,
            swing_s=swing,
            stance_swing_ratio=stance / swing if swing and np.isfinite(swing) and swing > 0 else float("nan"),
            cadence_spm=120.0 * (len(strikes) - 1) / side_elapsed if side_elapsed > 0 else float("nan"),
        )

    return SpatioTemporal(
        walk_speed_mps=float(walk_speed),
        cadence_spm=float(cadence),
        left=sides["left"],
        right=sides["right"],
        step_length_asymmetry_pct=asymmetry_index(
            abs(sides["left"].step_length_m), abs(sides["right"].step_length_m)
        ),
        stride_time_asymmetry_pct=asymmetry_index(sides["left"].stride_time_s, sides["right"].stride_time_s),
    )


def analyze(series: KinematicSeries, config: DetectorConfig = DEFAULTS) -> SpatioTemporal:
    """Detect events then compute spatiotemporal parameters in one call."""
    return spatiotemporal(series, detect_events(series, config), config)
