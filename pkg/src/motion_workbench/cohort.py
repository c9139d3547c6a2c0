"""Parametric cohort generator with closed-form ground truth.

Walking kinematics follow a sinusoidal template: the pelvis advances at
constant speed v along the travel direction and each heel oscillates
around it with per-side amplitude, so heel strikes land exactly at the
maxima of the heel-minus-pelvis forward signal and every spatiotemporal
quantity has an analytic value. Observation noise is added only after the
truth is recorded, so downstream tolerances exercise the analysis
pipeline rather than the generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .store import (
    ClinicalRecord,
    GroundTruth,
    KinematicSeries,
    ParticipantRecord,
    Phase,
    PrivilegedStore,
    PublicStore,
    SessionRecord,
    StepRecord,
    StoreError,
    TrialRecord,
)

JOINTS = ("hip_flexion", "knee_flexion", "ankle_flexion")
JOINT_NAMES = tuple(f"{j}_{side}" for j in JOINTS for side in ("left", "right"))
KEYPOINT_NAMES = ("pelvis", "heel_left", "heel_right", "toe_left", "toe_right")

# phase of each joint sinusoid relative to the same-side heel oscillation;
# hip and ankle in phase so forward walking has positive hip-ankle correlation
# and backward walking (ankle phase + pi) flips its sign
JOINT_PHASE = {"hip_flexion": 0.0, "knee_flexion": -math.pi / 2, "ankle_flexion": 0.0}
JOINT_OFFSET_DEG = {"hip_flexion": 10.0, "knee_flexion": 30.0, "ankle_flexion": 0.0}

SIT_ANGLES_DEG = {"hip_flexion": 80.0, "knee_flexion": 90.0, "ankle_flexion": 0.0}

FOOT_LENGTH_M = 0.15
LATERAL_OFFSET_M = 0.10
PELVIS_HEIGHT_M = 0.90
SEATED_PELVIS_HEIGHT_M = 0.55

WALKING_ACTIVITIES = ("overground_walking", "backward_walking")
ACTIVITIES = WALKING_ACTIVITIES + ("tug", "sit_to_stand", "wheelchair_propulsion")


class GeneratorError(StoreError):
    pass


@dataclass
class GaitProfile:
    speed_mps: float
    cadence_spm: float
    amp_fwd_m: dict[str, float] = field(default_factory=lambda: {"left": 0.30, "right": 0.30})
    rom_deg: dict[str, dict[str, float]] = field(
        default_factory=lambda: {
            "hip_flexion": {"left": 40.0, "right": 40.0},
            "knee_flexion": {"left": 60.0, "right": 60.0},
            "ankle_flexion": {"left": 30.0, "right": 30.0},
        }
    )
    phase_offset_rad: float = math.pi
    noise_deg: float = 1.0
    noise_m: float = 0.01
    stance_fraction: dict[str, float] = field(default_factory=lambda: {"left": 0.60, "right": 0.60})

    @property
    def stride_hz(self) -> float:
        return self.cadence_spm / 120.0

    def validate(self) -> None:
        if self.speed_mps <= 0 or self.cadence_spm <= 0:
            raise GeneratorError("speed and cadence must be positive")
        if any(a < 0 for a in self.amp_fwd_m.values()):
            raise GeneratorError("heel amplitudes must be non-negative")
        for joint, sides in self.rom_deg.items():
            if any(v < 0 for v in sides.values()):
                raise GeneratorError(f"rom_deg[{joint}] must be non-negative")
        for side, sf in self.stance_fraction.items():
            if not 0.4 < sf < 0.8:
                raise GeneratorError(f"stance_fraction[{side}]={sf} outside (0.4, 0.8)")


@dataclass
class ImpairmentProfile:
    kind: str = "control"  # control | stroke | prosthesis
    affected_side: str = "none"
    rom_scale: float = 1.0
    amputation_level: str = "none"  # none | transtibial | transfemoral
    berg_score: int = 56

    def __post_init__(self):
        if self.kind == "control" and (self.rom_scale != 1.0 or self.affected_side != "none"):
            raise ValueError("control profile requires rom_scale=1 and affected_side=none")
        if not 0 < self.rom_scale <= 1.0:
            raise ValueError("rom_scale must be in (0, 1]")
        if not 0 <= self.berg_score <= 56:
            raise ValueError("berg_score must be in [0, 56]")


@dataclass
class TrialSpec:
    activity: str
    duration_s: float
    hurdle: bool = False


@dataclass
class SessionSpec:
    date: str
    trials: list[TrialSpec]


@dataclass
class ParticipantSpec:
    participant_id: str
    impairment: ImpairmentProfile
    base_profile: GaitProfile
    sessions: list[SessionSpec]


@dataclass
class CohortSpec:
    participants: list[ParticipantSpec]
    seed: int
    rate_hz: float = 100.0


def apply_impairment(profile: GaitProfile, impairment: ImpairmentProfile) -> GaitProfile:
    """Scale affected-side amplitudes per the impairment signature.

    Stroke scales every joint plus the heel amplitude on the affected side;
    transtibial scales only the ankle, transfemoral ankle and knee.
    """
    if impairment.kind == "control" or impairment.affected_side == "none":
        return profile
    side = impairment.affected_side
    scale = impairment.rom_scale
    rom = {j: dict(sides) for j, sides in profile.rom_deg.items()}
    amp = dict(profile.amp_fwd_m)
    if impairment.kind == "stroke":
        for j in rom:
            rom[j][side] *= scale
        amp[side] *= scale
    elif impairment.kind == "prosthesis":
        scaled = ("ankle_flexion",) if impairment.amputation_level == "transtibial" else (
            "ankle_flexion",
            "knee_flexion",
        )
        for j in scaled:
            if j in rom:
                rom[j][side] *= scale
    return replace(profile, rom_deg=rom, amp_fwd_m=amp)


# ---------------------------------------------------------------------------
# per-activity generation


def _strike_times(phase: float, f: float, start: float, end: float) -> list[float]:
    """Times in [start, end] where sin(2*pi*f*(t-start) + phase) peaks."""
    first = ((math.pi / 2 - phase) % (2 * math.pi)) / (2 * math.pi * f)
    out = []
    k = 0
    while True:
        t = start + first + k / f
        if t > end + 1e-12:
            break
        out.append(t)
        k += 1
    return out


def _toe_off_times(strikes: list[float], stance_fraction: float, f: float, start: float, end: float) -> list[float]:
    offs = [t + stance_fraction / f for t in strikes if t + stance_fraction / f <= end + 1e-12]
    if strikes:
        prev = strikes[0] - (1.0 - stance_fraction) / f
        if prev >= start - 1e-12:
            offs.insert(0, prev)
    return offs


def _per_step_records(
    strikes: dict[str, list[float]],
    amp: dict[str, float],
    stance: dict[str, float],
    v: float,
    f: float,
) -> list[StepRecord]:
    merged = sorted((t, s) for s in ("left", "right") for t in strikes[s])
    records = []
    for i, (t, side) in enumerate(merged):
        prev = next(((tp, sp) for tp, sp in reversed(merged[:i]) if sp != side), None)
        if prev is None:
            continue
        tp, other = prev
        records.append(
            StepRecord(
                side=side,
                step_length_m=v * (t - tp) + amp[side] - amp[other],
                stride_time_s=1.0 / f,
                stance_s=stance[side] / f,
                swing_s=(1.0 - stance[side]) / f,
            )
        )
    return records


def _side_phases(profile: GaitProfile) -> dict[str, float]:
    return {"left": 0.0, "right": profile.phase_offset_rad}


def _joint_matrix(
    t: np.ndarray,
    f: float,
    profile: GaitProfile,
    side_phase: dict[str, float],
    ankle_flip: bool,
    hip_burst: np.ndarray | None = None,
) -> np.ndarray:
    cols = []
    for joint in JOINTS:
        for side in ("left", "right"):
            rom = profile.rom_deg[joint][side]
            phase = side_phase[side] + JOINT_PHASE[joint]
            if joint == "ankle_flexion" and ankle_flip:
                phase += math.pi
            amp = np.full_like(t, rom / 2.0)
            if joint == "hip_flexion" and hip_burst is not None:
                amp = amp * hip_burst
            cols.append(amp * np.sin(2 * math.pi * f * t + phase) + JOINT_OFFSET_DEG[joint])
    return np.stack(cols, axis=1)


def _stack_positions(pelvis, heel_l, heel_r, toe_l, toe_r) -> np.ndarray:
    return np.stack([pelvis, heel_l, heel_r, toe_l, toe_r], axis=1)


def _walking_trial(profile: GaitProfile, activity: str, duration_s: float, rate_hz: float, hurdle: bool):
    f = profile.stride_hz
    v = profile.speed_mps
    n = int(round(duration_s * rate_hz))
    if n / rate_hz < 2.5 / f:
        raise GeneratorError(f"duration {duration_s}s too short for 2 strides at {profile.cadence_spm} steps/min")
    t = np.arange(n) / rate_hz
    t_last = (n - 1) / rate_hz
    backward = activity == "backward_walking"
    direction = np.array([-1.0, 0.0, 0.0]) if backward else np.array([1.0, 0.0, 0.0])
    lateral = np.array([0.0, 1.0, 0.0])

    side_phase = _side_phases(profile)
    amp = profile.amp_fwd_m

    pelvis = np.zeros((n, 3))
    pelvis += direction * (v * t)[:, None]
    pelvis[:, 2] = PELVIS_HEIGHT_M + 0.02 * np.sin(2 * math.pi * (2 * f) * t)

    hurdle_phase: list[Phase] = []
    hip_burst = None
    if hurdle:
        # center the burst on the hip-flexion peak nearest mid-trial so the
        # elevated amplitude is visible in the peak value
        mid = duration_s / 2.0
        tc = (round(mid * f - 0.25) + 0.25) / f
        hip_burst = 1.0 + 0.8 * np.exp(-(((t - tc) / 0.35) ** 2))
        hurdle_phase = [Phase("hurdle", tc - 0.5, tc + 0.5)]

    heels = {}
    toes = {}
    for side, lat_sign in (("left", 1.0), ("right", -1.0)):
        r = amp[side] * np.sin(2 * math.pi * f * t + side_phase[side])
        z = 0.03 + 0.015 * (1 + np.sin(2 * math.pi * f * t + side_phase[side] + math.pi))
        heel = pelvis.copy()
        heel[:, :2] += direction[None, :2] * r[:, None] + lateral[None, :2] * (lat_sign * LATERAL_OFFSET_M)
        heel[:, 2] = z
        toe = heel.copy()
        toe[:, :2] += direction[None, :2] * FOOT_LENGTH_M
        toe[:, 2] = z - 0.01
        heels[side] = heel
        toes[side] = toe

    angles = _joint_matrix(t, f, profile, side_phase, ankle_flip=backward, hip_burst=hip_burst)
    positions = _stack_positions(pelvis, heels["left"], heels["right"], toes["left"], toes["right"])

    strikes = {s: _strike_times(side_phase[s], f, 0.0, t_last) for s in ("left", "right")}
    toe_offs = {
        s: _toe_off_times(strikes[s], profile.stance_fraction[s], f, 0.0, t_last) for s in ("left", "right")
    }
    per_step = _per_step_records(strikes, amp, profile.stance_fraction, v, f)
    phases = [Phase("walk", 0.0, n / rate_hz)] + hurdle_phase
    return angles, positions, strikes, toe_offs, per_step, v, phases


def _smoothstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3 - 2 * x)


def _tug_trial(profile: GaitProfile, duration_s: float, rate_hz: float):
    """Timed-up-and-go: sit, rise, walk out, quarter turn, return leg.

    The walk leg is longer than the return leg so the trajectory is an
    L whose dominant direction is the outbound axis.
    """
    if duration_s < 8.0:
        raise GeneratorError("tug trials need at least 8 s")
    f = profile.stride_hz
    v = profile.speed_mps
    n = int(round(duration_s * rate_hz))
    t = np.arange(n) / rate_hz
    t_last = (n - 1) / rate_hz

    sit_end, rise_end, turn_len = 2.0, 3.0, 1.5
    locomotion = duration_s - rise_end
    walk_len = 0.6 * (locomotion - turn_len)
    turn_start = rise_end + walk_len
    turn_end = turn_start + turn_len
    b = (math.pi / 2) / turn_len  # heading rate during the turn

    heading = np.zeros(n)
    in_turn = (t >= turn_start) & (t < turn_end)
    heading[in_turn] = b * (t[in_turn] - turn_start)
    heading[t >= turn_end] = math.pi / 2

    # pelvis xy: piecewise closed-form integral of v * (cos h, sin h)
    x = np.zeros(n)
    y = np.zeros(n)
    walking = t >= rise_end
    tw = t[walking]
    turn_tau = np.clip(tw - turn_start, 0.0, turn_len)
    x[walking] = np.where(tw < turn_start, v * (tw - rise_end), v * walk_len + (v / b) * np.sin(b * turn_tau))
    y[walking] = np.where(tw < turn_start, 0.0, (v / b) * (1 - np.cos(b * turn_tau)))
    after = tw >= turn_end
    x[walking] = np.where(after, v * walk_len + (v / b), x[walking])
    y[walking] = np.where(after, (v / b) + v * (tw - turn_end), y[walking])

    z = np.full(n, SEATED_PELVIS_HEIGHT_M)
    rising = (t >= sit_end) & (t < rise_end)
    z[rising] = SEATED_PELVIS_HEIGHT_M + (PELVIS_HEIGHT_M - SEATED_PELVIS_HEIGHT_M) * _smoothstep(
        (t[rising] - sit_end) / (rise_end - sit_end)
    )
    z[t >= rise_end] = PELVIS_HEIGHT_M + 0.02 * np.sin(2 * math.pi * (2 * f) * (t[t >= rise_end] - rise_end))
    pelvis = np.stack([x, y, z], axis=1)

    side_phase = _side_phases(profile)
    fwd = np.stack([np.cos(heading), np.sin(heading)], axis=1)
    perp = np.stack([-np.sin(heading), np.cos(heading)], axis=1)

    heels = {}
    toes = {}
    for side, lat_sign in (("left", 1.0), ("right", -1.0)):
        r = np.where(
            t >= rise_end,
            profile.amp_fwd_m[side] * np.sin(2 * math.pi * f * (t - rise_end) + side_phase[side]),
            0.05,
        )
        heel = pelvis.copy()
        heel[:, :2] += fwd * r[:, None] + perp * (lat_sign * LATERAL_OFFSET_M)
        heel[:, 2] = 0.03
        toe = heel.copy()
        toe[:, :2] += fwd * FOOT_LENGTH_M
        toe[:, 2] = 0.025
        heels[side] = heel
        toes[side] = toe

    # joint angles: seated constants blending into the walking sinusoid
    tw_angles = _joint_matrix(np.maximum(t - rise_end, 0.0), f, profile, side_phase, ankle_flip=False)
    angles = np.empty_like(tw_angles)
    blend = _smoothstep((t - sit_end) / (rise_end - sit_end))
    for ci, joint in enumerate(j for j in JOINTS for _ in ("left", "right")):
        seated = SIT_ANGLES_DEG[joint]
        angles[:, ci] = seated * (1 - blend) + tw_angles[:, ci] * blend

    positions = _stack_positions(pelvis, heels["left"], heels["right"], toes["left"], toes["right"])

    strikes = {s: _strike_times(side_phase[s], f, rise_end, t_last) for s in ("left", "right")}
    toe_offs = {
        s: _toe_off_times(strikes[s], profile.stance_fraction[s], f, rise_end, t_last)
        for s in ("left", "right")
    }
    phases = [
        Phase("sit", 0.0, sit_end),
        Phase("rise", sit_end, rise_end),
        Phase("walk", rise_end, turn_start),
        Phase("turn", turn_start, turn_end),
        Phase("return", turn_end, n / rate_hz),
    ]
    return angles, positions, strikes, toe_offs, [], v, phases


def _sit_to_stand_trial(profile: GaitProfile, duration_s: float, rate_hz: float):
    if duration_s < 4.0:
        raise GeneratorError("sit_to_stand trials need at least 4 s")
    n = int(round(duration_s * rate_hz))
    t = np.arange(n) / rate_hz
    sit_end = 0.4 * duration_s
    rise_end = 0.6 * duration_s

    blend = _smoothstep((t - sit_end) / (rise_end - sit_end))
    z = SEATED_PELVIS_HEIGHT_M + (PELVIS_HEIGHT_M - SEATED_PELVIS_HEIGHT_M) * blend
    pelvis = np.stack([np.zeros(n), np.zeros(n), z], axis=1)

    angles = np.empty((n, len(JOINT_NAMES)))
    standing = {"hip_flexion": 5.0, "knee_flexion": 5.0, "ankle_flexion": 0.0}
    for ci, joint in enumerate(j for j in JOINTS for _ in ("left", "right")):
        angles[:, ci] = SIT_ANGLES_DEG[joint] * (1 - blend) + standing[joint] * blend

    heels = {}
    toes = {}
    for side, lat_sign in (("left", 1.0), ("right", -1.0)):
        heel = np.tile(np.array([0.10, lat_sign * LATERAL_OFFSET_M, 0.03]), (n, 1))
        toe = heel + np.array([FOOT_LENGTH_M, 0.0, -0.005])
        heels[side] = heel
        toes[side] = toe
    positions = _stack_positions(pelvis, heels["left"], heels["right"], toes["left"], toes["right"])

    phases = [
        Phase("sit", 0.0, sit_end),
        Phase("rise", sit_end, rise_end),
        Phase("stand", rise_end, n / rate_hz),
    ]
    empty = {"left": [], "right": []}
    return angles, positions, empty, empty, [], 0.0, phases


def _wheelchair_trial(profile: GaitProfile, duration_s: float, rate_hz: float):
    n = int(round(duration_s * rate_hz))
    t = np.arange(n) / rate_hz
    v = profile.speed_mps
    pelvis = np.stack([v * t, np.zeros(n), np.full(n, SEATED_PELVIS_HEIGHT_M)], axis=1)

    angles = np.empty((n, len(JOINT_NAMES)))
    for ci, joint in enumerate(j for j in JOINTS for _ in ("left", "right")):
        angles[:, ci] = SIT_ANGLES_DEG[joint]

    heels = {}
    toes = {}
    for side, lat_sign in (("left", 1.0), ("right", -1.0)):
        heel = pelvis + np.array([0.30, lat_sign * LATERAL_OFFSET_M, -SEATED_PELVIS_HEIGHT_M + 0.10])
        toe = heel + np.array([FOOT_LENGTH_M, 0.0, 0.0])
        heels[side] = heel
        toes[side] = toe
    positions = _stack_positions(pelvis, heels["left"], heels["right"], toes["left"], toes["right"])

    phases = []
    cycle, push_len = 1.5, 0.8
    k = 0
    while k * cycle < duration_s:
        start = k * cycle
        phases.append(Phase("push", start, min(start + push_len, duration_s)))
        if start + push_len < duration_s:
            phases.append(Phase("coast", start + push_len, min((k + 1) * cycle, duration_s)))
        k += 1
    empty = {"left": [], "right": []}
    return angles, positions, empty, empty, [], v, phases


def generate_trial(
    profile: GaitProfile,
    impairment: ImpairmentProfile,
    activity: str,
    duration_s: float,
    rate_hz: float,
    seed,
    hurdle: bool = False,
    trial_id: str = "trial",
) -> tuple[KinematicSeries, GroundTruth]:
    """Generate one trial plus its closed-form ground truth."""
    if rate_hz <= 0:
        raise GeneratorError("rate_hz must be positive")
    if activity not in ACTIVITIES:
        raise GeneratorError(f"unknown activity {activity!r}")
    profile = apply_impairment(profile, impairment)
    profile.validate()

    if activity in WALKING_ACTIVITIES:
        parts = _walking_trial(profile, activity, duration_s, rate_hz, hurdle)
    elif activity == "tug":
        parts = _tug_trial(profile, duration_s, rate_hz)
    elif activity == "sit_to_stand":
        parts = _sit_to_stand_trial(profile, duration_s, rate_hz)
    else:
        parts = _wheelchair_trial(profile, duration_s, rate_hz)
    angles, positions, strikes, toe_offs, per_step, walk_speed, phases = parts

    rng = np.random.default_rng(seed)
    angles = angles + rng.normal(0.0, profile.noise_deg, angles.shape)
    positions = positions + rng.normal(0.0, profile.noise_m, positions.shape)

    series = KinematicSeries(
        sample_rate_hz=rate_hz,
        joint_names=JOINT_NAMES,
        angles_deg=angles,
        keypoint_names=KEYPOINT_NAMES,
        positions_m=positions,
    )
    truth = GroundTruth(
        trial_id=trial_id,
        heel_strikes_left=strikes["left"],
        toe_offs_left=toe_offs["left"],
        heel_strikes_right=strikes["right"],
        toe_offs_right=toe_offs["right"],
        per_step=per_step,
        walk_speed_mps=walk_speed,
        clinical=ClinicalRecord(
            diagnosis=impairment.kind,
            affected_side=impairment.affected_side,
            amputation_level=impairment.amputation_level,
            berg_score=impairment.berg_score,
        ),
        phases=phases,
    )
    return series, truth


def generate_cohort(spec: CohortSpec) -> tuple[PublicStore, PrivilegedStore]:
    """Deterministic in (spec, seed): same spec yields identical stores."""
    participants = []
    kinematics: dict[str, KinematicSeries] = {}
    truth: dict[str, GroundTruth] = {}
    for pi, pspec in enumerate(spec.participants):
        sessions = []
        for si, sspec in enumerate(pspec.sessions):
            trials = []
            for ti, tspec in enumerate(sspec.trials):
                trial_id = f"{pspec.participant_id}-{sspec_session_id(si)}-T{ti + 1:02d}"
                series, gt = generate_trial(
                    pspec.base_profile,
                    pspec.impairment,
                    tspec.activity,
                    tspec.duration_s,
                    spec.rate_hz,
                    seed=[spec.seed, pi, si, ti],
                    hurdle=tspec.hurdle,
                    trial_id=trial_id,
                )
                kinematics[trial_id] = series
                truth[trial_id] = gt
                trials.append(
                    TrialRecord(
                        trial_id=trial_id,
                        activity=tspec.activity,
                        duration_s=series.duration_s,
                        kinematics_ref=f"public/trials/{trial_id}.json",
                    )
                )
            sessions.append(SessionRecord(session_id=sspec_session_id(si), date=sspec.date, trials=tuple(trials)))
        participants.append(ParticipantRecord(participant_id=pspec.participant_id, sessions=tuple(sessions)))
    return PublicStore(tuple(participants), kinematics=kinematics), PrivilegedStore(truth)


def sspec_session_id(index: int) -> str:
    return f"S{index + 1}"


# ---------------------------------------------------------------------------
# spec (de)serialization for the CLI


def profile_to_json(p: GaitProfile) -> dict:
    return {
        "speed_mps": p.speed_mps,
        "cadence_spm": p.cadence_spm,
        "amp_fwd_m": p.amp_fwd_m,
        "rom_deg": p.rom_deg,
        "phase_offset_rad": p.phase_offset_rad,
        "noise_deg": p.noise_deg,
        "noise_m": p.noise_m,
        "stance_fraction": p.stance_fraction,
    }


def profile_from_json(doc: dict) -> GaitProfile:
    base = GaitProfile(speed_mps=float(doc["speed_mps"]), cadence_spm=float(doc["cadence_spm"]))
    for key in ("amp_fwd_m", "rom_deg", "phase_offset_rad", "noise_deg", "noise_m", "stance_fraction"):
        if key in doc:
            setattr(base, key, doc[key])
    return base


def cohort_spec_to_json(spec: CohortSpec) -> dict:
    return {
        "seed": spec.seed,
        "rate_hz": spec.rate_hz,
        "participants": [
            {
                "participant_id": p.participant_id,
                "impairment": {
                    "kind": p.impairment.kind,
                    "affected_side": p.impairment.affected_side,
                    "rom_scale": p.impairment.rom_scale,
                    "amputation_level": p.impairment.amputation_level,
                    "berg_score": p.impairment.berg_score,
                },
                "base_profile": profile_to_json(p.base_profile),
                "sessions": [
                    {
                        "date": s.date,
                        "trials": [
                            {"activity": t.activity, "duration_s": t.duration_s, "hurdle": t.hurdle}
                            for t in s.trials
                        ],
                    }
                    for s in p.sessions
                ],
            }
            for p in spec.participants
        ],
    }


def cohort_spec_from_json(doc: dict) -> CohortSpec:
    participants = []
    for p in doc["participants"]:
        imp = p.get("impairment", {})
        participants.append(
            ParticipantSpec(
                participant_id=p["participant_id"],
                impairment=ImpairmentProfile(
                    kind=imp.get("kind", "control"),
                    affected_side=imp.get("affected_side", "none"),
                    rom_scale=float(imp.get("rom_scale", 1.0)),
                    amputation_level=imp.get("amputation_level", "none"),
                    berg_score=int(imp.get("berg_score", 56)),
                ),
                base_profile=profile_from_json(p["base_profile"]),
                sessions=[
                    SessionSpec(
                        date=s["date"],
                        trials=[
                            TrialSpec(
                                activity=t["activity"],
                                duration_s=float(t["duration_s"]),
                                hurdle=bool(t.get("hurdle", False)),
                            )
                            for t in s["trials"]
                        ],
                    )
                    for s in p["sessions"]
                ],
            )
        )
    return CohortSpec(participants=participants, seed=int(doc["seed"]), rate_hz=float(doc.get("rate_hz", 100.0)))


# ---------------------------------------------------------------------------
# stock cohorts


def example_cohort_spec(seed: int = 7) -> CohortSpec:
    """Small 4-participant cohort used throughout the tests."""

    def walking(n, dur=10.0):
        return [TrialSpec("overground_walking", dur) for _ in range(n)]

    p1 = ParticipantSpec(
        participant_id="P1",
        impairment=ImpairmentProfile(kind="control", berg_score=55),
        base_profile=GaitProfile(speed_mps=1.2, cadence_spm=110.0),
        sessions=[
            SessionSpec(
                date="2024-01-01",
                trials=walking(2) + [TrialSpec("tug", 12.0), TrialSpec("sit_to_stand", 6.0)],
            ),
            SessionSpec(date="2024-01-08", trials=walking(1) + [TrialSpec("backward_walking", 10.0)]),
        ],
    )
    p2 = ParticipantSpec(
        participant_id="P2",
        impairment=ImpairmentProfile(kind="stroke", affected_side="left", rom_scale=0.6, berg_score=38),
        base_profile=GaitProfile(speed_mps=0.8, cadence_spm=95.0),
        sessions=[
            SessionSpec(date="2024-02-05", trials=walking(2) + [TrialSpec("tug", 14.0)]),
        ],
    )
    p3 = ParticipantSpec(
        participant_id="P3",
        impairment=ImpairmentProfile(
            kind="prosthesis", affected_side="right", rom_scale=0.7, amputation_level="transtibial", berg_score=47
        ),
        base_profile=GaitProfile(speed_mps=1.0, cadence_spm=105.0),
        sessions=[
            SessionSpec(
                date="2024-03-03",
                trials=walking(2)
                + [TrialSpec("backward_walking", 10.0), TrialSpec("wheelchair_propulsion", 10.0)],
            ),
        ],
    )
    p4 = ParticipantSpec(
        participant_id="P4",
        impairment=ImpairmentProfile(kind="control", berg_score=52),
        base_profile=GaitProfile(speed_mps=1.1, cadence_spm=115.0),
        sessions=[
            SessionSpec(
                date="2024-04-10",
                trials=[
                    TrialSpec("overground_walking", 10.0),
                    TrialSpec("overground_walking", 10.0, hurdle=True),
                    TrialSpec("overground_walking", 10.0),
                    TrialSpec("tug", 12.0),
                ],
            ),
        ],
    )
    return CohortSpec(participants=[p1, p2, p3, p4], seed=seed)


def benchmark_cohort_spec(seed: int = 7) -> CohortSpec:
    """Richer 8-participant cohort covering every benchmark template.

    Berg scores decrease strictly with base walking speed so relative
    fall risk is inferable from kinematics alone.
    """

    def profile(speed, cadence):
        return GaitProfile(speed_mps=speed, cadence_spm=cadence)

    def og(dur=10.0, hurdle=False):
        return TrialSpec("overground_walking", dur, hurdle=hurdle)

    rows = [
        ("B1", ImpairmentProfile(kind="control", berg_score=55), profile(1.25, 118.0)),
        ("B2", ImpairmentProfile(kind="control", berg_score=53), profile(1.15, 114.0)),
        ("B3", ImpairmentProfile(kind="control", berg_score=52), profile(1.10, 112.0)),
        (
            "B4",
            ImpairmentProfile(
                kind="prosthesis", affected_side="right", rom_scale=0.7, amputation_level="transtibial", berg_score=47
            ),
            profile(1.00, 108.0),
        ),
        (
            "B5",
            ImpairmentProfile(
                kind="prosthesis", affected_side="left", rom_scale=0.65, amputation_level="transfemoral", berg_score=44
            ),
            profile(0.90, 104.0),
        ),
        ("B6", ImpairmentProfile(kind="control", berg_score=42), profile(0.80, 98.0)),
        ("B7", ImpairmentProfile(kind="stroke", affected_side="left", rom_scale=0.6, berg_score=38), profile(0.70, 94.0)),
        ("B8", ImpairmentProfile(kind="stroke", affected_side="right", rom_scale=0.55, berg_score=33), profile(0.60, 90.0)),
    ]
    sessions = {
        "B1": [
            SessionSpec("2024-01-05", [og(), og(), TrialSpec("tug", 12.0)]),
            SessionSpec("2024-01-19", [og(), TrialSpec("backward_walking", 10.0)]),
        ],
        "B2": [
            SessionSpec("2024-02-02", [og(), og(hurdle=True), og(), TrialSpec("tug", 12.0)]),
        ],
        "B3": [
            SessionSpec("2024-03-01", [og(), TrialSpec("sit_to_stand", 6.0)]),
            SessionSpec("2024-03-15", [og(), TrialSpec("backward_walking", 10.0)]),
        ],
        "B4": [
            SessionSpec(
                "2024-04-08",
                [og(), og(), TrialSpec("tug", 14.0), TrialSpec("wheelchair_propulsion", 10.0)],
            ),
        ],
        "B5": [
            SessionSpec("2024-05-06", [og(), og(), TrialSpec("backward_walking", 10.0)]),
            SessionSpec("2024-05-20", [og(), TrialSpec("sit_to_stand", 6.0)]),
        ],
        "B6": [
            SessionSpec("2024-06-03", [og(12.0), og(12.0), TrialSpec("tug", 16.0)]),
        ],
        "B7": [
            SessionSpec("2024-07-01", [og(12.0), og(12.0), TrialSpec("tug", 16.0)]),
            SessionSpec("2024-07-22", [og(12.0), TrialSpec("sit_to_stand", 8.0)]),
        ],
        "B8": [
            SessionSpec("2024-08-04", [og(12.0), og(12.0), TrialSpec("backward_walking", 12.0)]),
        ],
    }
    participants = [
        ParticipantSpec(participant_id=pid, impairment=imp, base_profile=prof, sessions=sessions[pid])
        for pid, imp, prof in rows
    ]
    return CohortSpec(participants=participants, seed=seed)
