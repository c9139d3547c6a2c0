"""File-backed trial store, split into an agent-visible and a privileged half.

A cohort lives in one directory:

    <root>/manifest.json               participants -> sessions -> trials
    <root>/public/trials/<id>.json     kinematic series (agent-visible)
    <root>/privileged/truth/<id>.json  ground truth (scoring only)

Both halves are immutable after load; the privileged tree never feeds any
tool exposed to the analysis agent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date as _date
from pathlib import Path

import numpy as np

REQUIRED_KEYPOINTS = ("pelvis", "heel_left", "heel_right", "toe_left", "toe_right")

DIAGNOSES = ("control", "stroke", "prosthesis")
SIDES = ("left", "right", "none")
AMPUTATION_LEVELS = ("none", "transtibial", "transfemoral")


class StoreError(Exception):
    """Base class for cohort-store failures."""


class ManifestError(StoreError):
    pass


class BundleError(StoreError):
    """A trial bundle file is malformed; message names the file and field."""


class InvariantError(StoreError):
    """A loaded record violates a store invariant; message names the trial."""


class UnknownParticipantError(StoreError):
    pass


class UnknownTrialError(StoreError):
    pass


@dataclass(frozen=True)
class TrialRecord:
    trial_id: str
    activity: str
    duration_s: float
    kinematics_ref: str


@dataclass(frozen=True)
class SessionRecord:
    session_id: str
    date: str  # ISO-8601 calendar date
    trials: tuple[TrialRecord, ...]


@dataclass(frozen=True)
class ParticipantRecord:
    participant_id: str
    sessions: tuple[SessionRecord, ...]


@dataclass
class KinematicSeries:
    """Time-indexed joint angles (degrees) and keypoint positions (meters)."""

    sample_rate_hz: float
    joint_names: tuple[str, ...]
    angles_deg: np.ndarray  # T x J
    keypoint_names: tuple[str, ...]
    positions_m: np.ndarray  # T x K x 3, axis 2 = (x, y, z), z vertical

    @property
    def frame_count(self) -> int:
        return int(self.angles_deg.shape[0])

    @property
    def duration_s(self) -> float:
        return self.frame_count / self.sample_rate_hz

    def times(self) -> np.ndarray:
        return np.arange(self.frame_count) / self.sample_rate_hz

    def joint(self, name: str) -> np.ndarray:
        if name not in self.joint_names:
            raise KeyError(f"unknown joint channel {name!r}")
        return self.angles_deg[:, self.joint_names.index(name)]

    def keypoint(self, name: str) -> np.ndarray:
        if name not in self.keypoint_names:
            raise KeyError(f"unknown keypoint {name!r}")
        return self.positions_m[:, self.keypoint_names.index(name), :]

    def freeze(self) -> "KinematicSeries":
        self.angles_deg.setflags(write=False)
        self.positions_m.setflags(write=False)
        return self


@dataclass(frozen=True)
class StepRecord:
    """One walkway-style step measurement (privileged)."""

    side: str
    step_length_m: float
    stride_time_s: float
    stance_s: float
    swing_s: float


@dataclass(frozen=True)
class ClinicalRecord:
    diagnosis: str
    affected_side: str
    amputation_level: str
    berg_score: int


@dataclass(frozen=True)
class Phase:
    label: str
    start_s: float
    end_s: float


@dataclass
class GroundTruth:
    """Privileged per-trial truth; never reachable from agent tools."""

    trial_id: str
    heel_strikes_left: list[float]
    toe_offs_left: list[float]
    heel_strikes_right: list[float]
    toe_offs_right: list[float]
    per_step: list[StepRecord]
    walk_speed_mps: float
    clinical: ClinicalRecord
    phases: list[Phase]

    def heel_strikes(self, side: str) -> list[float]:
        return self.heel_strikes_left if side == "left" else self.heel_strikes_right

    def toe_offs(self, side: str) -> list[float]:
        return self.toe_offs_left if side == "left" else self.toe_offs_right

    def step_lengths(self, side: str) -> list[float]:
        return [s.step_length_m for s in self.per_step if s.side == side]

    def stride_times(self, side: str) -> list[float]:
        return [s.stride_time_s for s in self.per_step if s.side == side]


@dataclass(frozen=True)
class TrialFilter:
    participant_id: str | None = None
    activity: str | None = None
    session_id: str | None = None
    date_range: tuple[str, str] | None = None  # inclusive ISO dates


@dataclass(frozen=True)
class TrialSummary:
    participant_id: str
    session_id: str
    date: str
    trial_id: str
    activity: str
    duration_s: float


@dataclass
class QueryResult:
    """`found` distinguishes "no such participant" from "no matching trials"."""

    trials: list[TrialSummary]
    found: bool = True


@dataclass
class ParticipantSummary:
    trial_count: int
    session_count: int
    activities: dict[str, int]
    date_span_days: int


class PublicStore:
    """Agent-visible half of a cohort: metadata plus kinematics."""

    def __init__(
        self,
        participants: tuple[ParticipantRecord, ...],
        kinematics: dict[str, KinematicSeries] | None = None,
        root: Path | None = None,
    ):
        self.participants = participants
        self._root = root
        self._cache: dict[str, KinematicSeries] = {}
        if kinematics:
            for tid, series in kinematics.items():
                self._cache[tid] = series.freeze()
        self._by_participant = {p.participant_id: p for p in participants}
        self._trial_index: dict[str, tuple[ParticipantRecord, SessionRecord, TrialRecord]] = {}
        for p in participants:
            for s in p.sessions:
                for t in s.trials:
                    self._trial_index[t.trial_id] = (p, s, t)

    def participant_ids(self) -> list[str]:
        return [p.participant_id for p in self.participants]

    def participant(self, participant_id: str) -> ParticipantRecord:
        try:
            return self._by_participant[participant_id]
        except KeyError:
            raise UnknownParticipantError(f"unknown participant {participant_id!r}") from None

    def has_participant(self, participant_id: str) -> bool:
        return participant_id in self._by_participant

    def trial(self, trial_id: str) -> TrialRecord:
        try:
            return self._trial_index[trial_id][2]
        except KeyError:
            raise UnknownTrialError(f"unknown trial {trial_id!r}") from None

    def trial_context(self, trial_id: str) -> tuple[ParticipantRecord, SessionRecord, TrialRecord]:
        if trial_id not in self._trial_index:
            raise UnknownTrialError(f"unknown trial {trial_id!r}")
        return self._trial_index[trial_id]

    def trial_ids(self) -> list[str]:
        return sorted(self._trial_index)

    def kinematics(self, trial_id: str) -> KinematicSeries:
        if trial_id not in self._trial_index:
            raise UnknownTrialError(f"unknown trial {trial_id!r}")
        if trial_id not in self._cache:
            if self._root is None:
                raise StoreError(f"no kinematics available for trial {trial_id!r}")
            record = self._trial_index[trial_id][2]
            path = self._root / record.kinematics_ref
            self._cache[trial_id] = _read_series(path).freeze()
        return self._cache[trial_id]


class PrivilegedStore:
    """Scoring-only half of a cohort. Never exported to the tool registry."""

    def __init__(self, truth: dict[str, GroundTruth]):
        self._truth = dict(truth)

    def trial_ids(self) -> list[str]:
        return sorted(self._truth)

    def truth(self, trial_id: str) -> GroundTruth:
        try:
            return self._truth[trial_id]
        except KeyError:
            raise UnknownTrialError(f"no ground truth for trial {trial_id!r}") from None


# ---------------------------------------------------------------------------
# operations


def query_trials(store: PublicStore, flt: TrialFilter) -> QueryResult:
    """All trials matching every provided filter field, in stable order."""
    if flt.participant_id is not None and not store.has_participant(flt.participant_id):
        return QueryResult(trials=[], found=False)
    rows: list[TrialSummary] = []
    for p in store.participants:
        if flt.participant_id is not None and p.participant_id != flt.participant_id:
            continue
        for s in p.sessions:
            if flt.session_id is not None and s.session_id != flt.session_id:
                continue
            if flt.date_range is not None:
                lo, hi = flt.date_range
                if not (lo <= s.date <= hi):
                    continue
            for t in s.trials:
                if flt.activity is not None and t.activity != flt.activity:
                    continue
                rows.append(
                    TrialSummary(
                        participant_id=p.participant_id,
                        session_id=s.session_id,
                        date=s.date,
                        trial_id=t.trial_id,
                        activity=t.activity,
                        duration_s=t.duration_s,
                    )
                )
    rows.sort(key=lambda r: (r.participant_id, r.date, r.trial_id))
    return QueryResult(trials=rows, found=True)


def fetch_kinematics(store: PublicStore, trial_id: str) -> KinematicSeries:
    return store.kinematics(trial_id)


def summarize_participant(store: PublicStore, participant_id: str) -> ParticipantSummary:
    p = store.participant(participant_id)
    activities: dict[str, int] = {}
    trial_count = 0
    for s in p.sessions:
        for t in s.trials:
            trial_count += 1
            activities[t.activity] = activities.get(t.activity, 0) + 1
    dates = sorted(_date.fromisoformat(s.date) for s in p.sessions)
    span = (dates[-1] - dates[0]).days if len(dates) > 1 else 0
    return ParticipantSummary(
        trial_count=trial_count,
        session_count=len(p.sessions),
        activities=activities,
        date_span_days=span,
    )


# ---------------------------------------------------------------------------
# serialization

_JsonDict = dict


def _series_to_json(series: KinematicSeries) -> _JsonDict:
    return {
        "sample_rate_hz": series.sample_rate_hz,
        "joint_names": list(series.joint_names),
        "angles_deg": series.angles_deg.tolist(),
        "keypoint_names": list(series.keypoint_names),
        "positions_m": series.positions_m.tolist(),
    }


def _series_from_json(doc: _JsonDict, source: str) -> KinematicSeries:
    try:
        return KinematicSeries(
            sample_rate_hz=float(doc["sample_rate_hz"]),
            joint_names=tuple(doc["joint_names"]),
            angles_deg=np.asarray(doc["angles_deg"], dtype=np.float64),
            keypoint_names=tuple(doc["keypoint_names"]),
            positions_m=np.asarray(doc["positions_m"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise BundleError(f"{source}: malformed kinematics bundle ({exc})") from exc


def _truth_to_json(gt: GroundTruth) -> _JsonDict:
    return {
        "trial_id": gt.trial_id,
        "event_times": {
            "left": {"heel_strikes_s": gt.heel_strikes_left, "toe_offs_s": gt.toe_offs_left},
            "right": {"heel_strikes_s": gt.heel_strikes_right, "toe_offs_s": gt.toe_offs_right},
        },
        "per_step": [
            {
                "side": s.side,
                "step_length_m": s.step_length_m,
                "stride_time_s": s.stride_time_s,
                "stance_s": s.stance_s,
                "swing_s": s.swing_s,
            }
            for s in gt.per_step
        ],
        "walk_speed_mps": gt.walk_speed_mps,
        "clinical": {
            "diagnosis": gt.clinical.diagnosis,
            "affected_side": gt.clinical.affected_side,
            "amputation_level": gt.clinical.amputation_level,
            "berg_score": gt.clinical.berg_score,
        },
        "phases": [{"label": p.label, "start_s": p.start_s, "end_s": p.end_s} for p in gt.phases],
    }


def _truth_from_json(doc: _JsonDict, source: str) -> GroundTruth:
    try:
        ev = doc["event_times"]
        clin = doc["clinical"]
        return GroundTruth(
            trial_id=doc["trial_id"],
            heel_strikes_left=[float(x) for x in ev["left"]["heel_strikes_s"]],
            toe_offs_left=[float(x) for x in ev["left"]["toe_offs_s"]],
            heel_strikes_right=[float(x) for x in ev["right"]["heel_strikes_s"]],
            toe_offs_right=[float(x) for x in ev["right"]["toe_offs_s"]],
            per_step=[
                StepRecord(
                    side=s["side"],
                    step_length_m=float(s["step_length_m"]),
                    stride_time_s=float(s["stride_time_s"]),
                    stance_s=float(s["stance_s"]),
                    swing_s=float(s["swing_s"]),
                )
                for s in doc["per_step"]
            ],
            walk_speed_mps=float(doc["walk_speed_mps"]),
            clinical=ClinicalRecord(
                diagnosis=clin["diagnosis"],
                affected_side=clin["affected_side"],
                amputation_level=clin["amputation_level"],
                berg_score=int(clin["berg_score"]),
            ),
            phases=[Phase(p["label"], float(p["start_s"]), float(p["end_s"])) for p in doc["phases"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise BundleError(f"{source}: malformed ground-truth bundle ({exc})") from exc


def _read_series(path: Path) -> KinematicSeries:
    if not path.exists():
        raise BundleError(f"{path}: kinematics bundle missing")
    with open(path) as fh:
        doc = json.load(fh)
    series = _series_from_json(doc, str(path))
    _check_series_invariants(series, path.stem)
    return series


def save_store(public: PublicStore, privileged: PrivilegedStore, root: str | Path) -> Path:
    """Write the two-tree cohort layout; returns the root path."""
    root = Path(root)
    (root / "public" / "trials").mkdir(parents=True, exist_ok=True)
    (root / "privileged" / "truth").mkdir(parents=True, exist_ok=True)

    manifest = {
        "participants": [
            {
                "participant_id": p.participant_id,
                "sessions": [
                    {
                        "session_id": s.session_id,
                        "date": s.date,
                        "trials": [
                            {
                                "trial_id": t.trial_id,
                                "activity": t.activity,
                                "duration_s": t.duration_s,
                                "kinematics_ref": t.kinematics_ref,
                            }
                            for t in s.trials
                        ],
                    }
                    for s in p.sessions
                ],
            }
            for p in public.participants
        ]
    }
    _write_json(root / "manifest.json", manifest)
    for p in public.participants:
        for s in p.sessions:
            for t in s.trials:
                series = public.kinematics(t.trial_id)
                _write_json(root / t.kinematics_ref, _series_to_json(series))
    for tid in privileged.trial_ids():
        _write_json(root / "privileged" / "truth" / f"{tid}.json", _truth_to_json(privileged.truth(tid)))
    return root


def _write_json(path: Path, doc: _JsonDict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=None, separators=(",", ":"))
        fh.write("\n")


def _load_manifest(root: Path) -> tuple[ParticipantRecord, ...]:
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise ManifestError(f"missing manifest: {manifest_path}")
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        participants = tuple(
            ParticipantRecord(
                participant_id=p["participant_id"],
                sessions=tuple(
                    SessionRecord(
                        session_id=s["session_id"],
                        date=s["date"],
                        trials=tuple(
                            TrialRecord(
                                trial_id=t["trial_id"],
                                activity=t["activity"],
                                duration_s=float(t["duration_s"]),
                                kinematics_ref=t["kinematics_ref"],
                            )
                            for t in s["trials"]
                        ),
                    )
                    for s in p["sessions"]
                ),
            )
            for p in manifest["participants"]
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ManifestError(f"{manifest_path}: malformed manifest ({exc})") from exc
    _check_manifest_invariants(participants)
    return participants


def _load_trial(root: Path, public: PublicStore, t: TrialRecord) -> GroundTruth | None:
    series = public.kinematics(t.trial_id)  # loads + checks series invariants
    if abs(t.duration_s - series.duration_s) > 1.0 / series.sample_rate_hz:
        raise InvariantError(
            f"trial {t.trial_id}: duration_s {t.duration_s} disagrees with "
            f"frame_count/sample_rate {series.duration_s:.6f} by more than one frame"
        )
    truth_path = root / "privileged" / "truth" / f"{t.trial_id}.json"
    if not truth_path.exists():
        return None
    with open(truth_path) as fh:
        gt = _truth_from_json(json.load(fh), str(truth_path))
    _check_truth_invariants(gt, t.duration_s)
    return gt


def load_store(root: str | Path) -> tuple[PublicStore, PrivilegedStore]:
    """Load both halves of a cohort directory and check every invariant."""
    root = Path(root)
    participants = _load_manifest(root)
    public = PublicStore(participants, root=root)
    truth: dict[str, GroundTruth] = {}
    for p in participants:
        for s in p.sessions:
            for t in s.trials:
                gt = _load_trial(root, public, t)
                if gt is not None:
                    truth[t.trial_id] = gt
    return public, PrivilegedStore(truth)


# ---------------------------------------------------------------------------
# invariants


def _check_manifest_invariants(participants: tuple[ParticipantRecord, ...]) -> None:
    seen_p: set[str] = set()
    for p in participants:
        if not p.participant_id:
            raise InvariantError("empty participant_id")
        if p.participant_id in seen_p:
            raise InvariantError(f"duplicate participant_id {p.participant_id!r}")
        seen_p.add(p.participant_id)
        seen_s: set[str] = set()
        for s in p.sessions:
            if s.session_id in seen_s:
                raise InvariantError(f"{p.participant_id}: duplicate session_id {s.session_id!r}")
            seen_s.add(s.session_id)
            _date.fromisoformat(s.date)  # raises on malformed dates
            if not s.trials:
                raise InvariantError(f"{p.participant_id}/{s.session_id}: session has no trials")
            for t in s.trials:
                if t.duration_s <= 0:
                    raise InvariantError(f"trial {t.trial_id}: non-positive duration")


def _check_series_invariants(series: KinematicSeries, trial_id: str) -> None:
    if series.sample_rate_hz <= 0:
        raise InvariantError(f"trial {trial_id}: sample_rate_hz must be positive")
    if series.angles_deg.ndim != 2 or series.positions_m.ndim != 3:
        raise InvariantError(f"trial {trial_id}: angles must be TxJ and positions TxKx3")
    t = series.angles_deg.shape[0]
    if t < 2:
        raise InvariantError(f"trial {trial_id}: needs at least 2 frames")
    if series.positions_m.shape[0] != t or series.positions_m.shape[2] != 3:
        raise InvariantError(f"trial {trial_id}: positions shape mismatch")
    if series.angles_deg.shape[1] != len(series.joint_names):
        raise InvariantError(f"trial {trial_id}: angle columns != joint_names")
    if series.positions_m.shape[1] != len(series.keypoint_names):
        raise InvariantError(f"trial {trial_id}: position columns != keypoint_names")
    if not np.isfinite(series.angles_deg).all() or not np.isfinite(series.positions_m).all():
        raise InvariantError(f"trial {trial_id}: non-finite values in kinematics")
    for kp in REQUIRED_KEYPOINTS:
        if kp not in series.keypoint_names:
            raise InvariantError(f"trial {trial_id}: missing required keypoint {kp!r}")
    names = set(series.joint_names)
    for name in series.joint_names:
        if name.endswith("_left") and name[: -len("_left")] + "_right" not in names:
            raise InvariantError(f"trial {trial_id}: channel {name!r} has no _right counterpart")
        if name.endswith("_right") and name[: -len("_right")] + "_left" not in names:
            raise InvariantError(f"trial {trial_id}: channel {name!r} has no _left counterpart")


def _check_truth_invariants(gt: GroundTruth, duration_s: float) -> None:
    for label, times in (
        ("left heel strikes", gt.heel_strikes_left),
        ("left toe-offs", gt.toe_offs_left),
        ("right heel strikes", gt.heel_strikes_right),
        ("right toe-offs", gt.toe_offs_right),
    ):
        for a, b in zip(times, times[1:]):
            if not a < b:
                raise InvariantError(f"trial {gt.trial_id}: {label} not strictly increasing")
        if times and (times[0] < 0 or times[-1] > duration_s):
            raise InvariantError(f"trial {gt.trial_id}: {label} outside [0, duration]")
    by_label: dict[str, list[Phase]] = {}
    for ph in gt.phases:
        by_label.setdefault(ph.label, []).append(ph)
    for label, phs in by_label.items():
        phs = sorted(phs, key=lambda p: p.start_s)
        for a, b in zip(phs, phs[1:]):
            if a.end_s > b.start_s + 1e-9:
                raise InvariantError(f"trial {gt.trial_id}: overlapping {label!r} phases")
    if not 0 <= gt.clinical.berg_score <= 56:
        raise InvariantError(f"trial {gt.trial_id}: berg_score outside [0, 56]")
    if gt.clinical.diagnosis not in DIAGNOSES:
        raise InvariantError(f"trial {gt.trial_id}: unknown diagnosis {gt.clinical.diagnosis!r}")


def validate_store(root: str | Path) -> list[tuple[str, str]]:
    """Per-trial invariant report: (trial_id, "ok" | error message)."""
    root = Path(root)
    try:
        participants = _load_manifest(root)
    except StoreError as exc:
        return [("<manifest>", str(exc))]
    public = PublicStore(participants, root=root)
    report: list[tuple[str, str]] = []
    for p in participants:
        for s in p.sessions:
            for t in s.trials:
                try:
                    _load_trial(root, public, t)
                    report.append((t.trial_id, "ok"))
                except StoreError as exc:
                    report.append((t.trial_id, str(exc)))
    return report
