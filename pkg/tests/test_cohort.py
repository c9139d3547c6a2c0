import math

import numpy as np
import pytest

from motion_workbench import cohort
from motion_workbench.cohort import (
    CohortSpec,
    GaitProfile,
    GeneratorError,
    ImpairmentProfile,
    ParticipantSpec,
    SessionSpec,
    TrialSpec,
    generate_cohort,
    generate_trial,
)
from motion_workbench.store import save_store


CONTROL = ImpairmentProfile()


def profile(**kw):
    base = dict(speed_mps=1.2, cadence_spm=120.0, noise_deg=0.5, noise_m=0.005)
    base.update(kw)
    return GaitProfile(**base)


def test_stride_frequency_and_strike_count():
    # cadence 120 steps/min -> 1 stride/s -> 10 left strikes in 10 s (give or take the boundary)
    series, truth = generate_trial(profile(), CONTROL, "overground_walking", 10.0, 100.0, seed=0)
    assert profile().stride_hz == 1.0
    assert len(truth.heel_strikes_left) in (9, 10, 11)
    assert series.frame_count == 1000


def test_net_pelvis_displacement():
    series, _ = generate_trial(profile(), CONTROL, "overground_walking", 10.0, 100.0, seed=0)
    pelvis_x = series.keypoint("pelvis")[:, 0]
    expected = 1.2 * (series.frame_count - 1) / 100.0
    assert pelvis_x[-1] - pelvis_x[0] == pytest.approx(expected, abs=0.05)


def test_symmetric_profile_has_equal_step_lengths():
    _, truth = generate_trial(profile(), CONTROL, "overground_walking", 10.0, 100.0, seed=0)
    left = truth.step_lengths("left")
    right = truth.step_lengths("right")
    assert left and right
    assert np.mean(left) == pytest.approx(np.mean(right), abs=1e-12)


def test_stride_time_matches_cadence_closed_form():
    for cadence in (90.0, 105.0, 120.0):
        _, truth = generate_trial(
            profile(cadence_spm=cadence), CONTROL, "overground_walking", 12.0, 100.0, seed=3
        )
        strides = [s.stride_time_s for s in truth.per_step]
        assert np.mean(strides) == pytest.approx(120.0 / cadence, abs=1e-9)


def test_speed_consistency_closed_form():
    _, truth = generate_trial(profile(speed_mps=0.9), CONTROL, "overground_walking", 12.0, 100.0, seed=3)
    mean_step = np.mean([s.step_length_m for s in truth.per_step])
    mean_stride = np.mean([s.stride_time_s for s in truth.per_step])
    # two steps per stride: 2 * mean step / stride time ~ speed
    assert 2 * mean_step / mean_stride == pytest.approx(0.9, rel=0.02)


def test_impairment_reduces_affected_rom():
    imp = ImpairmentProfile(kind="stroke", affected_side="left", rom_scale=0.6, berg_score=40)
    eff = cohort.apply_impairment(profile(), imp)
    for joint in cohort.JOINTS:
        assert eff.rom_deg[joint]["left"] < eff.rom_deg[joint]["right"]
    assert eff.amp_fwd_m["left"] < eff.amp_fwd_m["right"]


def test_prosthesis_scaling_is_joint_specific():
    tt = cohort.apply_impairment(
        profile(),
        ImpairmentProfile(
            kind="prosthesis", affected_side="right", rom_scale=0.7, amputation_level="transtibial", berg_score=45
        ),
    )
    assert tt.rom_deg["ankle_flexion"]["right"] < tt.rom_deg["ankle_flexion"]["left"]
    assert tt.rom_deg["knee_flexion"]["right"] == tt.rom_deg["knee_flexion"]["left"]
    tf = cohort.apply_impairment(
        profile(),
        ImpairmentProfile(
            kind="prosthesis", affected_side="right", rom_scale=0.7, amputation_level="transfemoral", berg_score=45
        ),
    )
    assert tf.rom_deg["knee_flexion"]["right"] < tf.rom_deg["knee_flexion"]["left"]


def test_control_invariant_enforced():
    with pytest.raises(ValueError):
        ImpairmentProfile(kind="control", rom_scale=0.8)


def test_event_alternation_per_side():
    _, truth = generate_trial(profile(), CONTROL, "overground_walking", 10.0, 100.0, seed=5)
    for side in ("left", "right"):
        strikes = truth.heel_strikes(side)
        offs = truth.toe_offs(side)
        merged = sorted([(t, "hs") for t in strikes] + [(t, "to") for t in offs])
        kinds = [k for _, k in merged]
        for a, b in zip(kinds, kinds[1:]):
            assert a != b, f"consecutive {a} events on {side}"


def test_events_within_duration_and_increasing():
    _, truth = generate_trial(profile(), CONTROL, "overground_walking", 10.0, 100.0, seed=5)
    for times in (truth.heel_strikes_left, truth.toe_offs_left, truth.heel_strikes_right, truth.toe_offs_right):
        assert all(a < b for a, b in zip(times, times[1:]))
        assert times[0] >= 0 and times[-1] <= 10.0


def test_duration_too_short():
    with pytest.raises(GeneratorError):
        generate_trial(profile(cadence_spm=70.0), CONTROL, "overground_walking", 2.0, 100.0, seed=0)
    with pytest.raises(GeneratorError):
        generate_trial(profile(), CONTROL, "overground_walking", 10.0, 0.0, seed=0)


def test_backward_walking_reverses_displacement_and_ankle_phase():
    fwd, _ = generate_trial(profile(noise_deg=0.0, noise_m=0.0), CONTROL, "overground_walking", 10.0, 100.0, seed=0)
    bwd, _ = generate_trial(profile(noise_deg=0.0, noise_m=0.0), CONTROL, "backward_walking", 10.0, 100.0, seed=0)
    assert bwd.keypoint("pelvis")[-1, 0] < 0 < fwd.keypoint("pelvis")[-1, 0]

    def corr(series):
        hip = series.joint("hip_flexion_left") - np.mean(series.joint("hip_flexion_left"))
        ankle = series.joint("ankle_flexion_left") - np.mean(series.joint("ankle_flexion_left"))
        return float(np.mean(hip * ankle))

    assert corr(fwd) > 0 > corr(bwd)


def test_tug_phases_cover_trial():
    series, truth = generate_trial(profile(), CONTROL, "tug", 12.0, 100.0, seed=1)
    labels = [p.label for p in truth.phases]
    assert labels == ["sit", "rise", "walk", "turn", "return"]
    assert truth.phases[0].start_s == 0.0
    assert truth.phases[-1].end_s == pytest.approx(series.duration_s)
    # seated pelvis low, standing pelvis high
    z = series.keypoint("pelvis")[:, 2]
    assert z[:150].mean() < 0.65 < z[-150:].mean()


def test_sit_to_stand_has_no_gait_events():
    _, truth = generate_trial(profile(), CONTROL, "sit_to_stand", 6.0, 100.0, seed=1)
    assert truth.heel_strikes_left == [] and truth.heel_strikes_right == []
    assert [p.label for p in truth.phases] == ["sit", "rise", "stand"]


def test_wheelchair_has_push_phases_and_no_events():
    _, truth = generate_trial(profile(), CONTROL, "wheelchair_propulsion", 10.0, 100.0, seed=1)
    assert truth.heel_strikes_left == []
    pushes = [p for p in truth.phases if p.label == "push"]
    assert len(pushes) == 7  # 1.5 s cycle over 10 s


def test_hurdle_trial_raises_peak_hip_flexion():
    plain, _ = generate_trial(profile(), CONTROL, "overground_walking", 10.0, 100.0, seed=2)
    hurdle, truth = generate_trial(profile(), CONTROL, "overground_walking", 10.0, 100.0, seed=2, hurdle=True)
    assert hurdle.joint("hip_flexion_left").max() > plain.joint("hip_flexion_left").max() + 10.0
    assert any(p.label == "hurdle" for p in truth.phases)


def test_cohort_deterministic_byte_identical(tmp_path):
    spec = cohort.example_cohort_spec(seed=7)
    for name in ("a", "b"):
        public, priv = generate_cohort(spec)
        save_store(public, priv, tmp_path / name)
    files_a = sorted((tmp_path / "a").rglob("*.json"))
    files_b = sorted((tmp_path / "b").rglob("*.json"))
    assert [f.relative_to(tmp_path / "a") for f in files_a] == [
        f.relative_to(tmp_path / "b") for f in files_b
    ]
    for fa, fb in zip(files_a, files_b):
        assert fa.read_bytes() == fb.read_bytes()


def test_seed_changes_noise_but_not_truth():
    spec_a = cohort.example_cohort_spec(seed=7)
    spec_b = cohort.example_cohort_spec(seed=8)
    pub_a, priv_a = generate_cohort(spec_a)
    pub_b, priv_b = generate_cohort(spec_b)
    tid = "P1-S1-T01"
    assert not np.array_equal(pub_a.kinematics(tid).angles_deg, pub_b.kinematics(tid).angles_deg)
    assert priv_a.truth(tid) == priv_b.truth(tid)


def test_single_stroke_participant_labels():
    spec = CohortSpec(
        participants=[
            ParticipantSpec(
                participant_id="C",
                impairment=ImpairmentProfile(),
                base_profile=profile(),
                sessions=[SessionSpec("2024-01-01", [TrialSpec("overground_walking", 10.0)])],
            ),
            ParticipantSpec(
                participant_id="S",
                impairment=ImpairmentProfile(kind="stroke", affected_side="left", rom_scale=0.6, berg_score=40),
                base_profile=profile(),
                sessions=[SessionSpec("2024-01-02", [TrialSpec("overground_walking", 10.0)])],
            ),
        ],
        seed=3,
    )
    _, priv = generate_cohort(spec)
    diagnoses = [priv.truth(t).clinical.diagnosis for t in priv.trial_ids()]
    assert diagnoses.count("stroke") == 1


def test_cohort_spec_json_roundtrip():
    spec = cohort.benchmark_cohort_spec(seed=11)
    doc = cohort.cohort_spec_to_json(spec)
    back = cohort.cohort_spec_from_json(doc)
    assert cohort.cohort_spec_to_json(back) == doc
