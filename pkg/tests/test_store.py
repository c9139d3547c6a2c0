import json
import random
from datetime import date

import numpy as np
import pytest

from motion_workbench import cohort, store
from motion_workbench.store import (
    BundleError,
    InvariantError,
    ManifestError,
    TrialFilter,
    UnknownTrialError,
    fetch_kinematics,
    load_store,
    query_trials,
    save_store,
    summarize_participant,
    validate_store,
)


@pytest.fixture(scope="module")
def example_stores():
    return cohort.generate_cohort(cohort.example_cohort_spec(seed=7))


@pytest.fixture()
def saved_root(tmp_path, example_stores):
    public, privileged = example_stores
    return save_store(public, privileged, tmp_path / "cohort")


def brute_force_scan(public, flt):
    """Independent linear scan the query implementation is checked against."""
    rows = []
    for p in public.participants:
        for s in p.sessions:
            for t in s.trials:
                if flt.participant_id is not None and p.participant_id != flt.participant_id:
                    continue
                if flt.session_id is not None and s.session_id != flt.session_id:
                    continue
                if flt.activity is not None and t.activity != flt.activity:
                    continue
                if flt.date_range is not None and not (flt.date_range[0] <= s.date <= flt.date_range[1]):
                    continue
                rows.append((p.participant_id, s.date, t.trial_id))
    return sorted(rows)


def test_empty_cohort_roundtrip(tmp_path):
    root = tmp_path / "empty"
    root.mkdir()
    (root / "manifest.json").write_text(json.dumps({"participants": []}))
    public, privileged = load_store(root)
    assert public.participants == ()
    assert privileged.trial_ids() == []


def test_roundtrip_reproduces_stores(saved_root, example_stores):
    public, privileged = example_stores
    loaded_public, loaded_priv = load_store(saved_root)
    assert loaded_public.participants == public.participants
    assert loaded_priv.trial_ids() == privileged.trial_ids()
    for tid in public.trial_ids():
        a = public.kinematics(tid)
        b = loaded_public.kinematics(tid)
        assert a.joint_names == b.joint_names
        assert a.keypoint_names == b.keypoint_names
        assert np.array_equal(a.angles_deg, b.angles_deg)
        assert np.array_equal(a.positions_m, b.positions_m)
        assert loaded_priv.truth(tid) == privileged.truth(tid)


def test_load_rejects_nan_angles(saved_root):
    trial_file = next((saved_root / "public" / "trials").iterdir())
    doc = json.loads(trial_file.read_text())
    doc["angles_deg"][0][0] = float("nan")
    trial_file.write_text(json.dumps(doc).replace("NaN", "NaN"))
    with pytest.raises((InvariantError, BundleError)) as err:
        load_store(saved_root)
    assert trial_file.stem in str(err.value)


def test_missing_manifest(tmp_path):
    with pytest.raises(ManifestError):
        load_store(tmp_path)


def test_query_by_participant(example_stores):
    public, _ = example_stores
    res = query_trials(public, TrialFilter(participant_id="P1"))
    assert res.found
    assert len(res.trials) == 6  # P1 has 6 trials in the example cohort spec


def test_query_no_matches_vs_not_found(example_stores):
    public, _ = example_stores
    res = query_trials(public, TrialFilter(participant_id="P1", activity="wheelchair_propulsion"))
    assert res.found and res.trials == []
    res = query_trials(public, TrialFilter(participant_id="nonexistent"))
    assert not res.found and res.trials == []


def test_query_matches_brute_force_scan(example_stores):
    public, _ = example_stores
    rng = random.Random(1234)
    pids = public.participant_ids() + ["nope"]
    activities = list(cohort.ACTIVITIES) + [None, None]
    sessions = ["S1", "S2", None, None]
    dates = [None, ("2024-01-01", "2024-03-31"), ("2024-02-01", "2024-02-28")]
    for _ in range(1000):
        flt = TrialFilter(
            participant_id=rng.choice(pids + [None, None]),
            activity=rng.choice(activities),
            session_id=rng.choice(sessions),
            date_range=rng.choice(dates),
        )
        got = query_trials(public, flt)
        expected = brute_force_scan(public, flt)
        assert [(r.participant_id, r.date, r.trial_id) for r in got.trials] == expected


def test_query_stable_order(example_stores):
    public, _ = example_stores
    res = query_trials(public, TrialFilter())
    keys = [(r.participant_id, r.date, r.trial_id) for r in res.trials]
    assert keys == sorted(keys)


def test_fetch_kinematics_dimensions(example_stores):
    public, _ = example_stores
    series = fetch_kinematics(public, "P1-S1-T01")  # 10 s at 100 Hz
    assert series.frame_count == 1000
    assert series.angles_deg.shape == (1000, 6)
    assert series.positions_m.shape == (1000, 5, 3)


def test_fetch_twice_is_identical_and_readonly(saved_root):
    public, _ = load_store(saved_root)
    a = fetch_kinematics(public, "P1-S1-T01")
    b = fetch_kinematics(public, "P1-S1-T01")
    assert np.array_equal(a.angles_deg, b.angles_deg)
    assert np.array_equal(a.positions_m, b.positions_m)
    with pytest.raises(ValueError):
        a.angles_deg[0, 0] = 1.0


def test_fetch_unknown_trial(example_stores):
    public, _ = example_stores
    with pytest.raises(UnknownTrialError) as err:
        fetch_kinematics(public, "bogus-id")
    assert "bogus-id" in str(err.value)


def test_summarize_single_session():
    spec = cohort.CohortSpec(
        participants=[
            cohort.ParticipantSpec(
                participant_id="X",
                impairment=cohort.ImpairmentProfile(),
                base_profile=cohort.GaitProfile(speed_mps=1.0, cadence_spm=100.0),
                sessions=[
                    cohort.SessionSpec(
                        date="2024-05-01",
                        trials=[cohort.TrialSpec("overground_walking", 10.0)] * 3,
                    )
                ],
            )
        ],
        seed=1,
    )
    public, _ = cohort.generate_cohort(spec)
    summary = summarize_participant(public, "X")
    assert summary.trial_count == 3
    assert summary.session_count == 1
    assert summary.activities == {"overground_walking": 3}
    assert summary.date_span_days == 0


def test_summarize_date_span(example_stores):
    public, _ = example_stores
    # P1 sessions on 2024-01-01 and 2024-01-08
    assert summarize_participant(public, "P1").date_span_days == 7


def test_summarize_matches_manifest_recount(saved_root):
    public, _ = load_store(saved_root)
    manifest = json.loads((saved_root / "manifest.json").read_text())
    for pdoc in manifest["participants"]:
        trials = [t for s in pdoc["sessions"] for t in s["trials"]]
        acts = {}
        for t in trials:
            acts[t["activity"]] = acts.get(t["activity"], 0) + 1
        dates = sorted(date.fromisoformat(s["date"]) for s in pdoc["sessions"])
        got = summarize_participant(public, pdoc["participant_id"])
        assert got.trial_count == len(trials)
        assert got.session_count == len(pdoc["sessions"])
        assert got.activities == acts
        expected_span = (dates[-1] - dates[0]).days if len(dates) > 1 else 0
        assert got.date_span_days == expected_span


def test_validate_store_reports_per_trial(saved_root):
    report = validate_store(saved_root)
    assert all(status == "ok" for _, status in report)
    trial_file = saved_root / "public" / "trials" / "P1-S1-T01.json"
    doc = json.loads(trial_file.read_text())
    doc["angles_deg"][0][0] = None
    trial_file.write_text(json.dumps(doc))
    report = dict(validate_store(saved_root))
    assert report["P1-S1-T01"] != "ok"
    assert report["P1-S1-T02"] == "ok"
