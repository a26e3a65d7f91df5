import os
from pathlib import Path

import pytest

import llcoach

FIXTURES = Path(os.environ.get("LLCOACH_FIXTURE_DIR", Path(__file__).resolve().parents[1] / "fixtures"))


def read(rel):
    return (FIXTURES / rel).read_text()


def test_parse_round_trip():
    text = read("corpus/03_pass_kick.plan")
    canonical = llcoach.parse_plan(text)
    assert llcoach.parse_plan(canonical) == canonical


def test_validate_clean_and_self_join():
    assert llcoach.validate(read("corpus/03_pass_kick.plan"), read("corpus/03_pass_kick.state")) == []
    found = llcoach.validate(read("mutations/01_self_join.plan"), read("mutations/01_self_join.state"))
    assert any(v["kind"] == "SelfJoin" and v["step"] == 2 for v in found)


def test_errors_carry_kind():
    with pytest.raises(llcoach.Error) as info:
        llcoach.parse_plan("fly_away STRIKER {}")
    assert info.value.args[0] == "UnknownAction"


def test_simulate_clear_shot():
    r = llcoach.simulate("kick_to_goal STRIKER {}", "AGENT r1 OWN STRIKER 3.5 0 0\nBALL 3.5 0\n")
    assert r["success"] and r["end_reason"] == "GOAL"
    assert r["scoring_time"] == pytest.approx(0.25, abs=0.05)


def test_evaluate_matches_golden_report():
    report = llcoach.evaluate(str(FIXTURES / "golden/library"), read("golden/scenarios.worlds"))
    assert report == read("golden/report.txt")


def test_generate_replay_matches_library():
    plan = llcoach.generate_replay(read("golden/frame.world"), "golden-001", read("golden/transcript.txt"))
    assert plan == llcoach.parse_plan(read("golden/library/golden-001.plan"))
