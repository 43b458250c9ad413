import json

import pytest

import wristlink


def test_theory():
    assert wristlink.beta(1.0, 1.0, 4) == 1.0
    assert wristlink.beta(0.9, 0.9, 4) == pytest.approx(0.81 + 0.01 / 3)
    assert wristlink.binom_tail(2, 1, 0.5) == pytest.approx(0.75)
    assert wristlink.log10_mu(0.9, 0.9, 4, 0.25, 100, 90) >= 30
    assert wristlink.dtheta_dalpha(0.25, 4) == 0.0
    assert wristlink.prefers_attack(0.25, 0.9, 0.9, 4)


def test_simulation_matches_formula():
    s = wristlink.simulate_exam(0.9, 0.9, 4, 50, 35, trials=20000, seed=3)
    assert abs(s["estimate"] - s["formula"]) <= 3 * s["standard_error"]


def test_errors_carry_codes():
    with pytest.raises(wristlink.WristlinkError) as info:
        wristlink.beta(0.5, 0.5, 1)
    assert info.value.code == "InvalidOptions"
    with pytest.raises(ValueError):
        wristlink.audible_distance(300.0)


def test_signal_and_features():
    t = wristlink.synth_symbol(1, "A", seed=7, noiseless=True)
    assert len(t["x"]) == len(t["t"]) > 8
    assert t == wristlink.synth_symbol(1, "A", seed=7, noiseless=True)
    fv = wristlink.extract_features(2, "B", seed=1)
    assert len(fv) == 96 == len(wristlink.feature_names())


def test_channels():
    events = wristlink.encode_haptic(["C", "A", "B"])
    assert len(events) == 6
    assert events[0] == (0.0, 200.0, 70.0)
    assert wristlink.decode_haptic(events) == ["C", "A", "B"]
    assert wristlink.audible_distance(70.0, "wrist") == 0.5
    svg = wristlink.render_clock(["B"], 1)
    assert svg.count('fill="green"') == 1
    page = wristlink.clock_page(["A"] * 13, 13)
    assert page["page_index"] == 2


def test_pipeline(tmp_path):
    report = wristlink.run_pipeline({"profiles": 1, "answers": 4, "noiseless": True}, str(tmp_path))
    assert report["profiles"][0]["accuracy_logreg"] == 1.0
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk == report


def test_clustering():
    c = wristlink.cluster_symbols(1)
    assert len(c["clusters"]) == 4
    assert len(c["selected"]) == 4
