"""Every binding is checked against a CLI run on identical serialized inputs."""

import json
import math
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

import csibearing
import csibearing_bindings as bindings
from csibearing import RecordParseError, Scene, arc_trajectory, save_scene, save_trajectory
from csibearing.dataset import record_from_mapping


def run_cli(*args):
    result = subprocess.run(
        [sys.executable, "-m", "csibearing.cli", *map(str, args)],
        capture_output=True,
        text=True,
    )
    return result


@pytest.fixture(scope="module")
def fixture_files(tmp_path_factory):
    """Standard 880-packet fixture, serialized once for both interfaces."""
    root = tmp_path_factory.mktemp("bindings")
    traj = arc_trajectory(duration_s=4.4)
    scene = Scene(np.array([5.0, 3.0, 0.5]), cfo_enabled=True, rng_seed=7)
    save_scene(scene, root / "scene.json")
    save_trajectory(traj, root / "trajectory.json")
    out = run_cli(
        "simulate", root / "scene.json", root / "trajectory.json", "--out", root / "record.json"
    )
    assert out.returncode == 0, out.stderr
    return root


@pytest.fixture(scope="module")
def record_mapping(fixture_files):
    return json.loads((fixture_files / "record.json").read_text())


def test_simulate_binding_matches_cli_record(fixture_files, record_mapping):
    scene = json.loads((fixture_files / "scene.json").read_text())
    trajectory = json.loads((fixture_files / "trajectory.json").read_text())
    assert bindings.simulate_channel(scene, trajectory) == record_mapping


def test_estimate_binding_matches_cli_metrics(fixture_files, record_mapping):
    out_dir = fixture_files / "cli_out"
    result = run_cli(
        "estimate", fixture_files / "record.json", "--threads", 2, "--out", out_dir
    )
    assert result.returncode == 0, result.stderr
    metrics = json.loads((out_dir / "record_profile.json").read_text())

    bound = bindings.estimate_bearing(record_mapping, {"threads": 2})
    assert bound["aoa_deg"]["azimuth"] == pytest.approx(
        metrics["aoa_max"]["azimuth_deg"], abs=1e-9
    )
    assert bound["aoa_deg"]["elevation"] == pytest.approx(
        metrics["aoa_max"]["elevation_deg"], abs=1e-9
    )
    assert bound["variance"] == pytest.approx(metrics["variance"], abs=1e-9)
    assert bound["accepted"] == metrics["accepted"]
    assert [p["rank"] for p in bound["top_n"]] == [p["rank"] for p in metrics["top_n"]]
    for mine, theirs in zip(bound["top_n"], metrics["top_n"]):
        assert mine["azimuth_deg"] == pytest.approx(theirs["azimuth_deg"], abs=1e-9)
        assert mine["magnitude"] == pytest.approx(theirs["magnitude"], rel=1e-9)
    assert tuple(bound["profile_shape"]) == (180, 360)


def test_profile_buffer_matches_cli_bits(fixture_files, record_mapping):
    """The exported CSV uses a round-trippable float format, so the binding's
    flat buffer must reproduce the CLI magnitudes bit for bit."""
    out_dir = fixture_files / "cli_out_bits"
    result = run_cli(
        "estimate", fixture_files / "record.json", "--threads", 2, "--out", out_dir
    )
    assert result.returncode == 0, result.stderr
    csv_lines = (out_dir / "record_profile.csv").read_text().strip().splitlines()
    cli_mags = np.array(
        [[float(v) for v in line.split(",")] for line in csv_lines[1:]]
    ).reshape(-1)

    profile = bindings.compute_profile(record_mapping, {"threads": 2})
    assert isinstance(profile["magnitudes"], np.ndarray)
    assert profile["magnitudes"].ndim == 1
    assert tuple(profile["shape"]) == (180, 360)
    assert np.array_equal(profile["magnitudes"], cli_mags)


def test_profile_metrics_bindings_match_core(record_mapping):
    profile = bindings.compute_profile(
        record_mapping, {"resolution": "90x45", "threads": 2}
    )
    sigma = bindings.profile_variance(profile)
    peaks = bindings.find_peaks(profile, n=3, k_percent=40, alpha_deg=10)

    core_profile, core_est, _ = csibearing.estimate_from_record(
        record_from_mapping(record_mapping), resolution="90x45", threads=2
    )
    assert sigma == pytest.approx(core_est.variance, abs=0)
    core_peaks = csibearing.find_peaks(core_profile, 3, 40, 10)
    assert [p["magnitude"] for p in peaks] == [p.magnitude for p in core_peaks]


def test_localize_binding_matches_cli(tmp_path):
    target = (3.0, 2.0)
    anchors = [(0.0, 0.0), (8.0, 0.0), (4.0, 7.0)]
    rows = [
        {
            "anchor": list(a),
            "bearing_deg": math.degrees(math.atan2(target[1] - a[1], target[0] - a[0])),
            "variance": 0.2,
        }
        for a in anchors
    ]
    path = tmp_path / "bearings.json"
    path.write_text(json.dumps({"observations": rows}))
    result = run_cli("localize", path, "--out", tmp_path / "solution.json")
    assert result.returncode == 0, result.stderr
    cli_solution = json.loads((tmp_path / "solution.json").read_text())

    bound = bindings.localize({"observations": rows})
    assert bound["position"] == pytest.approx(cli_solution["position"], abs=1e-9)
    assert bound["position"] == pytest.approx(target, abs=1e-9)
    assert bound["residual"] == pytest.approx(cli_solution["residual"], abs=1e-12)
    assert bound["used"] == cli_solution["used"] == 3


def test_malformed_mapping_names_missing_field(record_mapping):
    broken = json.loads(json.dumps(record_mapping))
    del broken["csi_packets"]["forward"][0]["counter"]
    with pytest.raises(RecordParseError) as binding_err:
        bindings.estimate_bearing(broken)
    with pytest.raises(RecordParseError) as core_err:
        record_from_mapping(broken)
    # the binding surfaces the core exception verbatim
    assert str(binding_err.value) == str(core_err.value)
    assert "counter: missing" in str(binding_err.value)

    with pytest.raises(RecordParseError, match="unknown keys"):
        bindings.estimate_bearing(record_mapping, {"resolutoin": "90x45"})


def test_core_error_messages_pass_through():
    rows = [{"anchor": [0.0, 0.0], "bearing_deg": 45.0, "variance": 2.0}]
    with pytest.raises(csibearing.InsufficientObservationsError) as binding_err:
        bindings.localize(rows)
    with pytest.raises(csibearing.InsufficientObservationsError) as core_err:
        csibearing.localize(
            [csibearing.BearingObservation(np.zeros(2), math.pi / 4, 2.0)]
        )
    assert str(binding_err.value) == str(core_err.value)


def test_concurrent_calls_match_sequential(record_mapping):
    options = {"resolution": "90x45", "threads": 1}
    sequential = bindings.estimate_bearing(record_mapping, options)
    with ThreadPoolExecutor(max_workers=2) as pool:
        concurrent = list(
            pool.map(lambda _: bindings.estimate_bearing(record_mapping, options), range(2))
        )
    for result in concurrent:
        assert result["aoa_deg"] == sequential["aoa_deg"]
        assert result["variance"] == sequential["variance"]


def test_versions_locked():
    assert bindings.__version__ == csibearing.__version__


def test_criterion_9_binding_parity(fixture_files, record_mapping):
    """Acceptance line for the secondary component: bound estimate equals the
    CLI metrics to 1e-9 on the standard fixture (the individual parity tests
    above cover the full surface)."""
    out_dir = fixture_files / "criterion9"
    result = run_cli(
        "estimate", fixture_files / "record.json", "--threads", 2, "--out", out_dir
    )
    assert result.returncode == 0, result.stderr
    metrics = json.loads((out_dir / "record_profile.json").read_text())
    bound = bindings.estimate_bearing(record_mapping, {"threads": 2})
    ok = (
        abs(bound["aoa_deg"]["azimuth"] - metrics["aoa_max"]["azimuth_deg"]) <= 1e-9
        and abs(bound["variance"] - metrics["variance"]) <= 1e-9
        and bound["accepted"] == metrics["accepted"]
    )
    print(f"[acceptance] criterion 9 binding parity: {'PASS' if ok else 'FAIL'} "
          f"(aoa {bound['aoa_deg']['azimuth']:.6f} deg vs CLI "
          f"{metrics['aoa_max']['azimuth_deg']:.6f} deg)")
    assert ok
