"""End-to-end tests of the command-line interface via ``main(argv)``."""

import json
import math
import os

import numpy as np
import pytest

from wstatekit import pgm, state
from wstatekit.cli import main

# Small geometry keeps the render/retrieve chain fast: 8 spots on a
# 64-pixel grid, 3-waist margins intact.
SMALL = ["--grid", "64", "--spacing", "6", "--waist", "2"]


@pytest.fixture(scope="module")
def rendered_pair(tmp_path_factory):
    """State file plus a rendered coherent image pair on the small grid."""
    root = tmp_path_factory.mktemp("cli_pair")
    state_path = str(root / "state.json")
    prefix = str(root / "img")
    assert main(["simulate", "--depth", "3", "--out", state_path]) == 0
    assert main(["render", "--state", state_path, "--out", prefix] + SMALL) == 0
    return state_path, prefix + "_real.pgm", prefix + "_fourier.pgm"


def test_simulate_stdout_is_the_ideal_state(capsys):
    assert main(["simulate", "--depth", "3"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["n_modes"] == 8
    expected = 1.0 / math.sqrt(8)
    assert all(abs(a - expected) < 1e-12 for a in payload["amplitudes"])
    assert payload["phases_rad"] == [0.0] * 8


def test_simulate_out_file_round_trips(tmp_path):
    path = str(tmp_path / "state.json")
    assert main(["simulate", "--depth", "2", "--out", path]) == 0
    loaded = state.load_state(path)
    assert loaded.n_modes == 4
    assert np.allclose(loaded.amplitudes, 0.5, atol=1e-12)


def test_simulate_splitter_override(capsys):
    rc = main(["simulate", "--depth", "1", "--splitter", "0:0=0.3,0.1,0.2"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert abs(payload["amplitudes"][0] - math.sqrt(0.3)) < 1e-12
    assert abs(payload["amplitudes"][1] - math.sqrt(0.7)) < 1e-12
    assert abs(payload["phases_rad"][0] - 0.1) < 1e-12
    assert abs(payload["phases_rad"][1] - 0.2) < 1e-12


def test_simulate_rejects_bad_depth(capsys):
    assert main(["simulate", "--depth", "7"]) == 2
    assert "error:" in capsys.readouterr().err


def test_simulate_rejects_missing_node(capsys):
    rc = main(["simulate", "--depth", "1", "--splitter", "1:0=0.4"])
    assert rc == 2
    assert "does not exist" in capsys.readouterr().err


def test_simulate_rejects_malformed_override(capsys):
    rc = main(["simulate", "--depth", "1", "--splitter", "0:0"])
    assert rc == 2
    assert "splitter override" in capsys.readouterr().err


def test_render_writes_pair_with_sidecars(rendered_pair):
    _, real_path, fourier_path = rendered_pair
    for path in (real_path, fourier_path):
        assert os.path.exists(path)
        assert os.path.exists(pgm.sidecar_path(path))
        image = pgm.read_pgm(path)
        assert image.values.shape == (64, 64)
        assert image.values.max() > 0.0


def test_retrieve_report_layout(rendered_pair, tmp_path):
    _, real_path, fourier_path = rendered_pair
    out = str(tmp_path / "retrieved.json")
    rc = main([
        "retrieve", real_path, fourier_path,
        "--modes", "8", "--spacing", "6", "--waist", "2",
        "--iters", "60", "--restarts", "1", "--out", out,
    ])
    assert rc == 0
    with open(out, "r", encoding="ascii") as fh:
        payload = json.load(fh)
    assert set(payload) == {
        "amplitudes", "phases_rad", "iterations", "final_error",
        "converged", "seed", "twin_used",
    }
    assert len(payload["amplitudes"]) == 8
    assert len(payload["phases_rad"]) == 8
    assert payload["iterations"] <= 60
    assert payload["final_error"] >= 0.0
    assert payload["twin_used"] is False


def test_retrieve_with_reference_state(rendered_pair, tmp_path, capsys):
    state_path, real_path, fourier_path = rendered_pair
    rc = main([
        "retrieve", real_path, fourier_path,
        "--modes", "8", "--spacing", "6", "--waist", "2",
        "--iters", "400", "--restarts", "2", "--reference", state_path,
    ])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    # Coherent equal-amplitude state: every mode near 1/sqrt(8).
    assert np.allclose(payload["amplitudes"], 1.0 / math.sqrt(8), atol=0.02)


def test_compare_image_with_itself(rendered_pair, capsys):
    _, real_path, _ = rendered_pair
    assert main(["compare", real_path, real_path]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["ssim"] == 1.0
    assert abs(payload["ncc"] - 1.0) < 1e-12
    assert payload["visibility_a"] is None
    assert payload["visibility_b"] is None
    assert payload["p_hat"] is None


def test_compare_requires_both_templates(rendered_pair, capsys):
    _, real_path, _ = rendered_pair
    rc = main(["compare", real_path, real_path, "--coh", real_path])
    assert rc == 2
    assert "together" in capsys.readouterr().err


def test_witness_feasible_region_exits_zero(tmp_path):
    out = str(tmp_path / "certificate.json")
    rc = main(["witness", "--p-min", "0.7", "--q-max", "0.2", "--out", out])
    assert rc == 0
    with open(out, "r", encoding="ascii") as fh:
        payload = json.load(fh)
    assert payload["feasible"] is True
    assert payload["margin"] < -1e-9


def test_witness_infeasible_region_exits_three(capsys):
    rc = main(["witness", "--p-min", "0.0", "--q-max", "0.0"])
    assert rc == 3
    payload = json.loads(capsys.readouterr().out)
    assert payload["feasible"] is False


def test_report_from_retrieval_json(rendered_pair, tmp_path, capsys):
    _, real_path, fourier_path = rendered_pair
    retrieval_path = str(tmp_path / "retrieved.json")
    with open(retrieval_path, "w", encoding="ascii") as fh:
        json.dump({
            "amplitudes": [1.0 / math.sqrt(8)] * 8,
            "phases_rad": [0.0] * 8,
        }, fh)
    out_dir = str(tmp_path / "figures")
    rc = main([
        "report", "--retrieval", retrieval_path,
        "--real", real_path, "--fourier", fourier_path,
        "--modes", "8", "--spacing", "6", "--waist", "2",
        "--out-dir", out_dir,
    ])
    assert rc == 0
    written = json.loads(capsys.readouterr().out)["written"]
    assert written, "report produced no files"
    suffixes = {os.path.splitext(path)[1] for path in written}
    assert ".png" in suffixes and ".csv" in suffixes
    for path in written:
        assert os.path.exists(path)
        if path.endswith(".png"):
            with open(path, "rb") as fh:
                assert fh.read(8) == b"\x89PNG\r\n\x1a\n"


def test_report_with_nothing_to_do(tmp_path, capsys):
    rc = main(["report", "--out-dir", str(tmp_path / "empty")])
    assert rc == 2
    assert "nothing to report" in capsys.readouterr().err


def test_report_rejects_malformed_retrieval_json(tmp_path, capsys):
    path = str(tmp_path / "broken.json")
    with open(path, "w", encoding="ascii") as fh:
        json.dump({"amplitudes": [0.5]}, fh)
    rc = main(["report", "--retrieval", path, "--out-dir", str(tmp_path / "figs")])
    assert rc == 2
    assert "malformed" in capsys.readouterr().err


def test_missing_subcommand_is_a_usage_error(capsys):
    assert main([]) == 2
    capsys.readouterr()


def test_unknown_flag_is_a_usage_error(capsys):
    assert main(["simulate", "--bogus"]) == 2
    capsys.readouterr()
