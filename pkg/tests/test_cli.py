import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from dualbeam.cli import main
from dualbeam.profile import read_pgm, render_intensity, write_pgm
from dualbeam.beam import AstigmaticBeam

DATA = Path(__file__).parent / "data"
SPIKES = str(DATA / "null_unit_spikes.txt")
PULSES = str(DATA / "null_unit_pulses.csv")


def run(argv, capsys):
    rc = main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_pathway_blue(capsys):
    rc, out, _ = run(["pathway", "--preset", "blue-PL450B", "--min-power-mw", "0.1"], capsys)
    assert rc == 0
    rep = json.loads(out)
    assert rep["pathway_mm"] == pytest.approx(8.19, rel=0.2)
    assert rep["margin"] == pytest.approx(rep["pathway_mm"] - 2.90)
    assert rep["scenario"]["laser"]["label"] == "PL450B"
    assert rep["scenario"]["fiber"]["acceptance_na"] is None


def test_pathway_infeasible(capsys):
    rc, _, err = run(["pathway", "--preset", "red-HL63603TG", "--min-power-mw", "40"], capsys)
    assert rc == 3
    assert "infeasible" in err


def test_pathway_beyond_limit(capsys):
    rc, out, _ = run(["pathway", "--preset", "red-HL63603TG", "--min-power-mw", "0.001",
                      "--core-radius-um", "20000"], capsys)
    assert rc == 0
    assert json.loads(out)["pathway_mm"] == ">100 mm"


def test_curve_csv(capsys):
    rc, out, _ = run(["curve", "--preset", "red-HL63603TG", "--from-mm", "0.46", "--to-mm", "2", "--steps", "5"],
                     capsys)
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "pathway_mm,power_mW"
    vals = np.array([[float(v) for v in l.split(",")] for l in lines[1:]])
    assert vals.shape == (5, 2)
    assert vals[0, 0] == pytest.approx(0.46)
    assert np.all(np.diff(vals[:, 1]) < 0)


def test_curve_out_of_range(capsys):
    rc, _, _ = run(["curve", "--preset", "red-HL63603TG", "--from-mm", "0.1", "--to-mm", "2"], capsys)
    assert rc == 2


def test_corners(capsys):
    rc, out, _ = run(["corners", "--preset", "red-HL63603TG", "--pathway-mm", "1.0"], capsys)
    rep = json.loads(out)
    assert rc == 0 and rep["n_corners"] == 81 and len(rep["corners"]) == 81
    assert rep["worst"]["theta1"] == "max"


def test_scenario_file(capsys):
    rc, out, _ = run(["montecarlo", "--scenario", str(DATA / "red_offset.yaml")], capsys)
    rep = json.loads(out)
    assert rc == 0
    assert rep["seed"] == 17 and rep["n"] == 200 and rep["pathway_mm"] == 1.2
    assert rep["scenario"]["scenario"]["offset_um"] == [10, 10]


def test_scenario_unknown_key(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("laser: blue-PL450B\nfiber: {core_radius_um: 25, colour: blue}\n")
    rc, _, err = run(["pathway", "--scenario", str(p)], capsys)
    assert rc == 2
    assert "fiber" in err


def test_seed_env_fallback(monkeypatch, capsys):
    monkeypatch.setenv("DUALBEAM_SEED", "42")
    rc, out, _ = run(["montecarlo", "--preset", "red-HL63603TG", "--n", "100"], capsys)
    assert json.loads(out)["seed"] == 42
    rc, out, _ = run(["montecarlo", "--preset", "red-HL63603TG", "--n", "100", "--seed", "3"], capsys)
    assert json.loads(out)["seed"] == 3


def test_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["pathway", "--preset", "green"])
    assert e.value.code == 2


@pytest.mark.parametrize("jobs", ["1", "8"])
def test_montecarlo_byte_identical(tmp_path, jobs):
    ref_json, ref_csv = tmp_path / "ref.json", tmp_path / "ref.csv"
    base = ["montecarlo", "--preset", "blue-PL450B", "--n", "300", "--seed", "9", "--pathway-mm", "5"]
    assert main(base + ["--jobs", "1", "--out", str(ref_json), "--samples-csv", str(ref_csv)]) == 0
    out_json, out_csv = tmp_path / "o.json", tmp_path / "o.csv"
    assert main(base + ["--jobs", jobs, "--out", str(out_json), "--samples-csv", str(out_csv)]) == 0
    assert out_json.read_bytes() == ref_json.read_bytes()
    assert out_csv.read_bytes() == ref_csv.read_bytes()
    assert len(out_csv.read_text().splitlines()) == 301


def test_tag_fixture_untagged(tmp_path, capsys):
    psth_csv = tmp_path / "psth.csv"
    rc, out, _ = run(["tag", "--spikes", SPIKES, "--pulses", PULSES, "--session", "0", "600",
                      "--psth-out", str(psth_csv)], capsys)
    rep = json.loads(out)
    assert rc == 0
    assert rep["class"] == "untagged"
    assert rep["p_value"] >= 0.01
    assert rep["n_pulses"] == 600
    lines = psth_csv.read_text().splitlines()
    assert lines[0] == "bin_start_s,bin_end_s,count,rate_hz"
    assert len(lines) == 31


def test_tag_byte_identical(tmp_path):
    outs = []
    for jobs in ("1", "8"):
        j, c = tmp_path / f"t{jobs}.json", tmp_path / f"p{jobs}.csv"
        assert main(["tag", "--spikes", SPIKES, "--pulses", PULSES, "--session", "0", "600", "--seed", "1",
                     "--jobs", jobs, "--out", str(j), "--psth-out", str(c)]) == 0
        outs.append((j.read_bytes(), c.read_bytes()))
    assert outs[0] == outs[1]


def test_protocol_square(capsys):
    rc, out, _ = run(["protocol", "square", "--period-s", "3", "--duty", "0.2", "--ma", "100", "--cycles", "30"],
                     capsys)
    lines = out.splitlines()
    assert rc == 0 and lines[0] == "onset_s,duration_s,amplitude_mA" and len(lines) == 31


def test_protocol_safety(capsys):
    rc, _, err = run(["protocol", "square", "--period-s", "3", "--duty", "0.2", "--ma", "120", "--cycles", "3"],
                     capsys)
    assert rc == 5 and "safety" in err
    rc, _, err = run(["protocol", "ladder", "--i-max", "29"], capsys)
    assert rc == 5 and "116" in err


def test_protocol_chirp_render(tmp_path, capsys):
    raw = tmp_path / "chirp.f32"
    rc, out, _ = run(["protocol", "chirp", "--f0", "0", "--f-end", "100", "--duration-s", "20", "--duty", "0.5",
                      "--ma", "29", "--render", "24414", "--render-out", str(raw)], capsys)
    assert rc == 0
    assert len(out.splitlines()) == 1001
    samples = np.fromfile(raw, dtype="<f4")
    assert len(samples) == 20 * 24414
    assert set(np.unique(samples)) == {0.0, 29.0}


def test_overlap(tmp_path, capsys):
    lam = 500e-9
    b1 = AstigmaticBeam(lam, 1.0, 1j * np.pi * 20e-6 ** 2 / lam, 1j * np.pi * 20e-6 ** 2 / lam, 1.0, 1.0)
    img = render_intensity(b1, 60, 60, 1e-6).values
    img = img / img.max() * 60000
    rng = np.random.default_rng(1)
    a = img + rng.normal(100, 10, img.shape).clip(0)
    write_pgm(tmp_path / "a.pgm", a)
    np.savetxt(tmp_path / "b.txt", a)
    rc, out, _ = run(["overlap", str(tmp_path / "a.pgm"), str(tmp_path / "b.txt"),
                      "--mask-a", str(tmp_path / "ma.pgm")], capsys)
    rep = json.loads(out)
    assert rc == 0
    # the PGM round-trip rounds values, so allow a few threshold-edge pixels to differ
    assert rep["iou"] > 0.98 and rep["area_a"] > 0
    assert set(np.unique(read_pgm(tmp_path / "ma.pgm"))) <= {0.0, 65535.0}


def test_overlap_constant_border(tmp_path, capsys):
    np.savetxt(tmp_path / "flat.txt", np.ones((20, 20)))
    rc, _, err = run(["overlap", str(tmp_path / "flat.txt"), str(tmp_path / "flat.txt")], capsys)
    assert rc == 2


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "dualbeam", "protocol", "square", "--cycles", "2"],
                       capture_output=True, text=True, check=True)
    assert r.stdout.splitlines()[1] == "0.0,0.5,100.0"
