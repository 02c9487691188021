import hashlib
import json

import numpy as np
import pytest

from hysure.cli import bench_seeds, eta_value, main, size_triple
from hysure.core import NoiseModel, read_cube


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def scene(tmp_path, capsys):
    prefix = tmp_path / "sc"
    code, out, _ = run(capsys, "simulate", "--size", "32x32x64", "--rank", "5", "--snr", "35",
                       "--eta", "0.0556", "--seed", "1", "--out", str(prefix))
    assert code == 0
    return prefix


def test_simulate_writes_three_files(scene):
    for suffix in ("_clean.hsr", "_noisy.hsr", ".json"):
        assert (scene.parent / (scene.name + suffix)).exists()
    cube, _ = read_cube(scene.parent / "sc_noisy.hsr")
    assert cube.shape == (32, 32, 64)


def test_simulate_is_deterministic(tmp_path, capsys):
    digests = []
    for name in ("a", "b"):
        run(capsys, "simulate", "--size", "8x8x16", "--rank", "3", "--seed", "5",
            "--out", str(tmp_path / name))
        m = json.loads((tmp_path / f"{name}.json").read_text())
        m.pop("clean"), m.pop("noisy")
        digests.append(hashlib.sha256(json.dumps(m, sort_keys=True).encode()).hexdigest())
    assert digests[0] == digests[1]


@pytest.mark.parametrize("argv", [
    ["simulate", "--rank", "0", "--out", "x"],
    ["simulate", "--size", "8x8", "--out", "x"],
    ["simulate", "--eta", "-1", "--out", "x"],
    ["simulate", "--size", "8x8x4", "--rank", "5", "--out", "x"],
    ["bench", "--ranks", "a,b"],
    ["nosuch"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_argument_types():
    assert eta_value("1/18") == pytest.approx(1 / 18)
    assert eta_value("0.0556") == 0.0556
    assert size_triple("128x128x224") == (128, 128, 224)


def test_rank_json_and_surface(scene, tmp_path, capsys):
    surf = tmp_path / "surf.csv"
    code, out, err = run(capsys, "rank", str(scene.parent / "sc_noisy.hsr"),
                         "--surface", str(surf), "--lambda-steps", "21", "--threads", "2")
    assert code == 0
    rep = json.loads(out)
    assert set(rep) == {"r_hat", "lambda_hat", "sure_min", "ed", "runtime_ms"}
    assert rep["r_hat"] == 5
    assert len(surf.read_text().splitlines()) - 1 == 64 * 21  # ranks 1..min(n, p)
    assert not err.strip().startswith("{")  # JSON only on stdout


def test_rank_csv_and_noise_file(scene, tmp_path, capsys):
    nf = tmp_path / "unit.json"
    NoiseModel.unit(64).save(nf)
    code, out, _ = run(capsys, "rank", str(scene.parent / "sc_noisy.hsr"), "--noise-file", str(nf),
                       "--format", "csv", "--lambda-steps", "11")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "r_hat,lambda_hat,sure_min,ed,runtime_ms" and len(lines) == 2
    NoiseModel.unit(3).save(nf)
    with pytest.raises(SystemExit):
        main(["rank", str(scene.parent / "sc_noisy.hsr"), "--noise-file", str(nf)])


def test_rank_missing_file(tmp_path, capsys, caplog):
    code, out, _ = run(capsys, "rank", str(tmp_path / "missing.hsr"))
    assert code == 1 and out == ""
    assert "missing.hsr" in caplog.text


def test_model_select(scene, tmp_path, capsys):
    curves = tmp_path / "curves.csv"
    code, out, _ = run(capsys, "model-select", str(scene.parent / "sc_noisy.hsr"),
                       "--models", "4,5", "--truth", str(scene.parent / "sc_clean.hsr"),
                       "--curves", str(curves), "--lambda-steps", "11")
    assert code == 0
    rep = json.loads(out)
    assert [m["model"] for m in rep["models"]] == [4, 5]
    assert all("mse" in m for m in rep["models"])
    rows = curves.read_text().splitlines()
    assert rows[0] == "model,r,lambda,sure,mse" and len(rows) == 1 + 2 * 11


def test_model_select_all_models(scene, capsys):
    code, out, _ = run(capsys, "model-select", str(scene.parent / "sc_noisy.hsr"),
                       "--format", "csv", "--lambda-steps", "11")
    assert code == 0
    assert len(out.splitlines()) == 8
    with pytest.raises(SystemExit):
        main(["model-select", str(scene.parent / "sc_noisy.hsr"), "--models", "9"])


def test_noise_est(scene, tmp_path, capsys):
    code, out, _ = run(capsys, "noise-est", str(scene.parent / "sc_noisy.hsr"),
                       "--out", str(tmp_path / "n.json"))
    assert code == 0
    assert len(json.loads(out)) == 64
    assert NoiseModel.load(tmp_path / "n.json").bands == 64


def test_bench_single_trial(tmp_path, capsys):
    out_csv = tmp_path / "t.csv"
    code, out, _ = run(capsys, "bench", "--size", "32x32x64", "--ranks", "3,5", "--snrs", "50",
                       "--trials", "1", "--lambda-steps", "11", "--out", str(out_csv))
    assert code == 0
    rep = json.loads(out)
    assert [c["median_r_hat"] for c in rep["cells"]] == [3.0, 5.0]
    assert all(len(c["r_hats"]) == 1 for c in rep["cells"])
    assert out_csv.read_text().splitlines() == ["snr_db,r=3,r=5", "50.0,3.0,5.0"]


def test_bench_seeds_are_independent():
    s = bench_seeds(0, 36, 10)
    assert s.shape == (36, 10) and len(np.unique(s)) == 360
    assert np.array_equal(s, bench_seeds(0, 36, 10))


def test_threads_env(monkeypatch):
    from hysure.cli import default_threads
    monkeypatch.setenv("HYSURE_THREADS", "3")
    assert default_threads() == 3
