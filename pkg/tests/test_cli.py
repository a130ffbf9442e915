import numpy as np
import pytest

from labelloop import glasso
from labelloop.cli import main

RUN_SMALL = [
    "run",
    "--dataset",
    "synth:text",
    "--budget",
    "10",
    "--eval-every",
    "10",
    "--synth-n",
    "200",
    "--seeds",
    "1",
]


def test_run_writes_curve_csv(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    assert main(RUN_SMALL + ["--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "seed,iteration,test_acc,label_acc,coverage,n_lfs_selected,tau"
    assert len(lines) == 2
    assert "mean over 1 seeds" in capsys.readouterr().out


def test_run_mode_al(tmp_path):
    out = tmp_path / "al.csv"
    args = [a for a in RUN_SMALL]
    assert main(args + ["--mode", "al", "--out", str(out)]) == 0
    assert out.read_text().count("\n") == 2


def test_run_rejects_unknown_mode(tmp_path):
    with pytest.raises(SystemExit):
        main(RUN_SMALL + ["--mode", "everything", "--out", str(tmp_path / "x.csv")])


def test_missing_dataset_file_exits_2(tmp_path, capsys):
    code = main(
        [
            "run",
            "--dataset",
            str(tmp_path / "nope.jsonl"),
            "--budget",
            "5",
            "--eval-every",
            "5",
            "--seeds",
            "1",
            "--out",
            str(tmp_path / "x.csv"),
        ]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_bad_config_exits_2(tmp_path, capsys):
    code = main(RUN_SMALL + ["--noise", "1.5", "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "noise" in capsys.readouterr().err


def test_ablate_csv_shape(tmp_path):
    out = tmp_path / "abl.csv"
    args = ["ablate"] + RUN_SMALL[1:]
    assert main(args + ["--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "mode,seed_0,mean"
    assert [ln.split(",")[0] for ln in lines[1:]] == [
        "activedp",
        "baseline",
        "labelpick",
        "confusion",
    ]


def test_glasso_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    A = rng.normal(size=(4, 4))
    S = A @ A.T + 4 * np.eye(4)
    src = tmp_path / "cov.csv"
    np.savetxt(src, S, delimiter=",")
    dst = tmp_path / "theta.csv"
    assert main(["glasso", "--input", str(src), "--lambda", "0.05", "--out", str(dst)]) == 0
    got = np.loadtxt(dst, delimiter=",")
    want = glasso.graphical_lasso(S, 0.05, tol=1e-5, max_iter=200).theta
    np.testing.assert_allclose(got, want, rtol=0, atol=0)


def test_glasso_stdout_default(tmp_path, capsys):
    src = tmp_path / "eye.csv"
    np.savetxt(src, np.eye(2), delimiter=",")
    assert main(["glasso", "--input", str(src), "--lambda", "0.1"]) == 0
    rows = capsys.readouterr().out.strip().split("\n")
    got = np.array([[float(v) for v in row.split(",")] for row in rows])
    np.testing.assert_allclose(got, np.eye(2))


def test_glasso_bad_input_exits_2(tmp_path, capsys):
    code = main(["glasso", "--input", str(tmp_path / "missing.csv")])
    assert code == 2
    assert "could not read" in capsys.readouterr().err


def test_glasso_nonsquare_exits_2(tmp_path):
    src = tmp_path / "rect.csv"
    np.savetxt(src, np.ones((2, 3)), delimiter=",")
    assert main(["glasso", "--input", str(src)]) == 2
