import json

from manismooth.cli import main
from manismooth.harness import TraceRecord, read_summary_json, read_trace_csv, write_trace_csv


def pca_config(out_dir, **overrides):
    cfg = {
        "problem": {"family": "sparse_pca", "n": 8, "p": 2, "N": 20, "lambda": 0.1},
        "algorithm": "lipschitz",
        "seed": 5,
        "max_iters": 100,
        "trace_every": 10,
        "diagnostics": False,
        "solver": {},
        "output_dir": str(out_dir),
    }
    cfg.update(overrides)
    return cfg


def sphere_config(out_dir, **overrides):
    cfg = {
        "problem": {
            "family": "constrained_sphere",
            "n": 8,
            "m": 4,
            "N": 10,
            "set": {"kind": "ball", "center": [0.3, 0.3, 0.3, 0.3], "radius": 0.8},
        },
        "algorithm": "indicator",
        "seed": 5,
        "max_iters": 120,
        "trace_every": 10,
        "diagnostics": False,
        "solver": {"theta": 1.0, "safety": 2.0},
        "output_dir": str(out_dir),
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def test_run_lipschitz_writes_outputs(tmp_path):
    out = tmp_path / "out"
    path = write_config(tmp_path, pca_config(out))
    assert main(["run", "--config", str(path)]) == 0
    trace = read_trace_csv(out / "trace.csv")
    assert len(trace) == 100 // 10 + 1
    summary = read_summary_json(out / "summary.json")
    assert summary["schema_version"] == "1"
    assert summary["algorithm"] == "lipschitz"
    assert summary["certificate"]["membership_ok"] is True


def test_run_indicator_writes_outputs(tmp_path):
    out = tmp_path / "outi"
    path = write_config(tmp_path, sphere_config(out))
    assert main(["run", "--config", str(path)]) == 0
    summary = read_summary_json(out / "summary.json")
    assert summary["certificate"]["membership_ok"] is True
    assert summary["config"]["solver_resolved"]["theta"] == 1.0
    assert "k_tilde" in summary["config"]["solver_resolved"]


def test_run_missing_theta_names_field(tmp_path, capsys):
    cfg = sphere_config(tmp_path / "x")
    cfg["solver"] = {}
    path = write_config(tmp_path, cfg)
    assert main(["run", "--config", str(path)]) == 2
    assert "solver.theta" in capsys.readouterr().err


def test_run_algorithm_problem_mismatch(tmp_path):
    cfg = pca_config(tmp_path / "y", algorithm="indicator")
    cfg["solver"] = {"theta": 1.0}
    path = write_config(tmp_path, cfg)
    assert main(["run", "--config", str(path)]) == 2


def test_run_rejects_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["run", "--config", str(path)]) == 2


def test_run_byte_identical_traces(tmp_path, monkeypatch):
    cfg_path = write_config(tmp_path, pca_config("ignored"))
    monkeypatch.setenv("MANISMOOTH_OUT", str(tmp_path / "a"))
    assert main(["run", "--config", str(cfg_path)]) == 0
    monkeypatch.setenv("MANISMOOTH_OUT", str(tmp_path / "b"))
    assert main(["run", "--config", str(cfg_path)]) == 0
    a = (tmp_path / "a" / "trace.csv").read_bytes()
    b = (tmp_path / "b" / "trace.csv").read_bytes()
    assert a == b


def test_run_seed_list_creates_subdirectories(tmp_path, monkeypatch):
    cfg_path = write_config(tmp_path, pca_config("ignored"))
    monkeypatch.setenv("MANISMOOTH_OUT", str(tmp_path / "multi"))
    assert main(["run", "--config", str(cfg_path), "--seeds", "1,2,3"]) == 0
    for s in (1, 2, 3):
        assert (tmp_path / "multi" / f"seed_{s}" / "trace.csv").exists()


def test_check_unknown_suite():
    assert main(["check", "--suite", "nope"]) == 2


def test_check_lemmas_passes(capsys):
    assert main(["check", "--suite", "lemmas"]) == 0
    err = capsys.readouterr().err
    assert "PASS" in err


def test_check_all_passes(capsys):
    # the property suites themselves are the oracle here
    assert main(["check", "--suite", "all"]) == 0
    err = capsys.readouterr().err
    assert "FAIL" not in err


def test_report_synthetic_slope(tmp_path, capsys):
    trace = [
        TraceRecord(k=k, mu=1.0, tau=0.1, a=0.5, norm_G=1.0, obj_smooth=None,
                    norm_grad_Fmu=float(k) ** (-1.0 / 3.0), infeas=0.0, norm_eps=None, wall_ns=0)
        for k in range(1, 2001)
    ]
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    assert main(["report", "--trace", str(path), "--field", "norm_grad_Fmu",
                 "--from", "100", "--to", "2000"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["slope"] + 2.0 / 3.0) <= 0.06
    assert out["r_squared"] > 0.99


def test_report_window_too_small(tmp_path):
    trace = [
        TraceRecord(k=k, mu=1.0, tau=0.1, a=0.5, norm_G=1.0, obj_smooth=None,
                    norm_grad_Fmu=1.0, infeas=0.0, norm_eps=None, wall_ns=0)
        for k in range(1, 30)
    ]
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    assert main(["report", "--trace", str(path), "--field", "norm_grad_Fmu",
                 "--from", "25", "--to", "29"]) == 2


def test_report_malformed_csv_names_line(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("k,mu,tau,a,norm_G,obj_smooth,norm_grad_Fmu,infeas,norm_eps,wall_ns\n1,oops,0.1,1,1,,,0,,0\n")
    assert main(["report", "--trace", str(path), "--field", "norm_G",
                 "--from", "1", "--to", "10"]) == 2
    assert "line 2" in capsys.readouterr().err


def test_report_missing_file():
    assert main(["report", "--trace", "/nonexistent/trace.csv", "--field", "norm_G",
                 "--from", "1", "--to", "10"]) == 2
