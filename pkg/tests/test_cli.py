import json

import numpy as np
import pytest

from looise.cli import main
from looise.config import apply_overrides, parse_config, serialize_config
from looise.designs import design_to_csv, regular_grid
from looise.errors import ConfigError


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


BASE_CONFIG = """
# one-dimensional smoke configuration
design.generator = grid
design.d = 1
design.per_axis = 10
measure.sobol_n = 256
predictor.variant = simple-kriging
predictor.kernel.family = matern52
predictor.kernel.theta = 6.0
estimator.kernel.family = matern32
estimator.kernel.theta = 8.0
"""


def test_config_roundtrip():
    cfg = parse_config(BASE_CONFIG)
    again = parse_config(serialize_config(cfg))
    assert cfg == again


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        parse_config("desing.generator = grid\n")
    with pytest.raises(ConfigError):
        apply_overrides({}, {"nope.key": "1"})


def test_config_rejects_duplicates_and_garbage():
    with pytest.raises(ConfigError):
        parse_config("seed = 1\nseed = 2\n")
    with pytest.raises(ConfigError):
        parse_config("just some words\n")


def test_estimate_zero_data(tmp_path, capsys):
    ycsv = write(tmp_path, "y.csv", "y\n" + "\n".join(["0.0"] * 10) + "\n")
    cfg = write(tmp_path, "run.cfg", BASE_CONFIG + f"data.file = {ycsv}\n")
    code = main(["estimate", "--config", cfg])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["ise_loo"] == 0.0
    assert out["ise_blp"] == 0.0
    assert out["ise_blp_unbiased"] == 0.0
    assert out["theta_used"] == 8.0


def test_estimate_flag_overrides_and_manifest(tmp_path, capsys):
    ycsv = write(tmp_path, "y.csv", "y\n" + "\n".join(["0.5"] * 10) + "\n")
    cfg = write(tmp_path, "run.cfg", BASE_CONFIG + f"data.file = {ycsv}\n")
    code = main(["estimate", "--config", cfg, "--estimator.kernel.theta=12.5",
                 "--out", str(tmp_path / "out")])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["theta_used"] == 12.5
    assert out["manifest"]["config"]["estimator.kernel.theta"] == "12.5"
    on_disk = json.loads((tmp_path / "out" / "estimate.json").read_text())
    assert on_disk == out


def test_estimate_exit_code_config_error(tmp_path, capsys):
    cfg = write(tmp_path, "bad.cfg", "design.generator = grid\n")
    assert main(["estimate", "--config", cfg]) == 2


def test_estimate_exit_code_numerical_failure(tmp_path, capsys):
    # non-sum-to-one predictor with a tiny assumed range: S degenerates
    gen = np.random.default_rng(3)
    y = "y\n" + "\n".join(f"{v:.17g}" for v in gen.standard_normal(10)) + "\n"
    ycsv = write(tmp_path, "y.csv", y)
    cfg = write(tmp_path, "run.cfg", BASE_CONFIG + f"data.file = {ycsv}\n")
    code = main(["estimate", "--config", cfg, "--estimator.kernel.theta=1e-6"])
    assert code == 3
    assert "FlatLimitSingular" in capsys.readouterr().err


def test_estimate_bad_file_exit_code(tmp_path):
    cfg = write(tmp_path, "run.cfg", BASE_CONFIG + "data.file = /nonexistent.csv\n")
    assert main(["estimate", "--config", cfg]) == 2


def test_sweep_single_theta_matches_estimate(tmp_path, capsys):
    gen = np.random.default_rng(4)
    ycsv = write(tmp_path, "y.csv",
                 "y\n" + "\n".join(f"{v:.17g}" for v in gen.standard_normal(10)) + "\n")
    cfg = write(tmp_path, "run.cfg", BASE_CONFIG + f"data.file = {ycsv}\n")
    assert main(["estimate", "--config", cfg]) == 0
    est = json.loads(capsys.readouterr().out)["ise_blp"]
    assert main(["sweep", "--config", cfg, "--sweep.thetas=8.0",
                 "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    lines = (tmp_path / "sweep.csv").read_text().strip().splitlines()
    assert lines[0] == "theta_blp,estimate,e_estimate,mse,bias,estimator"
    row = lines[1].split(",")
    assert float(row[0]) == 8.0
    assert np.isclose(float(row[1]), est, rtol=1e-12)


# the scrambled measure keeps support points off the design, as the limit
# formulas require
SWEEP_CONFIG = """
design.generator = grid
design.d = 2
design.per_axis = 4
measure.sobol_n = 256
measure.seed = 9
predictor.variant = simple-kriging
predictor.kernel.family = matern52
predictor.kernel.theta = 4.0
estimator.kernel.family = matern32
estimator.kernel.theta = 8.0
"""


def test_sweep_oracle_columns_and_limit_tail(tmp_path, capsys):
    gen = np.random.default_rng(5)
    ycsv = write(tmp_path, "y.csv",
                 "y\n" + "\n".join(f"{v:.17g}" for v in gen.standard_normal(16)) + "\n")
    cfg = write(tmp_path, "run.cfg", SWEEP_CONFIG + f"data.file = {ycsv}\n"
                + "sweep.thetas = 1e3,1e4,1e6\n"
                + "sweep.oracle.family = matern32\nsweep.oracle.theta = 8.0\n")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    lines = (tmp_path / "sweep.csv").read_text().strip().splitlines()
    rows = [ln.split(",") for ln in lines[1:]]
    estimates = [float(r[1]) for r in rows]
    assert all(np.isfinite(float(r[3])) for r in rows)  # oracle MSE column filled
    # every tail row sits within 1e-3 relative of the independent-limit value
    from looise import estimators as E
    from looise.designs import regular_grid, sobol_measure
    from looise.kernels import KernelSpec
    from looise.moments import independent_limit_bundle
    from looise.predictors import SimpleKriging

    design = regular_grid(2, 4)
    measure = sobol_measure(2, 256, scramble_seed=9)
    pred = SimpleKriging(KernelSpec("matern52", 4.0), design)
    y = np.loadtxt(ycsv, skiprows=1)
    lim = independent_limit_bundle(pred.loo_operator(), pred, design, measure)
    limit_value = E.ise_blp(lim, pred.loo_residuals(y), clamp=True).value
    for est in estimates:
        assert abs(est - limit_value) <= 1e-3 * abs(limit_value)


def test_design_subcommand(tmp_path, capsys):
    code = main(["design", "--design.generator=grid", "--design.d=2",
                 "--design.per_axis=3"])
    out = capsys.readouterr().out
    assert code == 0
    assert out == design_to_csv(regular_grid(2, 3))


def test_design_file_roundtrip_via_estimate(tmp_path, capsys):
    dcsv = write(tmp_path, "design.csv", design_to_csv(regular_grid(1, 10)))
    ycsv = write(tmp_path, "y.csv", "y\n" + "\n".join(["0.0"] * 10) + "\n")
    cfg = write(tmp_path, "run.cfg", f"""
design.file = {dcsv}
data.file = {ycsv}
measure.sobol_n = 128
predictor.variant = simple-kriging
predictor.kernel.family = matern52
predictor.kernel.theta = 6.0
estimator.kernel.family = matern32
estimator.kernel.theta = 8.0
""")
    assert main(["estimate", "--config", cfg]) == 0
    assert json.loads(capsys.readouterr().out)["ise_blp"] == 0.0


def test_estimate_with_kernel_mixture(tmp_path, capsys):
    gen = np.random.default_rng(6)
    ycsv = write(tmp_path, "y.csv",
                 "y\n" + "\n".join(f"{v:.17g}" for v in gen.standard_normal(10)) + "\n")
    cfg = write(tmp_path, "run.cfg", BASE_CONFIG + f"data.file = {ycsv}\n"
                + "estimator.mixture.families = matern32,gaussian\n"
                + "estimator.mixture.thetas = 6.0,12.0\n"
                + "estimator.mixture.weights = 0.5,0.5\n")
    assert main(["estimate", "--config", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ise_blp"] >= 0.0
    assert out["diagnostics"]["theta_rule"] == "mixture"
    # mismatched list lengths are a config error
    cfg2 = write(tmp_path, "bad.cfg", BASE_CONFIG + f"data.file = {ycsv}\n"
                 + "estimator.mixture.families = matern32,gaussian\n"
                 + "estimator.mixture.thetas = 6.0\n"
                 + "estimator.mixture.weights = 0.5,0.5\n")
    assert main(["estimate", "--config", cfg2]) == 2


def test_estimate_with_weight_table(tmp_path, capsys):
    from looise.designs import regular_grid as rg
    from looise.designs import sobol_points

    design = rg(1, 6)
    support = sobol_points(1, 32, scramble_seed=3)
    dcsv = write(tmp_path, "design.csv", design_to_csv(design))
    # constant-mean weight table over the support, plus its exact LOO matrix
    header = "x1," + ",".join(f"w{j}" for j in range(6))
    rows = [",".join([f"{x[0]:.17g}"] + [f"{1/6:.17g}"] * 6) for x in support]
    wcsv = write(tmp_path, "weights.csv", header + "\n" + "\n".join(rows) + "\n")
    R = (6 * np.eye(6) - np.ones((6, 6))) / 5
    rcsv = write(tmp_path, "loo.csv",
                 ",".join(f"r{j}" for j in range(6)) + "\n"
                 + "\n".join(",".join(f"{v:.17g}" for v in row) for row in R) + "\n")
    gen = np.random.default_rng(8)
    ycsv = write(tmp_path, "y.csv",
                 "y\n" + "\n".join(f"{v:.17g}" for v in gen.standard_normal(6)) + "\n")
    support_rows = "\n".join(f"{x[0]:.17g}" for x in support)
    mcsv = write(tmp_path, "support.csv", "x1\n" + support_rows + "\n")
    cfg = write(tmp_path, "run.cfg", f"""
design.file = {dcsv}
data.file = {ycsv}
measure.file = {mcsv}
predictor.variant = table
predictor.weights_file = {wcsv}
predictor.loo_file = {rcsv}
estimator.kernel.family = matern32
estimator.kernel.theta = 8.0
""")
    assert main(["estimate", "--config", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    # the table predictor is the empirical mean in disguise
    from looise.estimators import ise_blp
    from looise.moments import build_bundle
    from looise.predictors import EmpiricalMean

    pred = EmpiricalMean(design)
    y = np.loadtxt(ycsv, skiprows=1)
    from looise.designs import uniform_measure
    from looise.kernels import KernelSpec

    bundle = build_bundle(pred.loo_operator(), pred, KernelSpec("matern32", 8.0),
                          design, uniform_measure(support))
    expected = ise_blp(bundle, pred.loo_residuals(y)).value
    assert np.isclose(out["ise_blp"], expected, rtol=1e-10)


def test_reproduce_unknown_experiment(tmp_path, capsys):
    with pytest.raises(SystemExit):
        main(["reproduce", "not-an-experiment", "--out", str(tmp_path)])


def test_reproduce_suppf1_structure(tmp_path, capsys):
    assert main(["reproduce", "suppF1", "--out", str(tmp_path), "--threads", "2"]) == 0
    capsys.readouterr()
    lines = (tmp_path / "suppF1.csv").read_text().strip().splitlines()
    assert lines[0] == "replication,ise_true,ise_loo,ise_blp,ise_blup"
    assert len(lines) == 11
    manifest = json.loads((tmp_path / "suppF1_manifest.json").read_text())
    assert manifest["n_reps"] == 10
    assert "seeds" in manifest


def test_reproduce_deterministic_outputs(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["reproduce", "fig1", "--out", str(out1)]) == 0
    assert main(["reproduce", "fig1", "--out", str(out2), "--threads", "4"]) == 0
    capsys.readouterr()
    assert (out1 / "fig1.csv").read_bytes() == (out2 / "fig1.csv").read_bytes()


def test_env_var_overrides(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("LOOISE_OUT", str(tmp_path / "envout"))
    assert main(["reproduce", "fig2"]) == 0
    capsys.readouterr()
    assert (tmp_path / "envout" / "fig2.csv").exists()


def test_selftest_command(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    lines = [ln for ln in out.splitlines() if ln.startswith("[")]
    assert len(lines) >= 25
    assert all("pass" in ln for ln in lines)


def test_selftest_reports_failing_check_by_name(capsys, monkeypatch):
    import looise.selftest as st

    def broken():
        raise AssertionError("fixture corrupted")

    monkeypatch.setattr(st, "CHECKS", st.CHECKS + [("deliberately broken", broken)])
    assert main(["selftest"]) == 1
    out = capsys.readouterr().out
    assert "[FAIL] deliberately broken" in out
