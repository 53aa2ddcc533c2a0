import json

import numpy as np
import pytest

from mrfcrb.cli import CSV_COLUMNS, main


def read_csv(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in lines[1:]]
    return header, rows


def strip_elapsed(path):
    out = []
    idx = CSV_COLUMNS.index("elapsed_s")
    for ln in path.read_text().splitlines():
        if ln.startswith("#"):
            out.append(ln)
        else:
            out.append(",".join(ln.split(",")[:idx]))
    return "\n".join(out)


def test_estimate_basic(tmp_path):
    code = main(["estimate", "--k", "2", "--size", "8x8", "--boundary", "torus",
                 "--theta", "0.5", "--nmc", "5000", "--burn", "200",
                 "--seed", "1", "--out", str(tmp_path)])
    assert code == 0
    header, rows = read_csv(tmp_path / "estimate.csv")
    assert header == CSV_COLUMNS
    assert len(rows) == 1
    row = rows[0]
    assert row["mode"] == "estimate"
    assert float(row["crb"]) > 0
    assert float(row["fim"]) > 0
    assert 0 < float(row["ess"]) <= 5000
    assert (tmp_path / "estimate.json").exists()


def test_estimate_nmc_too_small(tmp_path, capsys):
    code = main(["estimate", "--k", "2", "--size", "4x4", "--boundary", "free",
                 "--theta", "0.5", "--nmc", "1", "--out", str(tmp_path)])
    assert code == 2
    assert "n_mc must be >= 2" in capsys.readouterr().err


def test_estimate_determinism(tmp_path):
    args = ["estimate", "--k", "3", "--size", "6x6", "--boundary", "free",
            "--theta", "0.3,0.6", "--nmc", "3000", "--burn", "100",
            "--seed", "7", "--n-seeds", "2", "--out", str(tmp_path / "a")]
    assert main(args) == 0
    first = strip_elapsed(tmp_path / "a" / "estimate.csv")
    assert main(args) == 0
    assert strip_elapsed(tmp_path / "a" / "estimate.csv") == first


def test_exact_matches_oracle(tmp_path):
    from mrfcrb.model import make_model
    from mrfcrb.oracle import exact_crb

    code = main(["exact", "--k", "2", "--size", "3x3", "--boundary", "torus",
                 "--theta", "0.5", "--out", str(tmp_path)])
    assert code == 0
    _, rows = read_csv(tmp_path / "exact.csv")
    expected = exact_crb(make_model(3, 3, "toroidal", 2), 0.5)
    assert float(rows[0]["exact_fim"]) == pytest.approx(expected.fim.matrix[0, 0], rel=1e-10)
    assert float(rows[0]["exact_crb"]) == pytest.approx(expected.crb[0, 0], rel=1e-10)


def test_validate_small(tmp_path, capsys):
    code = main(["validate", "--k", "2", "--size", "3x3", "--boundary", "torus",
                 "--theta", "0.5", "--nmc", "50000", "--burn", "500",
                 "--seed", "1", "--tol", "0.05", "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    _, rows = read_csv(tmp_path / "validate.csv")
    assert float(rows[0]["rel_err"]) < 0.05


def test_validate_intractable_size(tmp_path, capsys):
    code = main(["validate", "--k", "2", "--size", "64x64", "--boundary", "torus",
                 "--theta", "0.5", "--nmc", "1000", "--out", str(tmp_path)])
    assert code == 4
    assert "intractable" in capsys.readouterr().err


def test_singular_fim_exit_code(tmp_path, capsys):
    # deep in the ordered phase the statistic freezes and the sample
    # covariance collapses to zero
    code = main(["estimate", "--k", "2", "--size", "6x6", "--boundary", "free",
                 "--theta", "30.0", "--nmc", "500", "--burn", "500",
                 "--seed", "2", "--out", str(tmp_path)])
    assert code == 3
    assert "singular" in capsys.readouterr().err.lower()


def test_config_errors(tmp_path, capsys):
    assert main(["estimate", "--k", "1", "--out", str(tmp_path)]) == 2
    assert main(["estimate", "--size", "potato", "--out", str(tmp_path)]) == 2
    assert main(["estimate", "--theta", "0.5,0.4", "--out", str(tmp_path)]) == 2
    assert main(["estimate", "--model", "ising", "--k", "3", "--out", str(tmp_path)]) == 2
    assert main(["estimate", "--k", "2", "--size", "2x2", "--boundary", "torus",
                 "--out", str(tmp_path)]) == 2


def test_scaling_single_size_skips_fit(tmp_path, capsys):
    code = main(["scaling", "--k-list", "2", "--sizes", "6", "--nmc", "2000",
                 "--burn", "100", "--seed", "1", "--out", str(tmp_path)])
    assert code == 0
    assert "fit skipped" in capsys.readouterr().out
    _, rows = read_csv(tmp_path / "scaling.csv")
    assert len(rows) == 1
    assert float(rows[0]["crb"]) > 0


def test_scaling_multiple_sizes(tmp_path):
    code = main(["scaling", "--k-list", "2,3", "--sizes", "4,6,8", "--nmc", "4000",
                 "--burn", "200", "--seed", "1", "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "scaling.json").read_text())
    assert set(report["fits"]) == {"2", "3"}
    for fit in report["fits"].values():
        assert fit["slope"] < 0  # CRB shrinks with field size


def test_benchmark_nml_validation(tmp_path, capsys):
    code = main(["benchmark", "--k", "2", "--size", "4x4", "--theta", "0.3",
                 "--nml", "1", "--out", str(tmp_path)])
    assert code == 2
    assert "nml" in capsys.readouterr().err


def test_benchmark_small(tmp_path):
    code = main(["benchmark", "--k", "2", "--size", "6x6", "--theta", "0.3",
                 "--nml", "3", "--posterior-samples", "150", "--posterior-burn", "50",
                 "--nmc", "4000", "--burn", "100", "--seed", "5",
                 "--out", str(tmp_path)])
    assert code == 0
    _, rows = read_csv(tmp_path / "benchmark.csv")
    assert len(rows) == 1
    assert float(rows[0]["emp_var"]) >= 0
    assert rows[0]["n_ml"] == "3"


def test_metadata_header(tmp_path):
    main(["exact", "--k", "2", "--size", "3x3", "--boundary", "torus",
          "--theta", "0.5", "--seed", "9", "--out", str(tmp_path)])
    text = (tmp_path / "exact.csv").read_text()
    assert "# tool=mrfcrb" in text
    assert "# rng=splitmix64-v1" in text
    assert "# master_seed=9" in text
    assert "# config=" in text
