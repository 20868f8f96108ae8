"""End-to-end tests of the command-line harness on tiny configurations."""

import json

from pkbss.cli import main
from pkbss.reporting import read_csv


def test_cli_validate_small(tmp_path):
    out = tmp_path / "v"
    code = main(["validate", "--n-tensors", "2", "--seeds", "0",
                 "--thresholds", "0.5,0.9", "--out-dir", str(out)])
    assert code == 0
    rows = read_csv(out / "results.csv")
    assert len(rows) == 6  # 3 algorithms x 2 thresholds
    with open(out / "manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["n_rows"] == 6
    assert manifest["config"]["experiment"] == "validate"
    assert (out / "validate.svg").exists()
    assert (out / "validate.png").exists()


def test_cli_waves_small(tmp_path):
    out = tmp_path / "w"
    code = main(["waves", "--seeds", "0", "--algorithms", "pka,jade",
                 "--out-dir", str(out)])
    assert code == 0
    rows = read_csv(out / "results.csv")
    assert {r["algorithm"] for r in rows} == {"pka", "jade"}
    assert (out / "waves_isi.svg").exists()
    assert (out / "waves_sdr.png").exists()
    assert (out / "waves_separated.csv").exists()


def test_cli_radar_small(tmp_path):
    out = tmp_path / "r"
    code = main(["radar", "--kind", "isrj", "--values", "1.0",
                 "--seeds", "0", "--algorithms", "pka,psa",
                 "--out-dir", str(out)])
    assert code == 0
    rows = read_csv(out / "results.csv")
    assert len(rows) == 2
    summary = read_csv(out / "radar_summary.csv")
    assert {r["algorithm"] for r in summary} == {"pka", "psa"}


def test_cli_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "seeds": [0, 1], "algorithms": ["pka", "cfastica"],
        "out_dir": str(tmp_path / "ignored"),
    }))
    out = tmp_path / "a"
    code = main(["audio", "--config", str(cfg), "--seeds", "0",
                 "--out-dir", str(out)])
    assert code == 0
    rows = read_csv(out / "results.csv")
    # file sets the algorithms, the flag overrides the seeds and out dir
    assert {r["algorithm"] for r in rows} == {"pka", "cfastica"}
    assert {r["seed"] for r in rows} == {0}


def test_cli_bad_config_exits_nonzero(tmp_path):
    missing = tmp_path / "none.json"
    assert main(["waves", "--config", str(missing)]) == 2
