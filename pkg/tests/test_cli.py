import json
import subprocess
import sys

import pytest

from safeperf.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_samplesize(capsys):
    assert run(capsys, "samplesize", "--epsilon", "0.012", "--delta", "1e-3")[:2] == (0, "26393\n")


def test_samplesize_domain_error(capsys):
    code, _, err = run(capsys, "samplesize", "--epsilon", "0", "--delta", "1e-3")
    assert code == 1 and "epsilon" in err


def test_argparse_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frontier", "--n", "twelve", "--qso", "2e-4"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["nonsense"])
    assert e.value.code == 1


def test_frontier(capsys):
    code, out, _ = run(capsys, "frontier", "--n", "12", "--qso", "2e-4")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "x_min,y_min,p_miss_crit" and len(lines) == 13
    x, y, p = lines[6].split(",")
    assert (x, y) == ("6", "7")
    assert float(p) == pytest.approx(0.12385300635334, abs=2e-9)


def test_curve(capsys, tmp_path):
    out = tmp_path / "curve.csv"
    code, _, _ = run(capsys, "curve", "--n", "12", "--ymin", "6..8", "--pmiss-max", "0.3",
                     "--steps", "30", "--out", str(out))
    rows = out.read_text().splitlines()
    assert code == 0 and len(rows) == 1 + 3 * 31
    code, _, err = run(capsys, "curve", "--n", "12", "--ymin", "8..6", "--pmiss-max", "0.3",
                       "--steps", "3")
    assert code == 1 and "--ymin" in err


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "--n", "12", "--xmin", "6", "--pmiss", "0.1",
                       "--trials", "200000", "--seed", "1", "--workers", "2")
    d = json.loads(out)
    assert code == 0 and d["analytic"] == pytest.approx(5.0180338e-05)
    assert abs(d["z_score"]) < 4
    code, out, _ = run(capsys, "simulate", "--n", "12", "--xmin", "6", "--pmiss", "0.1",
                       "--trials", "100000", "--seed", "1", "--rho", "0.5")
    assert code == 0 and json.loads(out)["rho"] == 0.5


def test_simulate_requires_seed(capsys):
    with pytest.raises(SystemExit) as e:
        main(["simulate", "--n", "12", "--xmin", "6", "--pmiss", "0.1", "--trials", "10"])
    assert e.value.code == 1


def test_fta_eval(capsys, tmp_path, aebs_doc):
    p = tmp_path / "tree.json"
    tree = aebs_doc["fault_tree"]
    for node in tree["nodes"].values():
        if node["type"] == "BASIC":
            node["probability"] = "1e-4"
    p.write_text(json.dumps(tree))
    code, out, _ = run(capsys, "fta", "eval", "--tree", str(p))
    assert code == 0 and json.loads(out)["top"] == pytest.approx(1 - (1 - 1e-4) ** 3)
    p.write_text("{")
    assert run(capsys, "fta", "eval", "--tree", str(p))[0] == 1
    assert run(capsys, "fta", "eval", "--tree", str(tmp_path / "missing.json"))[0] == 1


def test_derive_check_render(capsys, tmp_path):
    reqs = tmp_path / "reqs.json"
    md = tmp_path / "reqs.md"
    code, _, _ = run(capsys, "derive", "--scenario", "builtin:aebs", "--out", str(reqs),
                     "--md", str(md))
    assert code == 0 and "REQ-08-MLSD-GENERALIZATION" in md.read_text()
    assert json.loads(reqs.read_text())["parameters"]["eta"] == 26393

    meas = tmp_path / "measured.json"
    meas.write_text(json.dumps({"dataset_id": "test", "metrics": {
        "fnr": {"value": 0.1, "dataset_size": 26393},
        "tpr": {"value": 0.9, "dataset_size": 26393},
    }}))
    code, out, _ = run(capsys, "check", "--reqs", str(reqs), "--measured", str(meas))
    assert code == 0 and json.loads(out)["compliant"]

    meas.write_text(json.dumps({"metrics": {"prob_no_confirm": 2e-4}}))
    code, out, _ = run(capsys, "check", "--reqs", str(reqs), "--measured", str(meas))
    assert code == 3 and not json.loads(out)["compliant"]

    meas.write_text(json.dumps({"metrics": {"fnr": 1.5}}))
    assert run(capsys, "check", "--reqs", str(reqs), "--measured", str(meas))[0] == 1

    code, out, _ = run(capsys, "render", "--reqs", str(reqs), "--format", "json")
    assert code == 0 and out == reqs.read_text()


def test_derive_infeasible(capsys, tmp_path, aebs_doc):
    aebs_doc["operating_point"]["x_min"] = 9
    p = tmp_path / "s.json"
    p.write_text(json.dumps(aebs_doc))
    code, _, err = run(capsys, "derive", "--scenario", str(p))
    assert code == 2 and "infeasible" in err


def test_derive_invalid_names_field(capsys, tmp_path, aebs_doc):
    aebs_doc["gap"]["delta"] = "abc"
    p = tmp_path / "s.json"
    p.write_text(json.dumps(aebs_doc))
    code, _, err = run(capsys, "derive", "--scenario", str(p))
    assert code == 1 and "gap.delta" in err
    assert run(capsys, "derive", "--scenario", "builtin:nothing")[0] == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "safeperf", "samplesize", "--epsilon", "0.012",
                        "--delta", "0.001"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "26393\n"
