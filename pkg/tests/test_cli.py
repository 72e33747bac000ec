import csv
import json

import pytest

from amsplace.cli import ard_table, main
from amsplace.fileio import parse_instance

from test_fileio import BLOCKS, NETS


@pytest.fixture
def inst_file(tmp_path):
    path = tmp_path / "inst.json"
    assert main(["gen", "--n", "12", "--nets", "3:5", "--symmetry", "--negative-distances",
                 "--seed", "2", "--out", str(path)]) == 0
    return path


def test_gen_writes_valid_instance(inst_file):
    inst = parse_instance(inst_file.read_text())
    assert inst.n == 12 and 3 <= len(inst.nets) <= 5 and inst.groups


def test_gen_compose(tmp_path):
    out = tmp_path / "c.json"
    assert main(["gen", "--n", "5", "--compose", "3", "--out", str(out)]) == 0
    assert parse_instance(out.read_text()).n == 15


def test_solve_eval_plot(inst_file, tmp_path, capsys):
    pl = tmp_path / "p.json"
    assert main(["solve", "--instance", str(inst_file), "--algo", "ga", "--pop-size", "10",
                 "--max-generations", "3", "--seed", "1", "--c-conn", "2", "--out", str(pl)]) == 0
    doc = json.loads(pl.read_text())
    assert doc["meta"]["algorithm"] == "ga" and doc["meta"]["seed"] == 1
    capsys.readouterr()
    assert main(["eval", "--instance", str(inst_file), "--placement", str(pl)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["feasible"] is True
    svg = tmp_path / "p.svg"
    assert main(["plot", "--instance", str(inst_file), "--placement", str(pl), "--out", str(svg)]) == 0
    assert svg.read_text().count('class="device"') == 12


def test_solve_cmaes_no_refine(inst_file, tmp_path):
    pl = tmp_path / "p.json"
    assert main(["solve", "--instance", str(inst_file), "--algo", "cmaes", "--pop-size", "8",
                 "--max-generations", "3", "--no-refine", "--out", str(pl)]) == 0
    assert json.loads(pl.read_text())["meta"]["refined"] is False


def test_convert_gsrc(tmp_path):
    (tmp_path / "a.blocks").write_text(BLOCKS)
    (tmp_path / "a.nets").write_text(NETS)
    out = tmp_path / "a.json"
    assert main(["convert-gsrc", "--blocks", str(tmp_path / "a.blocks"),
                 "--nets", str(tmp_path / "a.nets"), "--out", str(out)]) == 0
    assert parse_instance(out.read_text()).n == 3


def test_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 2
    capsys.readouterr()
    assert main(["eval", "--instance", str(tmp_path / "missing.json"),
                 "--placement", "x"]) == 3
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and "missing.json" in err[0]
    bad = tmp_path / "bad.json"
    bad.write_text('{"rects": [{"variants": [[0, 1]]}]}')
    assert main(["plot", "--instance", str(bad), "--placement", "x", "--out", "y"]) == 3
    assert main(["gen", "--n", "0", "--out", str(tmp_path / "z.json")]) == 2
    assert main(["bench", "--dir", str(tmp_path), "--algo", "sa", "--out", "r.csv"]) == 2


def test_internal_error_exit(monkeypatch, inst_file, tmp_path):
    import amsplace.cli as cli

    def boom(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "run_ga", boom)
    assert main(["solve", "--instance", str(inst_file), "--out", str(tmp_path / "p.json")]) == 4


def test_ard_table_by_hand():
    res = ard_table({"a": [10.0, 20.0], "b": [11.0, 18.0]})
    assert res["a"] == pytest.approx(((0.0 + 20.0 / 18.0 * 100 - 100) / 2, 1))
    assert res["b"] == pytest.approx(((10.0 + 0.0) / 2, 1))


def test_bench_csv(tmp_path):
    d = tmp_path / "set"
    d.mkdir()
    for s in range(3):
        assert main(["gen", "--n", "6", "--seed", str(s), "--out", str(d / f"i{s}.json")]) == 0
    out = tmp_path / "r.csv"
    assert main(["bench", "--dir", str(d), "--algo", "ga,cmaes", "--repeats", "2",
                 "--pop-size", "6", "--max-generations", "2", "--no-refine", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3 * 2 + 2
    assert {r["instance"] for r in rows} == {"i0.json", "i1.json", "i2.json", "ALL"}
