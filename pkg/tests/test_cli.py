from __future__ import annotations

import csv
import io
import json

import pytest

from fibtower import cli
from fibtower.errors import PrecisionExhausted


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cutting_times_csv(capsys):
    code, out, _ = run(capsys, "cutting-times", "--d", "2", "--kmax", "6")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["k", "S"] and [r[1] for r in rows[1:]] == ["1", "2", "3", "5", "8", "13", "21"]


def test_kneading_string(capsys):
    code, out, _ = run(capsys, "kneading", "--d", "3")
    assert code == 0 and out == "100011101100110001010\n"


def test_bad_d_is_usage_error(capsys):
    code, _, err = run(capsys, "verify-all", "--d", "1")
    assert code == 64 and "d must be >= 2" in err


def test_unknown_command(capsys):
    assert run(capsys, "frobnicate")[0] == 64


def test_solve_reports_enclosure(capsys):
    code, out, _ = run(capsys, "solve", "--d", "2", "--prefix", "30", "--bits", "200",
                       "--digits", "30")
    data = json.loads(out)
    assert code == 0 and data["itinerary_matches"] and data["prefix_len"] == 30
    assert data["a_lo"].startswith("1.72921193170872135752664")
    assert float(data["a_lo"]) <= float(data["a_hi"]) and data["bits"] >= 200


def test_config_file_and_override(capsys, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# settings\nd = 3\nkmax = 5\n")
    _, out, _ = run(capsys, "cutting-times", "--config", str(conf))
    assert out.strip().splitlines()[-1] == "5,9"
    _, out, _ = run(capsys, "cutting-times", "--config", str(conf), "--kmax", "7")
    assert out.strip().splitlines()[-1] == "7,19"
    conf.write_text("colour = blue\n")
    assert run(capsys, "cutting-times", "--config", str(conf))[0] == 64


def test_output_file(capsys, tmp_path):
    dest = tmp_path / "c.json"
    assert run(capsys, "cover", "--d", "2", "--k", "2", "--output", str(dest))[0] == 0
    assert json.loads(dest.read_text())["d"] == 2


def test_verify_all_passes_and_is_deterministic(capsys):
    code, first, _ = run(capsys, "verify-all", "--d", "2", "--kmax", "10")
    assert code == 0
    report = json.loads(first)
    assert report["passed"] and report["schema"] == cli.SCHEMA
    assert {s["stage"] for s in report["stages"]} >= {"theorem_1_1", "semiconjugacy",
                                                        "measure_normalization", "dimension"}
    code, second, _ = run(capsys, "verify-all", "--d", "2", "--kmax", "10")
    assert second == first


def test_verify_cover_not_applicable(capsys):
    code, out, _ = run(capsys, "verify-cover", "--d", "4", "--kmax", "6")
    data = json.loads(out)
    assert code == 0 and data["passed"]
    assert all(c["status"] == "not applicable" for c in data["checks"] if c["check"] == "disjoint")


def test_precision_exhaustion_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise PrecisionExhausted("forced")
    monkeypatch.setattr("fibtower.adic.verify_semiconjugacy", boom)
    code, out, _ = run(capsys, "verify-all", "--d", "2", "--kmax", "4")
    data = json.loads(out)
    assert code == 2 and data["error"]["stage"] == "semiconjugacy"


def test_diagram_dot(capsys):
    code, out, _ = run(capsys, "diagram", "--d", "2", "--depth", "3")
    assert code == 0 and out.startswith("digraph") and '[label="2"]' in out


def test_vershik_csv(capsys):
    code, out, _ = run(capsys, "vershik", "--d", "2", "--depth", "4", "--steps", "8")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 9
    assert rows[0]["eta"] == "0" and rows[1]["eta"] == "1"
    assert all(float(r["floor_lo"]) <= float(r["floor_hi"]) for r in rows)


def test_measure_json(capsys):
    code, out, _ = run(capsys, "measure", "--d", "2", "--k", "3")
    data = json.loads(out)
    assert code == 0 and data["normalized"] and data["perron_witness"]
    assert float(data["total"]["lo"]) <= 1 <= float(data["total"]["hi"])


def test_birkhoff_csv(capsys):
    code, out, err = run(capsys, "birkhoff", "--d", "2", "--k", "4", "--iters", "3000")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["i"] for r in rows] == ["1", "2"]
    assert "settled by itineraries" in err


def test_dimension_and_recurrence_csv(capsys):
    code, out, _ = run(capsys, "dimension", "--d", "2", "--kmax", "8", "--alpha", "0.1,0.05")
    header = out.splitlines()[0].split(",")
    assert code == 0 and header == ["k", "D_len", "delta_direct", "delta_formula", "P_k",
                                    "hsum_0.1", "hsum_0.05"]
    code, out, _ = run(capsys, "recurrence", "--d", "2", "--kmax", "6")
    assert code == 0 and out.splitlines()[0] == "k,S,exponent"


def test_cover_and_orbit(capsys):
    code, out, _ = run(capsys, "cover", "--d", "2", "--k", "3")
    data = json.loads(out)
    assert code == 0 and data["floor_count"] == 5
    code, out, _ = run(capsys, "orbit", "--d", "2", "--n", "4")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["symbol"] for r in rows] == list("1001")


@pytest.mark.parametrize("bad", [["--precision-bits", "x"], ["--precision-bits", "4"]])
def test_bad_precision(capsys, bad):
    assert run(capsys, "solve", "--d", "2", *bad)[0] == 64
