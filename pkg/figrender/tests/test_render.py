import os
import subprocess
import sys

import pytest

from figrender.io import CsvFormatError, dump_tables, read_table, read_tables
from figrender.plots import render_capacity, render_waterfall

DATA = os.path.join(os.path.dirname(__file__), "data")
CAP = os.path.join(DATA, "capacity.csv")
PRAG = os.path.join(DATA, "pragmatic.csv")
WATER = os.path.join(DATA, "waterfall.csv")


def test_read_table_schema_and_rows():
    t = read_table(CAP)
    assert t.schema == "capacity.v1"
    assert len(t) >= 4
    assert {"BP", "EQ"} == {r["comp"] for r in t.rows}


def test_read_rejects_bad_files(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(CsvFormatError, match="empty.csv"):
        read_table(empty)
    noschema = tmp_path / "noschema.csv"
    noschema.write_text("a,b\n1,2\n")
    with pytest.raises(CsvFormatError, match="schema"):
        read_table(noschema)
    missing = tmp_path / "missing.csv"
    missing.write_text("# fibercm-csv schema=capacity.v1\nlength_m,comp\n1,BP\n")
    with pytest.raises(CsvFormatError, match="missing columns"):
        read_table(missing)
    norows = tmp_path / "norows.csv"
    norows.write_text(
        "# fibercm-csv schema=waterfall.v1\n"
        "code,p_in,ber_out,bits_simulated\n"
    )
    with pytest.raises(CsvFormatError, match="no data rows"):
        read_table(norows)


def test_schema_kind_mismatch():
    with pytest.raises(CsvFormatError, match="not usable"):
        read_tables([WATER], {"capacity.v1", "pragmatic.v1"})


def test_capacity_render_deterministic(tmp_path):
    tables = read_tables([CAP, PRAG], {"capacity.v1", "pragmatic.v1"})
    p1 = tmp_path / "fig1.png"
    p2 = tmp_path / "fig2.png"
    render_capacity(tables, str(p1))
    render_capacity(tables, str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.stat().st_size > 10_000


def test_capacity_svg_deterministic(tmp_path):
    tables = read_tables([CAP], {"capacity.v1"})
    p1 = tmp_path / "fig1.svg"
    p2 = tmp_path / "fig2.svg"
    render_capacity(tables, str(p1))
    render_capacity(tables, str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_waterfall_render_deterministic(tmp_path):
    tables = read_tables([WATER], {"waterfall.v1"})
    p1 = tmp_path / "w1.png"
    p2 = tmp_path / "w2.png"
    render_waterfall(tables, str(p1))
    render_waterfall(tables, str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_waterfall_g709_threshold_passthrough():
    """The committed sample data carries the standards-compatible code at
    crossover 4.8e-3 with post-FEC BER below 1e-6."""
    t = read_table(WATER)
    rows = [
        r for r in t.rows if r["code"] == "g709" and float(r["p_in"]) == 4.8e-3
    ]
    assert rows
    for r in rows:
        ber = float(r["ber_out"])
        bound = ber if ber > 0 else 1.0 / float(r["bits_simulated"])
        assert bound < 1e-6


def test_dump_table_roundtrip(tmp_path):
    tables = read_tables([WATER], {"waterfall.v1"})
    out = tmp_path / "dump.csv"
    dump_tables(tables, out)
    assert out.read_bytes() == open(WATER, "rb").read()


def test_cli_end_to_end(tmp_path):
    out = tmp_path / "cap.png"
    dump = tmp_path / "dump.csv"
    res = subprocess.run(
        [
            sys.executable, "-m", "figrender.cli", "render",
            "--kind", "capacity", "--in", CAP, PRAG,
            "--out", str(out), "--dump-table", str(dump),
        ],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr
    assert out.exists()
    assert dump.read_bytes() == (
        open(CAP, "rb").read() + open(PRAG, "rb").read()
    )
    bad = subprocess.run(
        [
            sys.executable, "-m", "figrender.cli", "render",
            "--kind", "waterfall", "--in", str(tmp_path / "nope.csv"),
            "--out", str(tmp_path / "x.png"),
        ],
        capture_output=True, text=True,
    )
    assert bad.returncode == 1
    assert "nope.csv" in bad.stderr


def test_two_curves_per_length():
    """Grouping contract: a capacity CSV with both comps yields BP and EQ
    series for each length."""
    t = read_table(CAP)
    groups = {(r["length_m"], r["comp"]) for r in t.rows}
    lengths = {g[0] for g in groups}
    for lm in lengths:
        assert (lm, "BP") in groups and (lm, "EQ") in groups
