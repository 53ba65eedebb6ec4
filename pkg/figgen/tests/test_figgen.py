"""Renderer tests against hand-built CSV fixtures (no dependency on the
experiment harness: the CSV schema is the contract)."""

import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from figgen import (
    FigureSpec,
    SchemaError,
    compute_series,
    extract_data_layer,
    read_rows,
    render,
)

HEADER = "algorithm,rate,sample,subset_size,utility,mode,wall_ms"


def write_csv(path: Path, rows, metadata=("# config={}",)) -> Path:
    lines = list(metadata) + [HEADER]
    for algorithm, rate, sample, utility in rows:
        lines.append(f"{algorithm},{rate!r},{sample},3,{utility!r},mc,0.0")
    path.write_text("\n".join(lines) + "\n")
    return path


def sweep_rows(algorithms, rates, samples):
    rows = []
    for ai, algorithm in enumerate(algorithms):
        for rate in rates:
            for s in range(samples):
                rows.append((algorithm, rate, s, 1.0 + ai + rate + 0.1 * s))
    return rows


class TestParsing:
    def test_round_trip_values(self, tmp_path):
        path = write_csv(tmp_path / "r.csv", [("AG", 0.5, 0, 1.25)])
        (row,) = read_rows(path)
        assert row.algorithm == "AG" and row.rate == 0.5 and row.utility == 1.25

    def test_header_mismatch_raises(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(SchemaError, match="header"):
            read_rows(path)

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(SchemaError, match="does not exist"):
            read_rows(tmp_path / "nope.csv")

    def test_bad_field_count_raises(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(HEADER + "\nAG,0.5,0\n")
        with pytest.raises(SchemaError, match="line 2"):
            read_rows(path)


class TestStats:
    def test_mean_and_ci_formula(self, tmp_path):
        path = write_csv(
            tmp_path / "r.csv",
            [("AG", 0.5, 0, 0.0), ("AG", 0.5, 1, 1.0)],
        )
        series = compute_series(read_rows(path))
        (point,) = series["AG"]
        assert point.mean == pytest.approx(0.5)
        assert point.ci95 == pytest.approx(1.96 * math.sqrt(0.5) / math.sqrt(2))
        assert point.count == 2

    def test_single_sample_has_zero_bar(self, tmp_path):
        path = write_csv(tmp_path / "r.csv", [("AG", 0.5, 0, 2.0)])
        series = compute_series(read_rows(path))
        assert series["AG"][0].ci95 == 0.0


class TestRender:
    def test_structure_three_algorithms_ten_rates(self, tmp_path):
        rates = [round(0.1 * i, 1) for i in range(1, 11)]
        path = write_csv(
            tmp_path / "r.csv", sweep_rows(("AG", "NG", "RDM"), rates, 3)
        )
        out = render(FigureSpec(input_csv=path, output_path=tmp_path / "f.svg"))
        svg = out.read_text()
        assert svg.count("<polyline") == 3
        assert svg.count('class="errorbar"') == 30
        layer = extract_data_layer(svg)
        assert [s["algorithm"] for s in layer["series"]] == ["AG", "NG", "RDM"]
        assert len(layer["series"][0]["points"]) == 10

    def test_constant_utility_gives_flat_zero_bars(self, tmp_path):
        rows = [("AG", r, s, 2.0) for r in (0.2, 0.6, 1.0) for s in range(4)]
        path = write_csv(tmp_path / "r.csv", rows)
        out = render(FigureSpec(input_csv=path, output_path=tmp_path / "f.svg"))
        layer = extract_data_layer(out.read_text())
        for point in layer["series"][0]["points"]:
            assert point["mean"] == 2.0
            assert point["ci95"] == 0.0

    def test_identity_line_fixture(self, tmp_path):
        rates = [round(0.1 * i, 1) for i in range(1, 11)]
        rows = [("AG", r, s, r) for r in rates for s in range(3)]
        path = write_csv(tmp_path / "r.csv", rows)
        out = render(
            FigureSpec(input_csv=path, output_path=tmp_path / "f.svg", ylabel="utility")
        )
        layer = extract_data_layer(out.read_text())
        for point in layer["series"][0]["points"]:
            assert abs(point["mean"] - point["rate"]) <= 1e-12

    def test_rendering_is_byte_identical(self, tmp_path):
        path = write_csv(tmp_path / "r.csv", sweep_rows(("AG", "RDM"), (0.5, 1.0), 3))
        a = render(FigureSpec(input_csv=path, output_path=tmp_path / "a.svg")).read_bytes()
        b = render(FigureSpec(input_csv=path, output_path=tmp_path / "b.svg")).read_bytes()
        assert a == b

    def test_missing_algorithm_group_warns_and_skips(self, tmp_path, capsys):
        path = write_csv(tmp_path / "r.csv", sweep_rows(("AG",), (0.5,), 2))
        out = render(FigureSpec(input_csv=path, output_path=tmp_path / "f.svg"))
        err = capsys.readouterr().err
        assert "NG" in err and "skipping" in err
        layer = extract_data_layer(out.read_text())
        assert [s["algorithm"] for s in layer["series"]] == ["AG"]

    def test_data_layer_matches_recomputed_series(self, tmp_path):
        path = write_csv(tmp_path / "r.csv", sweep_rows(("AG", "NG"), (0.3, 0.9), 5))
        out = render(FigureSpec(input_csv=path, output_path=tmp_path / "f.svg"))
        layer = extract_data_layer(out.read_text())
        series = compute_series(read_rows(path))
        for entry in layer["series"]:
            for got, want in zip(entry["points"], series[entry["algorithm"]]):
                assert got["mean"] == pytest.approx(want.mean, abs=1e-12)
                assert got["ci95"] == pytest.approx(want.ci95, abs=1e-12)


class TestCli:
    def test_cli_renders(self, tmp_path):
        path = write_csv(tmp_path / "r.csv", sweep_rows(("AG",), (0.5, 1.0), 2))
        out = tmp_path / "f.svg"
        proc = subprocess.run(
            [sys.executable, "-m", "figgen.cli", "--in", str(path), "--out", str(out),
             "--ylabel", "influence spread"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.exists()
        layer = extract_data_layer(out.read_text())
        assert layer["ylabel"] == "influence spread"

    def test_cli_schema_mismatch_exits_nonzero(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n")
        proc = subprocess.run(
            [sys.executable, "-m", "figgen.cli", "--in", str(bad), "--out",
             str(tmp_path / "f.svg")],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2
        assert "error" in proc.stderr
