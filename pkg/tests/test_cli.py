import json
from fractions import Fraction

import pandas as pd
import pytest
from click.testing import CliRunner

from ridgeprox import __version__
from ridgeprox import cli as cli_module
from ridgeprox.cli import cli
from ridgeprox.repro import build_example_sets, l_k


def _number(value):
    return float(Fraction(value)) if isinstance(value, str) else float(value)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def write_doc(tmp_path):
    def write(name, doc):
        path = tmp_path / name
        path.write_text(json.dumps(doc), encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def grid_doc(write_doc):
    return write_doc(
        "grid.json",
        {
            "points": [[0, 0], [0, 1], [1, 0], [1, 1]],
            "directions": [[1, 0], [0, 1]],
            "field": [1, -1, -1, 1],
            "exact": True,
        },
    )


@pytest.fixture
def invoke(runner, tmp_path):
    """Run a command with --out and return (result, parsed report or None)"""

    def run(*args):
        out = tmp_path / "report.json"
        if out.exists():
            out.unlink()
        result = runner.invoke(cli, ["--log-level", "WARNING", *args, "--out", str(out)])
        report = json.loads(out.read_text(encoding="utf-8")) if out.exists() else None
        return result, report

    return run


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


class TestAnalyze:
    def test_grid(self, invoke, grid_doc):
        result, report = invoke("analyze", "--input", grid_doc)
        assert result.exit_code == 0
        res = report["results"]
        assert res["orbits"] == {"count": 1, "sizes": [4]}
        assert res["irreducible_bound"] == 3
        assert res["edges"] == {"PerpToA1": 2, "PerpToA2": 2}
        assert res["closed_paths"] == [[0, 1, 3, 2]]
        assert report["command"]["name"] == "analyze"
        assert len(report["input_digest"]) == 64

    def test_section1(self, invoke, write_doc):
        points = [[2, "2/3"], ["2/3", "-2/3"], [0, 0], [1, 1], ["3/2", "1/2"], ["7/4", "3/4"], ["15/8", "5/8"]]
        path = write_doc("section1.json", {"points": points, "directions": [[1, -1], [1, 1]], "exact": True})
        result, report = invoke("analyze", "--input", path)
        assert result.exit_code == 0
        assert report["results"]["orbits"]["count"] == 1
        assert report["results"]["irreducible_bound"] == 7
        assert report["results"]["closed_paths"] == []

    def test_deterministic(self, invoke, grid_doc):
        _, first = invoke("analyze", "--input", grid_doc)
        _, second = invoke("analyze", "--input", grid_doc)
        first.pop("timing")
        second.pop("timing")
        assert first == second

    def test_csv_input(self, invoke, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text("x,y\n0,0\n0,1\n1,0\n1,1\n", encoding="utf-8")
        result, report = invoke("analyze", "--input", str(path), "--dir1", "1,0", "--dir2", "0,1")
        assert result.exit_code == 0
        assert report["results"]["irreducible_bound"] == 3
        assert report["results"]["exact"] is False

    def test_empty_points_exit_2(self, invoke, write_doc):
        path = write_doc("empty.json", {"points": [], "directions": [[1, 0], [0, 1]]})
        result, report = invoke("analyze", "--input", path)
        assert result.exit_code == 2
        assert report is None
        assert "points" in result.output

    def test_malformed_json_exit_2(self, invoke, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"points": [', encoding="utf-8")
        result, _ = invoke("analyze", "--input", str(path))
        assert result.exit_code == 2
        assert "broken.json:1:" in result.output

    def test_dependent_directions_exit_2(self, invoke, write_doc):
        path = write_doc("dep.json", {"points": [[0, 0]], "directions": [[1, 1], [2, 2]]})
        result, _ = invoke("analyze", "--input", path)
        assert result.exit_code == 2


@pytest.fixture
def staircase_doc(write_doc):
    points = []
    for i in range(7):
        points += [[i, i], [i, (i + 1) % 7]]
    doc = {"points": points, "directions": [[1, 0], [0, 1]], "field": [1, -1] * 7, "exact": True}
    return write_doc("staircase.json", doc)


class TestForceEnumeration:
    def test_long_cap_needs_the_flag(self, invoke, staircase_doc):
        result, report = invoke("analyze", "--input", staircase_doc, "--max-closed-points", "14")
        assert result.exit_code == 2
        assert report is None
        assert "--force-enumeration" in result.output

    def test_analyze_with_flag(self, invoke, staircase_doc):
        result, report = invoke(
            "analyze", "--input", staircase_doc, "--max-closed-points", "14", "--force-enumeration"
        )
        assert result.exit_code == 0
        assert report["results"]["closed_paths"] == [list(range(14))]

    def test_fit_certificate_with_flag(self, invoke, staircase_doc):
        _, clamped = invoke("fit", "--input", staircase_doc, "--max-closed-points", "14")
        assert clamped["results"]["certificate"] is None
        result, forced = invoke(
            "fit", "--input", staircase_doc, "--max-closed-points", "14", "--force-enumeration"
        )
        assert result.exit_code == 0
        assert forced["results"]["error"] == 1
        assert forced["results"]["certificate"]["points"] == list(range(14))


class TestFit:
    def test_lp(self, invoke, grid_doc):
        result, report = invoke("fit", "--input", grid_doc)
        assert result.exit_code == 0
        res = report["results"]
        assert res["error"] == 1
        assert res["certificate"]["points"] == [0, 1, 3, 2]
        assert res["certificate"]["steps"] == ["PerpToA1", "PerpToA2", "PerpToA1"]
        assert [row["class"] for row in res["u"]] == [0, 1]

    def test_alternating_not_below_lp(self, invoke, write_doc):
        doc = {
            "points": [[x, y] for x in range(3) for y in range(3)],
            "directions": [[1, 0], [0, 1]],
            "field": [3, -1, 4, 1, -5, 9, 2, -6, 5],
        }
        path = write_doc("grid3.json", doc)
        _, lp = invoke("fit", "--input", path, "--method", "lp")
        _, alt = invoke("fit", "--input", path, "--method", "alternating")
        assert _number(alt["results"]["error"]) >= _number(lp["results"]["error"]) - 1e-9
        assert alt["results"]["history"]

    def test_missing_field_exit_2(self, invoke, write_doc):
        path = write_doc("nofield.json", {"points": [[0, 0]], "directions": [[1, 0], [0, 1]]})
        result, _ = invoke("fit", "--input", path)
        assert result.exit_code == 2
        assert "field" in result.output


class TestCheck:
    def test_path_bound_fails_on_l_10(self, invoke, write_doc):
        points = [[str(c) for c in p] for p in l_k(10)]
        path = write_doc("l10.json", {"points": points, "directions": [[1, 1], [1, "1/2"]], "exact": True})
        result, report = invoke("check", "--input", path, "--criterion", "path-bound", "--threshold", "10")
        assert result.exit_code == 0
        assert report["results"]["bound"] == 22
        assert report["results"]["passes"] is False

    def test_path_bound_needs_threshold(self, invoke, grid_doc):
        result, _ = invoke("check", "--input", grid_doc, "--criterion", "path-bound")
        assert result.exit_code == 2

    def test_cross_section_single_point(self, invoke, write_doc):
        path = write_doc("one.json", {"points": [[0, 0]], "directions": [[1, 0], [0, 1]]})
        result, report = invoke("check", "--input", path, "--criterion", "cross-section")
        assert result.exit_code == 0
        assert report["results"]["passes"] is True

    def test_thm21_needs_three_dimensions(self, invoke, grid_doc):
        result, _ = invoke("check", "--input", grid_doc, "--criterion", "thm21")
        assert result.exit_code == 2

    def test_thm21_cube_with_csv(self, invoke, write_doc, tmp_path):
        ps = build_example_sets("b", 3)
        points = [list(ps.point(i)) for i in range(ps.n_points)]
        path = write_doc("cube.json", {"points": points, "directions": [[1, 1, 0], [1, -1, 0]]})
        csv_path = tmp_path / "thm21.csv"
        result, report = invoke(
            "check", "--input", path, "--criterion", "thm21", "--deltas", "1,0.5", "--csv", str(csv_path)
        )
        assert result.exit_code == 0
        assert report["results"]["passes"] is True
        assert report["results"]["label"] == "sampled evidence"
        frame = pd.read_csv(csv_path)
        assert list(frame.columns) == ["probe", "delta", "delta0", "pass"]
        assert len(frame) == 2 * ps.n_points

    def test_thm22_document_field(self, invoke, write_doc):
        points = [[str(c) for c in p] for p in l_k(3)]
        field = [3, 3, 2, 2, 1, 1, 0, 0]
        path = write_doc(
            "l3.json", {"points": points, "directions": [[1, 1], [1, "1/2"]], "field": field, "exact": True}
        )
        result, report = invoke("check", "--input", path, "--criterion", "thm22", "--threshold", "2")
        assert result.exit_code == 0
        assert report["results"]["max_ratio"] == 3
        assert report["results"]["passes"] is False

    def test_thm22_random_family(self, invoke, write_doc):
        path = write_doc("grid.json", {"points": [[0, 0], [0, 1], [1, 0], [1, 1]], "directions": [[1, 0], [0, 1]]})
        result, report = invoke("check", "--input", path, "--criterion", "thm22", "--samples", "5", "--seed", "3")
        assert result.exit_code == 0
        assert report["results"]["fields"] == 5
        # a full grid has a cross section, so orbit variation stays within twice the fiber variation
        assert all(_number(r) <= 2 + 1e-9 for r in report["results"]["ratios"])


class TestRepro:
    def test_section1_csv(self, invoke, tmp_path):
        csv_path = tmp_path / "g2.csv"
        result, report = invoke("repro", "--case", "section1", "--n", "21", "--csv", str(csv_path))
        assert result.exit_code == 0
        frame = pd.read_csv(csv_path)
        assert list(frame.columns) == ["k", "partial_sum", "g2_span"]
        assert len(frame) == 10
        assert frame["g2_span"].iloc[-1] == pytest.approx(sum(1 / n for n in range(1, 11)), abs=1e-9)
        assert frame["g2_span"].is_monotonic_increasing
        assert report["results"]["max_minimax_error"] == 0

    def test_bad_series(self, invoke):
        result, _ = invoke("repro", "--case", "section1", "--series", "geometric")
        assert result.exit_code == 2

    def test_square_csv(self, invoke, tmp_path):
        csv_path = tmp_path / "square.csv"
        result, report = invoke("repro", "--case", "square", "--k-max", "4", "--csv", str(csv_path))
        assert result.exit_code == 0
        frame = pd.read_csv(csv_path)
        assert frame["ratio"].tolist() == [1.0, 2.0, 3.0, 4.0]
        assert frame["rhs"].max() <= 1.0
        assert report["results"]["passes"] is True

    def test_examples_prism(self, invoke):
        result, report = invoke("repro", "--case", "examples", "--which", "c", "--density", "9")
        assert result.exit_code == 0
        res = report["results"]
        assert res["passes"] is True
        assert res["delta0_found"][0] <= 0.25
        assert res["rows"][0]["pass"] is False

    def test_unknown_case(self, invoke):
        result, _ = invoke("repro", "--case", "nope")
        assert result.exit_code == 2

    def test_digest_depends_on_parameters(self, invoke):
        _, first = invoke("repro", "--case", "square", "--k-max", "2")
        _, second = invoke("repro", "--case", "square", "--k-max", "3")
        _, again = invoke("repro", "--case", "square", "--k-max", "2")
        assert first["input_digest"] != second["input_digest"]
        assert first["input_digest"] == again["input_digest"]


def test_main_exits_1_on_keyboard_interrupt(monkeypatch):
    def interrupted(**kwargs):
        raise KeyboardInterrupt

    monkeypatch.setattr(cli_module, "cli", interrupted)
    with pytest.raises(SystemExit) as excinfo:
        cli_module.main()
    assert excinfo.value.code == 1
