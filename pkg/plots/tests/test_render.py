import csv

import pytest

from copperplot import PlotSpec, SchemaError, render
from copperplot.cli import main

BAR_HEADER = ["scheme", "line", "length_m", "rate_mbps"]
FIG5_HEADER = ["length_m", "scheme", "avg_rate_mbps"]
FIG6_HEADER = ["interferer_psd_dbm_hz", "canceler_on", "aggregate_mbps",
               "avg_user_mbps"]


def write_csv(path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


@pytest.fixture
def bar_csv(tmp_path):
    rows = [
        [scheme, line, 25.0 * line, 1000.0 / line + bump]
        for bump, scheme in enumerate(["none", "zf", "mfb"])
        for line in (1, 2, 3)
    ]
    return write_csv(tmp_path / "rates.csv", BAR_HEADER, rows)


@pytest.fixture
def fig5_csv(tmp_path):
    rows = [
        [length, scheme, 2000.0 - 5.0 * length + bump]
        for length in (20.0, 60.0, 100.0)
        for bump, scheme in enumerate(["none", "zf"])
    ]
    return write_csv(tmp_path / "fig5.csv", FIG5_HEADER, rows)


@pytest.fixture
def fig6_csv(tmp_path):
    rows = [
        [psd, flag, 8000.0 + flag * 500.0 + psd, 1000.0 + flag * 60.0 + psd / 8]
        for psd in (-120.0, -90.0, -60.0)
        for flag in (0, 1)
    ]
    return write_csv(tmp_path / "fig6.csv", FIG6_HEADER, rows)


class TestRender:
    def test_bar_chart(self, bar_csv, tmp_path):
        out = render(PlotSpec(bar_csv, "bar", tmp_path / "bar.png"))
        assert out.is_file() and out.stat().st_size > 0

    def test_length_sweep(self, fig5_csv, tmp_path):
        out = render(PlotSpec(fig5_csv, "line", tmp_path / "fig5.png"))
        assert out.is_file() and out.stat().st_size > 0

    def test_interference_sweep(self, fig6_csv, tmp_path):
        out = render(PlotSpec(fig6_csv, "line", tmp_path / "fig6.svg"))
        assert out.is_file() and out.stat().st_size > 0


class TestSchemaValidation:
    def test_renamed_column_rejected(self, tmp_path):
        path = write_csv(
            tmp_path / "bad.csv",
            ["scheme", "line", "length_m", "rate_mbit"],
            [["zf", 1, 25.0, 900.0]],
        )
        with pytest.raises(SchemaError, match="rate_mbit"):
            render(PlotSpec(path, "bar", tmp_path / "x.png"))

    def test_line_kind_rejects_bar_schema(self, bar_csv, tmp_path):
        with pytest.raises(SchemaError):
            render(PlotSpec(bar_csv, "line", tmp_path / "x.png"))

    def test_bar_kind_rejects_line_schema(self, fig5_csv, tmp_path):
        with pytest.raises(SchemaError):
            render(PlotSpec(fig5_csv, "bar", tmp_path / "x.png"))

    def test_empty_input_rejected(self, tmp_path):
        path = write_csv(tmp_path / "empty.csv", BAR_HEADER, [])
        with pytest.raises(SchemaError, match="no data rows"):
            render(PlotSpec(path, "bar", tmp_path / "x.png"))

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(SchemaError, match="not found"):
            render(PlotSpec(tmp_path / "absent.csv", "bar", tmp_path / "x.png"))

    def test_bad_kind_rejected(self, bar_csv, tmp_path):
        with pytest.raises(SchemaError):
            PlotSpec(bar_csv, "scatter", tmp_path / "x.png")

    def test_values_plotted_equal_values_read(self, fig6_csv, tmp_path):
        # canceler_on must split rows exactly; a missing series is an error
        path = write_csv(
            tmp_path / "oneflag.csv",
            FIG6_HEADER,
            [[-90.0, 0, 8000.0, 1000.0]],
        )
        with pytest.raises(SchemaError, match="canceler_on=1"):
            render(PlotSpec(path, "line", tmp_path / "x.png"))


class TestCli:
    def test_render_exit_zero(self, fig5_csv, tmp_path, capsys):
        out = tmp_path / "fig5.png"
        assert main(["--kind", "line", "--in", str(fig5_csv),
                     "--out", str(out)]) == 0
        assert str(out) in capsys.readouterr().out
        assert out.is_file()

    def test_schema_error_exit_two(self, fig5_csv, tmp_path, capsys):
        assert main(["--kind", "bar", "--in", str(fig5_csv),
                     "--out", str(tmp_path / "x.png")]) == 2
        assert "schema" in capsys.readouterr().err
