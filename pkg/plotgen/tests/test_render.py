import shutil
from pathlib import Path

import numpy as np
import pytest

from plotgen.cli import main
from plotgen.render import (PlotSpec, RenderError, SCHEMAS, build_figure,
                            check_schema, read_columns, render)

GOLDEN = Path(__file__).parent / "data" / "golden"
FIGURES = sorted(SCHEMAS)


@pytest.mark.parametrize("fid", FIGURES)
def test_render_all_golden_figures(fid, tmp_path):
    out = tmp_path / f"{fid}.svg"
    code = main(["render", "--figure", fid, "--in", str(GOLDEN / f"{fid}.csv"),
                 "--out", str(out)])
    assert code == 0
    assert out.exists() and out.stat().st_size > 1000


@pytest.mark.parametrize("fid", FIGURES)
def test_byte_identical_reruns(fid, tmp_path):
    spec_a = PlotSpec(fid, GOLDEN / f"{fid}.csv", tmp_path / "a.svg")
    spec_b = PlotSpec(fid, GOLDEN / f"{fid}.csv", tmp_path / "b.svg")
    render(spec_a)
    render(spec_b)
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_png_output(tmp_path):
    out = render(PlotSpec("ratios", GOLDEN / "ratios.csv", tmp_path / "r.png", "png"))
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    render(PlotSpec("ratios", GOLDEN / "ratios.csv", tmp_path / "r2.png", "png"))
    assert (tmp_path / "r.png").read_bytes() == (tmp_path / "r2.png").read_bytes()


def test_histogram_contains_normal_overlay(tmp_path):
    out = tmp_path / "h.svg"
    render(PlotSpec("ms_histogram", GOLDEN / "ms_histogram.csv", out))
    assert 'id="normal-overlay"' in out.read_text()


def test_rh_bounds_uses_log_axis():
    cols = read_columns(GOLDEN / "rh_bounds.csv")
    fig = build_figure(PlotSpec("rh_bounds", "x", "y"), cols)
    try:
        assert fig.axes[0].get_yscale() == "log"
    finally:
        import matplotlib.pyplot as plt

        plt.close(fig)


def test_ratios_reference_lines():
    cols = read_columns(GOLDEN / "ratios.csv")
    fig = build_figure(PlotSpec("ratios", "x", "y"), cols)
    try:
        levels = sorted(line.get_ydata()[0] for line in fig.axes[0].lines
                        if len(set(line.get_ydata())) == 1)
        assert levels[0] == 1.0
        assert levels[1] == pytest.approx(1.03)
        assert levels[2] == pytest.approx(1.1229, abs=1e-3)
    finally:
        import matplotlib.pyplot as plt

        plt.close(fig)


def test_missing_column_reports_diff(tmp_path):
    src = (GOLDEN / "ratios.csv").read_text().splitlines()
    header = src[0].split(",")
    drop = header.index("ratio_tilde")
    rows = [",".join(v for i, v in enumerate(line.split(",")) if i != drop)
            for line in src]
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(rows) + "\n")
    code = main(["render", "--figure", "ratios", "--in", str(bad),
                 "--out", str(tmp_path / "x.svg")])
    assert code == 1
    with pytest.raises(RenderError, match="ratio_tilde"):
        check_schema("ratios", read_columns(bad))


def test_nan_in_required_column_fails(tmp_path):
    src = (GOLDEN / "ratios.csv").read_text().splitlines()
    fields = src[2].split(",")
    fields[1] = "nan"
    src[2] = ",".join(fields)
    bad = tmp_path / "nan.csv"
    bad.write_text("\n".join(src) + "\n")
    code = main(["render", "--figure", "ratios", "--in", str(bad),
                 "--out", str(tmp_path / "x.svg")])
    assert code == 1


def test_empty_optional_column_is_omitted(tmp_path):
    src = (GOLDEN / "ratios.csv").read_text().splitlines()
    header = src[0].split(",")
    drop = header.index("ratio_tau")
    rows = [",".join(v if i != drop else "" for i, v in enumerate(line.split(",")))
            for line in src[1:]]
    bad = tmp_path / "no_tau.csv"
    bad.write_text(src[0] + "\n" + "\n".join(rows) + "\n")
    code = main(["render", "--figure", "ratios", "--in", str(bad),
                 "--out", str(tmp_path / "x.svg")])
    assert code == 0 and (tmp_path / "x.svg").exists()


def test_unknown_figure_rejected(tmp_path):
    with pytest.raises(RenderError):
        PlotSpec("fig42", "a.csv", "b.svg")
    with pytest.raises(SystemExit) as exc:
        main(["render", "--figure", "fig42", "--in", "a.csv", "--out", "b.svg"])
    assert exc.value.code == 2


def test_missing_input_file(tmp_path):
    code = main(["render", "--figure", "ratios", "--in", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "x.svg")])
    assert code == 1


def test_read_columns_drops_padding(tmp_path):
    csv_path = tmp_path / "t.csv"
    csv_path.write_text("a,b\n1,2\n3,\n5,\n")
    cols = read_columns(csv_path)
    assert cols["a"].tolist() == [1.0, 3.0, 5.0]
    assert cols["b"].tolist() == [2.0]
