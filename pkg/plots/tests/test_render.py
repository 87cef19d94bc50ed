"""Rendering checks for the four figure kinds against golden CSVs."""

import math
from pathlib import Path

import matplotlib.pyplot as plt
import pytest

from ucbvlab_plots import (
    FIGURE_KINDS,
    EmptyDataError,
    SchemaMismatchError,
    build_figure,
    render,
)
from ucbvlab_plots import cli
from ucbvlab_plots.csvin import read_experiment_csv

GOLDEN = Path(__file__).parent / "golden"

KIND_TO_CSV = {
    "arm-dist": GOLDEN / "arm_distribution_seed31.csv",
    "phase": GOLDEN / "phase_sweep_seed32.csv",
    "regret": GOLDEN / "regret_seed33.csv",
    "zstat": GOLDEN / "zstat_seed34.csv",
}


@pytest.fixture(autouse=True)
def _close_figures():
    yield
    plt.close("all")


def _write_csv(path, header, rows, config_line=None):
    lines = []
    if config_line is not None:
        lines.append(config_line)
    lines.append(",".join(header))
    lines.extend(",".join(row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _legend_labels(ax):
    return [t.get_text() for t in ax.get_legend().get_texts()]


def test_every_kind_is_mapped():
    assert set(FIGURE_KINDS) == set(KIND_TO_CSV)


@pytest.mark.parametrize("kind", FIGURE_KINDS)
def test_each_kind_renders_from_golden_csv(kind, tmp_path):
    out = tmp_path / f"{kind}.png"
    got = render(KIND_TO_CSV[kind], kind, out)
    assert Path(got) == out
    assert out.exists() and out.stat().st_size > 0


def test_phase_figure_has_prediction_line_and_band():
    config, header, rows = read_experiment_csv(KIND_TO_CSV["phase"])
    fig = build_figure("phase", config, header, rows)
    ax = fig.axes[0]
    # two empirical medians plus the prediction, then the band
    assert len(ax.lines) == 3
    assert len(ax.collections) == 1
    labels = _legend_labels(ax)
    assert "prediction" in labels
    assert "confidence band" in labels
    assert ax.get_xscale() == "log" and ax.get_yscale() == "log"


def test_arm_dist_overlays_one_histogram_per_policy():
    config, header, rows = read_experiment_csv(KIND_TO_CSV["arm-dist"])
    fig = build_figure("arm-dist", config, header, rows)
    ax = fig.axes[0]
    assert sorted(_legend_labels(ax)) == ["CanonicalUcb", "UcbV"]
    assert len(ax.patches) > 0
    assert str(config["horizon"]) in ax.get_title()


def test_zstat_draws_densities_and_normal_curve():
    config, header, rows = read_experiment_csv(KIND_TO_CSV["zstat"])
    fig = build_figure("zstat", config, header, rows)
    ax = fig.axes[0]
    labels = _legend_labels(ax)
    assert "standard normal" in labels and len(labels) == 3
    # the single Line2D is the overlay; its peak sits at the normal mode
    (curve,) = ax.lines
    assert max(curve.get_ydata()) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi))


def test_regret_shows_mean_and_bound():
    config, header, rows = read_experiment_csv(KIND_TO_CSV["regret"])
    fig = build_figure("regret", config, header, rows)
    ax = fig.axes[0]
    labels = _legend_labels(ax)
    assert "mean regret" in labels and "bound" in labels
    assert ax.get_yscale() == "log"


def test_wrong_kind_for_schema_names_missing_column(tmp_path):
    out = tmp_path / "phase.png"
    with pytest.raises(SchemaMismatchError, match="lambda") as excinfo:
        render(KIND_TO_CSV["arm-dist"], "phase", out)
    assert excinfo.value.column == "lambda"
    assert not out.exists()


def test_header_only_csv_is_rejected_without_output(tmp_path):
    src = tmp_path / "empty_rows.csv"
    _write_csv(src, ["policy", "rep_index", "seed", "n_1", "n_2", "regret"], [])
    out = tmp_path / "hist.png"
    with pytest.raises(EmptyDataError):
        render(src, "arm-dist", out)
    assert not out.exists()


def test_summary_only_zstat_is_rejected(tmp_path):
    src = tmp_path / "summaries.csv"
    _write_csv(
        src,
        ["row_type", "policy", "rep_index", "seed", "z_2", "ks", "n_defined"],
        [["summary", "UcbV", "", "", "", "0.1", "100"]],
    )
    with pytest.raises(EmptyDataError):
        render(src, "zstat", tmp_path / "z.png")


def test_unknown_extra_column_warns_but_renders(tmp_path):
    src = tmp_path / "extra.csv"
    _write_csv(
        src,
        ["policy", "n_1", "note"],
        [["UcbV", "40", "x"], ["UcbV", "60", "y"]],
    )
    out = tmp_path / "hist.png"
    with pytest.warns(UserWarning, match="note"):
        render(src, "arm-dist", out)
    assert out.exists() and out.stat().st_size > 0


def test_non_numeric_cell_names_its_column(tmp_path):
    src = tmp_path / "bad.csv"
    _write_csv(src, ["policy", "n_1"], [["UcbV", "oops"]])
    out = tmp_path / "hist.png"
    with pytest.raises(SchemaMismatchError, match="n_1") as excinfo:
        render(src, "arm-dist", out)
    assert excinfo.value.column == "n_1"
    assert not out.exists()


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown figure kind"):
        render(KIND_TO_CSV["regret"], "violin", tmp_path / "v.png")


def test_blank_file_rejected(tmp_path):
    src = tmp_path / "blank.csv"
    src.write_text("", encoding="utf-8")
    with pytest.raises(ValueError, match="empty"):
        render(src, "arm-dist", tmp_path / "b.png")


def test_rerender_is_byte_identical(tmp_path):
    a = render(KIND_TO_CSV["regret"], "regret", tmp_path / "a.png")
    b = render(KIND_TO_CSV["regret"], "regret", tmp_path / "b.png")
    assert Path(a).read_bytes() == Path(b).read_bytes()


def test_config_comment_round_trip():
    config, header, rows = read_experiment_csv(KIND_TO_CSV["arm-dist"])
    assert config["seed"] == 31 and config["horizon"] == 2000
    assert header[0] == "policy"
    # two policies, 200 repetitions each
    assert len(rows) == 400


def test_cli_render_writes_and_prints_path(tmp_path, capsys):
    out = tmp_path / "phase.png"
    code = cli.main(["render", str(KIND_TO_CSV["phase"]), "--kind", "phase", "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out.strip() == str(out)
    assert out.exists()


def test_cli_unknown_kind_exits_1(tmp_path, capsys):
    code = cli.main(
        ["render", str(KIND_TO_CSV["phase"]), "--kind", "violin", "--out", str(tmp_path / "v.png")]
    )
    assert code == 1
    assert "violin" in capsys.readouterr().err


def test_cli_missing_file_exits_1(tmp_path, capsys):
    code = cli.main(
        ["render", str(tmp_path / "nope.csv"), "--kind", "phase", "--out", str(tmp_path / "p.png")]
    )
    assert code == 1


def test_cli_schema_mismatch_exits_1(tmp_path, capsys):
    out = tmp_path / "p.png"
    code = cli.main(["render", str(KIND_TO_CSV["zstat"]), "--kind", "regret", "--out", str(out)])
    assert code == 1
    assert "sigma1" in capsys.readouterr().err
    assert not out.exists()


def test_cli_no_command_exits_1(capsys):
    assert cli.main([]) == 1
