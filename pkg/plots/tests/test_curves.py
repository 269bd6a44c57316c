import math

import pytest

from nvplots.curves import CurveFile, SchemaError, build_figure, render_learning_curves

GOOD = "n,value,mu0_star,branch,tolerance\n1,0.25,0.6,down,0\n2,0.148,0.43,down,0\n"


def _write(tmp_path, text, name="c.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# --- parsing -----------------------------------------------------------------------


def test_load_parses_the_frozen_schema(tmp_path):
    curve = CurveFile.load(_write(tmp_path, GOOD), "erm")
    assert curve.ns == (1, 2)
    assert curve.values == (0.25, 0.148)
    assert curve.label == "erm"


def test_label_defaults_to_the_file_stem(tmp_path):
    curve = CurveFile.load(_write(tmp_path, GOOD, name="tuned_mix.csv"))
    assert curve.label == "tuned_mix"


def test_header_mismatch_names_the_column(tmp_path):
    bad = GOOD.replace("mu0_star", "mu0")
    with pytest.raises(SchemaError, match=r"column 3 should be 'mu0_star', got 'mu0'"):
        CurveFile.load(_write(tmp_path, bad))


def test_header_with_wrong_width_is_rejected(tmp_path):
    with pytest.raises(SchemaError, match="expected 5 columns, got 4"):
        CurveFile.load(_write(tmp_path, "n,value,branch,tolerance\n1,0.2,down,0\n"))


def test_short_row_is_rejected(tmp_path):
    bad = GOOD + "3,0.1\n"
    with pytest.raises(SchemaError, match="row 4: expected 5 columns, got 2"):
        CurveFile.load(_write(tmp_path, bad))


def test_bad_n_names_row_and_column(tmp_path):
    bad = GOOD.replace("2,0.148", "two,0.148")
    with pytest.raises(SchemaError, match="row 3, column 'n'"):
        CurveFile.load(_write(tmp_path, bad))


def test_bad_value_names_row_and_column(tmp_path):
    bad = GOOD.replace("0.148", "x")
    with pytest.raises(SchemaError, match="row 3, column 'value'"):
        CurveFile.load(_write(tmp_path, bad))


def test_non_finite_value_is_rejected(tmp_path):
    bad = GOOD.replace("0.148", "inf")
    with pytest.raises(SchemaError, match="must be finite"):
        CurveFile.load(_write(tmp_path, bad))


def test_unsorted_rows_are_rejected(tmp_path):
    bad = "n,value,mu0_star,branch,tolerance\n2,0.1,0.5,up,0\n1,0.2,0.5,up,0\n"
    with pytest.raises(SchemaError, match=r"rows must be sorted, 1 follows 2"):
        CurveFile.load(_write(tmp_path, bad))


def test_header_only_file_is_rejected(tmp_path):
    with pytest.raises(SchemaError, match="no data rows"):
        CurveFile.load(_write(tmp_path, "n,value,mu0_star,branch,tolerance\n"))


def test_empty_file_is_rejected(tmp_path):
    with pytest.raises(SchemaError, match="empty file"):
        CurveFile.load(_write(tmp_path, ""))


# --- figure assembly ----------------------------------------------------------------


def _fake(ns, values, label="c"):
    return CurveFile(path="mem", label=label, ns=tuple(ns), values=tuple(values))


def test_figure_has_one_line_per_curve_plus_the_reference():
    fig = build_figure([_fake([1, 2], [0.2, 0.1]), _fake([1, 2], [0.3, 0.2])], hline=0.05)
    ax = fig.axes[0]
    assert len(ax.lines) == 3
    labels = [line.get_label() for line in ax.lines]
    assert labels[-1] == "lower bound 0.05"
    assert ax.lines[-1].get_linestyle() == "--"


def test_reference_level_below_the_data_stays_visible():
    fig = build_figure([_fake([1, 2, 3], [0.2, 0.15, 0.12])], hline=0.01)
    lo, hi = fig.axes[0].get_ylim()
    assert lo < 0.01 < hi


def test_reference_level_above_the_data_stays_visible():
    fig = build_figure([_fake([1, 2, 3], [0.02, 0.015, 0.012])], hline=0.4)
    lo, hi = fig.axes[0].get_ylim()
    assert lo < 0.4 < hi


def test_no_inputs_is_an_error():
    with pytest.raises(SchemaError, match="at least one"):
        build_figure([])


def test_inputs_are_not_mutated():
    curve = _fake([1, 2], [0.2, 0.1])
    build_figure([curve], hline=0.05)
    assert curve.ns == (1, 2) and curve.values == (0.2, 0.1)


# --- rendering ----------------------------------------------------------------------


def test_render_writes_a_png(tmp_path):
    out = tmp_path / "fig.png"
    render_learning_curves([_fake([1, 2, 3], [0.3, 0.2, 0.15])], None, str(out))
    data = out.read_bytes()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(data) > 1000


def test_rerender_is_byte_identical(tmp_path):
    curves = [_fake([1, 2, 3], [0.3, 0.2, 0.15], "a"), _fake([1, 2, 3], [0.4, 0.3, 0.2], "b")]
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    render_learning_curves(curves, 0.05, str(a))
    render_learning_curves(curves, 0.05, str(b))
    assert a.read_bytes() == b.read_bytes()


def test_vector_render_is_pdf_and_size_stable(tmp_path):
    curves = [_fake([1, 2, 3], [0.3, 0.2, 0.15])]
    a, b = tmp_path / "a.pdf", tmp_path / "b.pdf"
    render_learning_curves(curves, None, str(a), vector=True)
    render_learning_curves(curves, None, str(b), vector=True)
    assert a.read_bytes()[:5] == b"%PDF-"
    assert a.stat().st_size == b.stat().st_size


# --- end to end against real CLI output ---------------------------------------------


def test_exact_curve_with_reference_floor(cli_curves, tmp_path):
    erm = CurveFile.load(str(cli_curves["erm"]), "erm")
    knn = CurveFile.load(str(cli_curves["knn"]), "k = 5")
    out = tmp_path / "floor.png"
    render_learning_curves([erm, knn], 0.05, str(out))
    assert out.stat().st_size > 1000
    lo, hi = build_figure([erm, knn], 0.05).axes[0].get_ylim()
    assert lo < 0.05 < hi


def test_exact_curve_against_bound_curve(cli_curves, tmp_path):
    erm = CurveFile.load(str(cli_curves["erm"]), "exact")
    bound = CurveFile.load(str(cli_curves["bound"]), "bound")
    assert bound.ns == erm.ns
    assert all(b > e for b, e in zip(bound.values, erm.values))
    out = tmp_path / "gap.png"
    render_learning_curves([erm, bound], None, str(out))
    assert out.stat().st_size > 1000


def test_bound_curve_rows_parse_with_empty_mu0(cli_curves):
    bound = CurveFile.load(str(cli_curves["bound"]))
    assert len(bound.ns) == 10
    assert all(math.isfinite(v) for v in bound.values)
