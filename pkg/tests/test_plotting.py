import re
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from motion_workbench.plotting import (
    LEFT_COLOR,
    RIGHT_COLOR,
    AxisSpec,
    EventMarker,
    PlotRegistry,
    PlotSpec,
    PlotSpecError,
    SeriesSpec,
    plot_spec_from_value,
    render_raster,
    render_svg,
)

GOLDEN_DIR = Path(__file__).parent / "golden"


def bilateral_spec():
    t = np.linspace(0, 2, 50)
    return PlotSpec(
        title="Knee flexion during walking",
        x_axis=AxisSpec(label="Time", units="s"),
        y_axis=AxisSpec(label="Angle", units="deg"),
        series=[
            SeriesSpec(name="knee left", side="left", x=t, y=30 + 25 * np.sin(2 * np.pi * t)),
            SeriesSpec(name="knee right", side="right", x=t, y=30 + 25 * np.sin(2 * np.pi * t + np.pi)),
        ],
    )


def single_spec():
    t = np.linspace(0, 1, 20)
    return PlotSpec(
        title="Hip flexion",
        x_axis=AxisSpec(label="Time", units="s"),
        y_axis=AxisSpec(label="Angle", units="deg"),
        series=[SeriesSpec(name="hip left", side="left", x=t, y=10 + 20 * t)],
    )


def marker_spec():
    t = np.linspace(0, 3, 60)
    return PlotSpec(
        title="Heel position with events",
        x_axis=AxisSpec(label="Time", units="s"),
        y_axis=AxisSpec(label="Forward position", units="m"),
        series=[SeriesSpec(name="heel left", side="left", x=t, y=0.3 * np.sin(2 * np.pi * t))],
        event_markers=[
            EventMarker(time=0.25, label="HS", side="left"),
            EventMarker(time=1.25, label="HS", side="left"),
        ],
    )


def test_two_sided_plot_polylines_and_colors():
    svg = render_svg(bilateral_spec()).decode()
    polylines = re.findall(r"<polyline[^>]*>", svg)
    assert len(polylines) == 2
    assert LEFT_COLOR in polylines[0]
    assert RIGHT_COLOR in polylines[1]
    assert LEFT_COLOR != RIGHT_COLOR


def test_mismatched_xy_rejected_naming_series():
    spec = bilateral_spec()
    spec.series[1] = SeriesSpec(name="broken", side="right", x=np.arange(5), y=np.arange(4))
    with pytest.raises(PlotSpecError) as err:
        render_svg(spec)
    assert "broken" in str(err.value)


def test_same_spec_twice_identical_bytes_distinct_ids():
    reg = PlotRegistry()
    a = reg.save_plot(bilateral_spec())
    b = reg.save_plot(bilateral_spec())
    assert a.svg == b.svg
    assert a.raster == b.raster
    assert a.plot_id != b.plot_id


def test_raster_dimensions_and_determinism():
    raster = render_raster(bilateral_spec())
    assert raster[:8] == b"\x89PNG\r\n\x1a\n"
    # IHDR width/height
    width = int.from_bytes(raster[16:20], "big")
    height = int.from_bytes(raster[20:24], "big")
    assert (width, height) == (960, 540)
    assert raster == render_raster(bilateral_spec())


def test_color_convention_across_plots():
    reg = PlotRegistry()
    refs = [reg.save_plot(bilateral_spec()), reg.save_plot(marker_spec()), reg.save_plot(single_spec())]
    left_colors = set()
    right_colors = set()
    for ref in refs:
        svg = ref.svg.decode()
        for line in re.findall(r"<polyline[^>]*>", svg):
            if LEFT_COLOR in line:
                left_colors.add(LEFT_COLOR)
            if RIGHT_COLOR in line:
                right_colors.add(RIGHT_COLOR)
    assert left_colors == {LEFT_COLOR}
    assert right_colors <= {RIGHT_COLOR}


def test_axis_tick_labels_match_data_range():
    spec = single_spec()  # x in [0, 1], y in [10, 30]
    svg = render_svg(spec)
    root = ET.fromstring(svg.decode())
    ns = {"svg": "http://www.w3.org/2000/svg"}
    x_ticks = [float(el.text) for el in root.findall(".//svg:text[@class='x-tick']", ns)]
    y_ticks = [float(el.text) for el in root.findall(".//svg:text[@class='y-tick']", ns)]
    assert x_ticks and y_ticks
    assert min(x_ticks) >= -0.2 and max(x_ticks) <= 1.2
    assert min(y_ticks) >= 5 and max(y_ticks) <= 35
    labels = [el.text for el in root.findall(".//svg:text", ns)]
    assert any("Time (s)" in (t or "") for t in labels)
    assert any("Angle (deg)" in (t or "") for t in labels)


def test_legend_always_present():
    svg = render_svg(single_spec()).decode()
    assert 'class="legend"' in svg
    assert "hip left" in svg


def test_units_required_for_time_axes():
    spec = single_spec()
    spec.x_axis = AxisSpec(label="Time", units="")
    with pytest.raises(PlotSpecError) as err:
        render_svg(spec)
    assert "units" in str(err.value)


def test_golden_files_frozen():
    fixtures = {"single": single_spec(), "bilateral": bilateral_spec(), "markers": marker_spec()}
    for name, spec in fixtures.items():
        svg_path = GOLDEN_DIR / f"{name}.svg"
        got = render_svg(spec)
        assert got == svg_path.read_bytes(), f"golden mismatch for {name}"


def test_plot_spec_from_script_map():
    doc = {
        "title": "Knee",
        "x_axis": {"label": "Time", "units": "s"},
        "y_axis": {"label": "Angle", "units": "deg"},
        "series": [{"name": "knee left", "side": "left", "x": [0.0, 1.0], "y": [5.0, 6.0]}],
        "event_markers": [{"time": 0.5, "label": "HS", "side": "left"}],
    }
    spec = plot_spec_from_value(doc)
    assert spec.title == "Knee"
    assert spec.series[0].side == "left"
    assert spec.event_markers[0].time == 0.5


def test_plot_spec_from_value_errors_name_fields():
    with pytest.raises(PlotSpecError) as err:
        plot_spec_from_value({"title": "x"})
    assert "x_axis" in str(err.value)
    with pytest.raises(PlotSpecError) as err:
        plot_spec_from_value(
            {
                "title": "x",
                "x_axis": {"label": "Time", "units": "s"},
                "y_axis": {"label": "Angle", "units": "deg"},
                "series": [{"name": "s1", "x": [1.0], "y": "bad"}],
            }
        )
    assert "s1" in str(err.value)
