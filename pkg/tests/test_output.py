from pathlib import Path

import numpy as np
import pytest
from pyfakefs.fake_filesystem_unittest import TestCase

from dissipnet.output import Heatmap, LinePlot, emit_csv, emit_svg_plot, format_value


@pytest.mark.parametrize(
    ("value", "expected"),
    [
        (0.1, "0.1"),
        (1.0, "1.0"),
        (np.float64(2.5e-7), "0.00000025"),
        (3, "3"),
        (np.int64(-4), "-4"),
        (True, "1"),
        (np.bool_(False), "0"),
        ("bidirectional", "bidirectional"),
    ],
)
def test_format_value(value, expected: str) -> None:
    assert format_value(value) == expected


class EmitCsvTestCase(TestCase):
    def setUp(self) -> None:
        self.setUpPyfakefs()

    def test_emit_csv__no_rows__header_only(self) -> None:
        path = emit_csv(["loss", "concurrence"], [], Path("results/empty.csv"))
        self.assertEqual("loss,concurrence\n", path.read_text())

    def test_emit_csv__rows__line_feed_terminated(self) -> None:
        path = emit_csv(["loss", "concurrence"], [(0.1, 0.5), (0.2, 0.25)], Path("out.csv"))
        self.assertEqual(b"loss,concurrence\n0.1,0.5\n0.2,0.25\n", path.read_bytes())

    def test_emit_csv__creates_parent_directories(self) -> None:
        emit_csv(["x"], [(1,)], Path("a/b/c.csv"))
        self.assertTrue(Path("a/b").is_dir())

    def test_emit_csv__same_rows_twice__byte_identical(self) -> None:
        rows = [(l, np.sqrt(l), l > 0.5) for l in np.linspace(0.1, 0.9, 5)]  # noqa: E741
        first = emit_csv(["loss", "value", "flag"], rows, Path("first.csv")).read_bytes()
        second = emit_csv(["loss", "value", "flag"], rows, Path("second.csv")).read_bytes()
        self.assertEqual(first, second)

    def test_emit_csv__row_length_mismatch__raise_value_error(self) -> None:
        with self.assertRaises(ValueError):
            emit_csv(["loss", "concurrence"], [(0.1,)], Path("bad.csv"))


def test_emit_svg_plot__line_plot__byte_identical_reruns(tmp_path: Path) -> None:
    plot = LinePlot([0.01, 0.1, 1.0], {"cascaded": [0.9, 0.7, 0.1], "bidirectional": [0.95, 0.8, 0.2]}, "loss", "C")
    first = emit_svg_plot(plot, tmp_path / "first.svg").read_bytes()
    second = emit_svg_plot(plot, tmp_path / "second.svg").read_bytes()
    assert first.startswith(b"<?xml")
    assert first == second


def test_emit_svg_plot__heatmap__written(tmp_path: Path) -> None:
    values = np.arange(12, dtype=float).reshape(3, 4) / 12
    plot = Heatmap([0.0, 0.05, 0.1], [0.1, 1.0, 10.0, 100.0], values, "amplitude", "rate", logx=False)
    path = emit_svg_plot(plot, tmp_path / "nested" / "map.svg")
    assert path.exists()
    assert b"<svg" in path.read_bytes()
