import json
import os
import shutil

import numpy as np
import pytest

from excitonlight_render import cli
from excitonlight_render.figures import (FIGURE_SPECS, EmptyDataError, RenderError,
                                         load_bundle, render)

GOLDEN = os.path.join(os.path.dirname(__file__), "..", "golden")


def golden_dir(fig):
    return os.path.abspath(os.path.join(GOLDEN, f"fig{fig:02d}"))


class TestCatalog:
    def test_all_ten_figures_specified(self):
        assert sorted(FIGURE_SPECS) == list(range(1, 11))

    def test_log_scale_where_captioned(self):
        # the masked-population figures carry log y-axes
        for fig in (6, 7):
            assert all(p.log_y for p in FIGURE_SPECS[fig].panels)
        for fig in (1, 5, 10):
            assert not any(p.log_y for p in FIGURE_SPECS[fig].panels)


class TestLoadBundle:
    def test_reads_tables_and_metadata(self):
        tables, metadata = load_bundle(golden_dir(1))
        assert "fig01_gap_scan" in tables
        header, cols = tables["fig01_gap_scan"]
        assert header[0] == "delta_cm1"
        assert cols["delta_cm1"].size > 0
        assert metadata["tool"] == "excitonlight"
        assert metadata["couplings_provenance"] == "placeholder-non-paper"

    def test_missing_directory(self):
        with pytest.raises(RenderError):
            load_bundle("/nonexistent/bundle")


class TestGoldenRendering:
    @pytest.mark.parametrize("fig", [1, 5, 10])
    def test_golden_renders(self, fig, tmp_path):
        out = str(tmp_path / f"fig{fig:02d}.png")
        summary = render(golden_dir(fig), fig, out)
        assert os.path.exists(out) and os.path.getsize(out) > 0
        assert summary["series"] > 0

    @pytest.mark.parametrize("fig", [1, 5, 10])
    def test_byte_stable_across_runs(self, fig, tmp_path):
        a = str(tmp_path / "a.png")
        b = str(tmp_path / "b.png")
        render(golden_dir(fig), fig, a)
        render(golden_dir(fig), fig, b)
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_declared_axis_scales_used(self, tmp_path, monkeypatch):
        # fig 1 is linear on both axes per the catalog
        recorded = {}
        import matplotlib.axes

        orig = matplotlib.axes.Axes.set_yscale

        def spy(self, scale, **kw):
            recorded.setdefault("scales", []).append(scale)
            return orig(self, scale, **kw)

        monkeypatch.setattr(matplotlib.axes.Axes, "set_yscale", spy)
        render(golden_dir(1), 1, str(tmp_path / "f.png"))
        assert "log" not in recorded.get("scales", [])


class TestErrorPaths:
    def test_missing_column_is_descriptive(self, tmp_path):
        bundle = tmp_path / "broken"
        shutil.copytree(golden_dir(1), bundle)
        path = bundle / "fig01_gap_scan.csv"
        lines = path.read_text().splitlines()
        header = lines[0].split(",")
        drop = header.index("r_bb_eeprime_per_ps")
        rewritten = [",".join(c for i, c in enumerate(row.split(",")) if i != drop)
                     for row in lines]
        path.write_text("\n".join(rewritten) + "\n")
        with pytest.raises(RenderError, match="r_bb_eeprime_per_ps"):
            render(str(bundle), 1, str(tmp_path / "x.png"))

    def test_empty_series_draws_placeholder_and_fails(self, tmp_path):
        bundle = tmp_path / "empty"
        bundle.mkdir()
        src = os.path.join(golden_dir(1), "fig01_gap_scan.csv")
        header = open(src).readline()
        (bundle / "fig01_gap_scan.csv").write_text(header)
        out = str(tmp_path / "empty.png")
        with pytest.raises(EmptyDataError):
            render(str(bundle), 1, out)
        assert os.path.exists(out) and os.path.getsize(out) > 0

    def test_unknown_figure(self, tmp_path):
        with pytest.raises(RenderError):
            render(golden_dir(1), 42, str(tmp_path / "x.png"))


class TestCli:
    def test_render_success(self, tmp_path):
        out = str(tmp_path / "f1.png")
        code = cli.main(["render", "--bundle", golden_dir(1), "--fig", "1", "--out", out])
        assert code == 0 and os.path.exists(out)

    def test_render_empty_exit_code(self, tmp_path):
        bundle = tmp_path / "empty"
        bundle.mkdir()
        src = os.path.join(golden_dir(1), "fig01_gap_scan.csv")
        (bundle / "fig01_gap_scan.csv").write_text(open(src).readline())
        code = cli.main(["render", "--bundle", str(bundle), "--fig", "1",
                         "--out", str(tmp_path / "e.png")])
        assert code == 1

    def test_render_bad_bundle_exit_code(self, tmp_path):
        code = cli.main(["render", "--bundle", "/nonexistent", "--fig", "1",
                         "--out", str(tmp_path / "x.png")])
        assert code == 2


class TestNoSharedCode:
    def test_renderer_does_not_import_simulator(self):
        import sys
        import excitonlight_render  # noqa: F401
        # the consumer package must run from the CSV contract alone
        mods = [m for m in sys.modules if m.split(".")[0] == "excitonlight"]
        src = os.path.dirname(excitonlight_render.__file__)
        for fname in os.listdir(src):
            if fname.endswith(".py"):
                text = open(os.path.join(src, fname)).read()
                assert "import excitonlight\n" not in text
                assert "from excitonlight import" not in text
                assert "from excitonlight." not in text
