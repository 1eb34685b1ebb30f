import json
import subprocess
import sys

import pytest

from ngssk_render.cli import main
from ngssk_render.render import RenderError, build_figure, build_plot_spec, render

CSV_HEADER = "snr_db,metric,value,ci_low,ci_high,scenario\n"


def write_bundle(root, chart="line", y_scale="log", drop_csv=False, empty_csv=False):
    rows_a = "0,ber,0.4,,,s\n10,ber,0.1,0.08,0.12,s\n"
    rows_b = "0,ber,0.3,,,s\n10,ber,0.05,,,s\n"
    (root / "a.csv").write_text(CSV_HEADER + rows_a)
    if not drop_csv:
        text = CSV_HEADER if empty_csv else CSV_HEADER + rows_b
        (root / "b.csv").write_text(text)
    manifest = {
        "figure_id": 99,
        "title": "synthetic",
        "x_label": "SNR (dB)",
        "y_label": "BER",
        "y_scale": y_scale,
        "chart": chart,
        "series": [
            {"name": "alpha", "csv": "a.csv", "metric": "ber", "scenario": "s"},
            {"name": "beta", "csv": "b.csv", "metric": "ber", "scenario": "s"},
        ],
        "notes": [],
    }
    path = root / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return path


class TestSyntheticBundles:
    def test_renders_svg(self, tmp_path):
        manifest = write_bundle(tmp_path)
        out = tmp_path / "plot.svg"
        assert main(["--manifest", str(manifest), "--out", str(out)]) == 0
        body = out.read_text()
        assert "<svg" in body
        assert "alpha" in body and "beta" in body  # legend text present

    def test_log_scale_applied(self, tmp_path):
        manifest = write_bundle(tmp_path, y_scale="log")
        spec = build_plot_spec(str(manifest), str(tmp_path / "x.svg"))
        fig = build_figure(spec)
        assert fig.axes[0].get_yscale() == "log"

    def test_linear_scale_applied(self, tmp_path):
        manifest = write_bundle(tmp_path, y_scale="linear")
        spec = build_plot_spec(str(manifest), str(tmp_path / "x.svg"))
        assert build_figure(spec).axes[0].get_yscale() == "linear"

    def test_bar_chart(self, tmp_path):
        manifest = write_bundle(tmp_path, chart="bar", y_scale="linear")
        spec = build_plot_spec(str(manifest), str(tmp_path / "x.svg"))
        fig = build_figure(spec)
        assert len(fig.axes[0].patches) > 0

    def test_rerender_byte_identical(self, tmp_path):
        manifest = write_bundle(tmp_path)
        out1, out2 = tmp_path / "p1.svg", tmp_path / "p2.svg"
        render(str(manifest), str(out1))
        render(str(manifest), str(out2))
        assert out1.read_bytes() == out2.read_bytes()

    def test_png_output(self, tmp_path):
        manifest = write_bundle(tmp_path)
        out = tmp_path / "plot.png"
        assert main(["--manifest", str(manifest), "--out", str(out), "--format", "png"]) == 0
        assert out.read_bytes()[:4] == b"\x89PNG"

    def test_missing_series_named(self, tmp_path, capsys):
        manifest = write_bundle(tmp_path, drop_csv=True)
        code = main(["--manifest", str(manifest), "--out", str(tmp_path / "x.svg")])
        assert code != 0
        assert "beta" in capsys.readouterr().err

    def test_empty_csv_rejected(self, tmp_path, capsys):
        manifest = write_bundle(tmp_path, empty_csv=True)
        code = main(["--manifest", str(manifest), "--out", str(tmp_path / "x.svg")])
        assert code != 0
        assert "beta" in capsys.readouterr().err

    def test_inputs_not_mutated(self, tmp_path):
        manifest = write_bundle(tmp_path)
        before = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        render(str(manifest), str(tmp_path / "out.svg"))
        after = {p.name: p.read_bytes() for p in tmp_path.iterdir() if p.name in before}
        assert before == after

    def test_every_series_gets_a_style(self, tmp_path):
        manifest = write_bundle(tmp_path)
        spec = build_plot_spec(str(manifest), str(tmp_path / "x.svg"))
        assert set(spec.styles) == {"alpha", "beta"}


@pytest.fixture(scope="session")
def figure_bundles(tmp_path_factory):
    """The four real bundles, produced through the upstream CLI at small scale."""
    root = tmp_path_factory.mktemp("bundles")
    paths = {}
    for fid in (3, 4, 5, 6):
        out_dir = root / f"fig{fid}"
        proc = subprocess.run(
            [
                sys.executable, "-m", "ngssk.cli", "figure",
                "--id", str(fid), "--out", str(out_dir),
                "--trials", "2000", "--seed", "3",
            ],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        paths[fid] = out_dir / f"figure{fid}_manifest.json"
    return paths


class TestRealBundles:
    def test_all_four_figures_render_to_svg(self, figure_bundles, tmp_path):
        for fid, manifest_path in figure_bundles.items():
            out = tmp_path / f"figure{fid}.svg"
            assert main(["--manifest", str(manifest_path), "--out", str(out)]) == 0
            body = out.read_text()
            assert "<svg" in body
            manifest = json.loads(manifest_path.read_text())
            for entry in manifest["series"]:
                assert entry["name"] in body  # complete legend

    def test_ber_figure_has_log_axis(self, figure_bundles, tmp_path):
        spec = build_plot_spec(str(figure_bundles[3]), str(tmp_path / "f3.svg"))
        assert build_figure(spec).axes[0].get_yscale() == "log"

    def test_sweep_figure_is_bar_chart(self, figure_bundles, tmp_path):
        spec = build_plot_spec(str(figure_bundles[6]), str(tmp_path / "f6.svg"))
        fig = build_figure(spec)
        assert len(fig.axes[0].patches) == 2 * 7  # two schemes, seven antenna counts
