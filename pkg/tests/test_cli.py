import json
from pathlib import Path

import numpy as np

from tce.cli import main

CONFIG = """\
[venue]
precinct_min = 0 0
precinct_max = 50 80
outside_regions =
    50 15 60 65

[time]
step_seconds = 300
instant_count = 12

[input]
mode = generate

[scenario]
user_count = 6
speed_min = 0
speed_max = 0.08
pause_instants = 1
attractors =
    stage 0.5  2 28 14 52
    food  0.3  8 70 30 78
    exit  0.2 51 30 59 50

[traffic]
tiers =
    1/3  0
    1/3 10
    1/3 10

[clustering]
k_inside = 3
k_outside = 1

[prediction]
window_size = 4
scope = per_user
run_count = 2
base_seed = 5

[report]
plot_users = 0 1
bin_count = 10
"""

MINIMAL_PIPELINE = """\
[venue]
precinct_min = 0 0
precinct_max = 10 10

[time]
step_seconds = 60
instant_count = 2

[input]
mode = generate

[scenario]
user_count = 1
speed_min = 0
speed_max = 0.01
attractors =
    a 1.0 1 1 9 9

[traffic]
tiers =
    1.0 5

[clustering]
k_inside = 1

[prediction]
window_size = 1
base_seed = 3
"""


def write_cfg(tmp_path, text=CONFIG, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def read_manifest(out_dir):
    return json.loads((Path(out_dir) / "manifest.json").read_text())


class TestRun:
    def test_full_pipeline_outputs(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        for name in [
            "trace.csv", "traffic.csv", "zones.csv", "labels.csv",
            "general_matrix_probs.csv", "general_matrix_counts.csv",
            "predictions_run0.csv", "predictions_run1.csv",
            "zone_series_run0.csv", "errors_run0.csv", "histogram.csv",
            "plots/positions_scatter.csv", "plots/positions_scatter.svg",
            "plots/histogram.svg", "plots/user0_run0_zones.csv",
            "plots/user1_run1_zones.svg", "plots/zone_users_run0.svg",
            "plots/zone_traffic_run1.svg", "manifest.json",
        ]:
            assert (out / name).exists(), name
        assert "mean error" in capsys.readouterr().out

    def test_manifest_lists_every_file_with_hash(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "out"
        main(["run", "--config", str(cfg), "--out", str(out)])
        manifest = read_manifest(out)
        disk = {
            str(p.relative_to(out))
            for p in out.rglob("*")
            if p.is_file() and p.name != "manifest.json"
        }
        assert set(manifest["files"]) == disk
        import hashlib

        for rel, digest in manifest["files"].items():
            assert hashlib.sha256((out / rel).read_bytes()).hexdigest() == digest
        assert manifest["run_seeds"] == [5, 6]

    def test_scatter_rows_equal_users_times_instants(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "out"
        main(["run", "--config", str(cfg), "--out", str(out)])
        rows = (out / "plots" / "positions_scatter.csv").read_text().splitlines()
        assert len(rows) - 1 == 6 * 12

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(cfg), "--out", str(out1)])
        main(["run", "--config", str(cfg), "--out", str(out2)])
        files1 = sorted(p.relative_to(out1) for p in out1.rglob("*") if p.is_file())
        files2 = sorted(p.relative_to(out2) for p in out2.rglob("*") if p.is_file())
        assert files1 == files2
        for rel in files1:
            if rel.name == "manifest.json":
                m1, m2 = read_manifest(out1), read_manifest(out2)
                for volatile in ("created_at", "elapsed_seconds"):
                    m1.pop(volatile), m2.pop(volatile)
                assert m1 == m2
            else:
                assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes(), rel

    def test_seed_override_changes_outputs(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(cfg), "--out", str(out1)])
        main(["run", "--config", str(cfg), "--out", str(out2), "--seed", "99"])
        assert (out1 / "trace.csv").read_bytes() != (out2 / "trace.csv").read_bytes()

    def test_minimal_pipeline_single_prediction(self, tmp_path):
        cfg = write_cfg(tmp_path, MINIMAL_PIPELINE)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        pred_rows = (out / "predictions_run0.csv").read_text().splitlines()
        assert len(pred_rows) - 1 == 2  # 1 user x 2 instants
        err_rows = (out / "errors_run0.csv").read_text().splitlines()
        assert len(err_rows) - 1 == 1  # exactly one predicted instant
        assert read_manifest(out)["summary"]["mean_error"] == 0.0

    def test_empty_plot_selection_still_succeeds(self, tmp_path):
        text = CONFIG.replace("plot_users = 0 1", "plot_users =")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        assert not list((out / "plots").glob("user*"))

    def test_unknown_plot_user_is_config_error(self, tmp_path):
        text = CONFIG.replace("plot_users = 0 1", "plot_users = 0 99")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 2

    def test_partial_outputs_removed_on_failure(self, tmp_path):
        text = CONFIG.replace("plot_users = 0 1", "plot_users = 0 99")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 2
        assert not out.exists()

    def test_non_empty_out_dir_refused(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "out"
        out.mkdir()
        (out / "keep.txt").write_text("hands off")
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 2
        assert (out / "keep.txt").read_text() == "hands off"

    def test_bad_config_exit_code(self, tmp_path):
        cfg = write_cfg(tmp_path, CONFIG.replace("[time]", "[tim]"))
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_output_section_supplies_directory(self, tmp_path):
        out = tmp_path / "from_config"
        cfg = write_cfg(tmp_path, CONFIG + f"\n[output]\ndirectory = {out}\n")
        assert main(["run", "--config", str(cfg)]) == 0
        assert (out / "manifest.json").exists()

    def test_missing_out_dir_is_config_error(self, tmp_path):
        cfg = write_cfg(tmp_path)
        assert main(["run", "--config", str(cfg)]) == 2

    def test_stage_tag_in_error_message(self, tmp_path, capsys):
        text = CONFIG.replace("plot_users = 0 1", "plot_users = 0 99")
        cfg = write_cfg(tmp_path, text)
        main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert "[report]" in capsys.readouterr().err

    def test_infeasible_clustering_exit_code(self, tmp_path, capsys):
        # a single frozen user gives one distinct point, too few for k=3
        text = CONFIG.replace("user_count = 6", "user_count = 1")
        text = text.replace("speed_max = 0.08", "speed_max = 0")
        cfg = write_cfg(tmp_path, text)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 4
        assert "[clustering]" in capsys.readouterr().err


LOAD_SECTIONS = """\
[input]
mode = load
trace_file = {trace}
traffic_file = {traffic}
{extra}
"""


class TestLoadMode:
    def _load_config_text(self, trace, traffic, extra=""):
        head, _, tail = CONFIG.partition("[input]\nmode = generate\n")
        return head + LOAD_SECTIONS.format(trace=trace, traffic=traffic, extra=extra) + tail

    def test_load_csv_reproduces_generate_run(self, tmp_path):
        gen_cfg = write_cfg(tmp_path)
        full = tmp_path / "full"
        main(["run", "--config", str(gen_cfg), "--out", str(full)])

        text = self._load_config_text(full / "trace.csv", full / "traffic.csv")
        load_cfg = write_cfg(tmp_path, text, name="load.ini")
        out = tmp_path / "loaded"
        assert main(["run", "--config", str(load_cfg), "--out", str(out)]) == 0
        for name in ("trace.csv", "labels.csv", "errors_run0.csv", "histogram.csv"):
            assert (out / name).read_bytes() == (full / name).read_bytes(), name

    def test_load_waypoint_lines(self, tmp_path):
        # two users: one parked at the stage, one walking along the bottom
        wp = tmp_path / "wp.txt"
        wp.write_text(
            "0 5 40 3300 5 40\n"
            "0 10 5 3300 20 5\n"
        )
        traffic = tmp_path / "rates.csv"
        traffic.write_text("user_id,mean_traffic_mbps\n0,1.0\n1,2.0\n")
        text = self._load_config_text(wp, traffic, extra="trace_format = waypoint")
        text = text.replace("k_inside = 3", "k_inside = 2")
        cfg = write_cfg(tmp_path, text, name="wp.ini")
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        rows = (out / "trace.csv").read_text().splitlines()
        assert len(rows) - 1 == 2 * 12
        assert rows[1] == "0,0,5.0,40.0"


class TestStageSubcommands:
    def test_stagewise_matches_run(self, tmp_path):
        cfg = write_cfg(tmp_path)
        full = tmp_path / "full"
        main(["run", "--config", str(cfg), "--out", str(full)])

        gen = tmp_path / "gen"
        assert main(["generate", "--config", str(cfg), "--out", str(gen)]) == 0
        assert (gen / "trace.csv").read_bytes() == (full / "trace.csv").read_bytes()

        clus = tmp_path / "clus"
        assert main([
            "cluster", "--config", str(cfg), "--out", str(clus),
            "--trace", str(gen / "trace.csv"), "--traffic", str(gen / "traffic.csv"),
        ]) == 0
        assert (clus / "zones.csv").read_bytes() == (full / "zones.csv").read_bytes()
        assert (clus / "labels.csv").read_bytes() == (full / "labels.csv").read_bytes()

        pred = tmp_path / "pred"
        assert main([
            "predict", "--config", str(cfg), "--out", str(pred),
            "--zones", str(clus / "zones.csv"), "--labels", str(clus / "labels.csv"),
        ]) == 0
        for r in range(2):
            assert (pred / f"predictions_run{r}.csv").read_bytes() == (
                full / f"predictions_run{r}.csv"
            ).read_bytes()

        rep = tmp_path / "rep"
        assert main([
            "report", "--config", str(cfg), "--out", str(rep),
            "--trace", str(gen / "trace.csv"), "--traffic", str(gen / "traffic.csv"),
            "--zones", str(clus / "zones.csv"), "--labels", str(clus / "labels.csv"),
            "--predictions", str(pred / "predictions_run0.csv"), str(pred / "predictions_run1.csv"),
        ]) == 0
        assert (rep / "histogram.csv").read_bytes() == (full / "histogram.csv").read_bytes()
        for r in range(2):
            assert (rep / f"errors_run{r}.csv").read_bytes() == (
                full / f"errors_run{r}.csv"
            ).read_bytes()
            assert (rep / f"zone_series_run{r}.csv").read_bytes() == (
                full / f"zone_series_run{r}.csv"
            ).read_bytes()

    def test_missing_data_file_exit_code(self, tmp_path):
        cfg = write_cfg(tmp_path)
        code = main([
            "cluster", "--config", str(cfg), "--out", str(tmp_path / "o"),
            "--trace", str(tmp_path / "missing.csv"), "--traffic", str(tmp_path / "missing2.csv"),
        ])
        assert code == 3

    def test_general_matrix_export_row(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "out"
        main(["run", "--config", str(cfg), "--out", str(out)])
        probs = (out / "general_matrix_probs.csv").read_text().splitlines()
        counts = (out / "general_matrix_counts.csv").read_text().splitlines()
        assert probs[0] == "zone,0,1,2,3"
        assert len(probs) == 5
        # probs rows divide the count rows by their sums
        crow = np.array(counts[1].split(",")[1:], dtype=float)
        prow = np.array(probs[1].split(",")[1:], dtype=float)
        if crow.sum():
            assert np.allclose(prow, crow / crow.sum())
