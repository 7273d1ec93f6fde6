import csv
import json

import pytest

from fairvax import (
    SolveConfig,
    compare,
    compute_distances,
    evaluate,
    fairness_metrics,
    generate_clustered,
    write_report_csv,
    write_report_json,
)
from fairvax.formulation import Solution
from fairvax.harness import REPORT_CSV_COLUMNS, REPORT_CSV_VERSION, default_solve_config


class TestFairnessMetrics:
    def _evaluated(self, doses, tiny):
        dm = compute_distances(tiny)
        sol = Solution((1, 2), {1: 1, 2: 2}, doses)
        return evaluate(tiny, dm, sol)

    def test_perfect_equity(self, tiny2x2):
        fm = fairness_metrics(self._evaluated({(1, 1): 10, (2, 2): 10}, tiny2x2))
        assert fm.fill_spread == 0.0
        assert fm.fill_std == 0.0
        assert fm.dist_spread == 0.0

    def test_half_fill_spread(self, tiny2x2):
        fm = fairness_metrics(self._evaluated({(1, 1): 10, (2, 2): 5}, tiny2x2))
        assert fm.fill_spread == pytest.approx(0.5)
        assert fm.beta == pytest.approx(0.75)
        assert fm.fill_mean == pytest.approx(0.75)
        assert fm.fill_min == pytest.approx(0.5)
        assert fm.fill_max == pytest.approx(1.0)

    def test_zero_doses(self, tiny2x2):
        fm = fairness_metrics(self._evaluated({}, tiny2x2))
        assert fm.beta == 0.0
        assert fm.fill_spread == 0.0


class TestCompare:
    def test_tiny_fixture_gap_zero(self, tiny2x2):
        report = compare(tiny2x2, seed=0)
        assert report.gap_abs == pytest.approx(0.0, abs=1e-9)
        assert report.sites_match is True
        assert report.site_jaccard == pytest.approx(1.0)

    def test_gap_never_negative(self):
        for seed in (101, 102, 103, 104, 105):
            inst = generate_clustered(seed=seed, num_clusters=2,
                                      zones_per_cluster=2, num_sites=3)
            report = compare(inst, seed=seed)
            if report.gap_abs is not None:
                assert report.gap_abs >= -1e-9

    def test_oversized_instance_skips_exact(self):
        inst = generate_clustered(seed=1, num_clusters=4, zones_per_cluster=(8, 9),
                                  num_sites=10)
        report = compare(inst, seed=1)
        assert report.exact is None
        assert "heuristic" in report.exact_skipped_reason
        assert report.gap_abs is None


class TestReportFiles:
    def _mask_walls_csv(self, text: str) -> str:
        lines = text.splitlines()
        header = lines[1].split(",")
        wall_idx = [header.index("exact_wall_s"), header.index("heur_wall_s")]
        row = lines[2].split(",")
        for i in wall_idx:
            row[i] = "X"
        return "\n".join([lines[0], lines[1], ",".join(row)])

    def test_csv_schema(self, tiny2x2, tmp_path):
        report = compare(tiny2x2, seed=0)
        path = tmp_path / "report.csv"
        write_report_csv(report, path)
        text = path.read_text()
        lines = text.splitlines()
        assert lines[0] == REPORT_CSV_VERSION
        assert lines[1].split(",") == REPORT_CSV_COLUMNS
        with path.open() as fh:
            fh.readline()  # version comment
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        assert rows[0]["sites_match"] == "true"

    def test_csv_byte_stable_modulo_wall_times(self, tiny2x2, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_report_csv(compare(tiny2x2, seed=0), a)
        write_report_csv(compare(tiny2x2, seed=0), b)
        assert self._mask_walls_csv(a.read_text()) == self._mask_walls_csv(b.read_text())

    def test_json_byte_stable_modulo_wall_times(self, tiny2x2, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_report_json(compare(tiny2x2, seed=0), a)
        write_report_json(compare(tiny2x2, seed=0), b)

        def normalize(path):
            data = json.loads(path.read_text())
            data.pop("exact_wall_s")
            data.pop("heur_wall_s")
            data["heuristic_diagnostics"].pop("wall_time_s")
            return json.dumps(data, sort_keys=True)

        assert normalize(a) == normalize(b)

    def test_json_contents(self, tiny2x2, tmp_path):
        path = tmp_path / "report.json"
        write_report_json(compare(tiny2x2, seed=0), path)
        data = json.loads(path.read_text())
        assert data["exact"]["status"] == "optimal"
        assert data["sites_match"] is True
        assert data["space_full"] == "4^2"
        assert data["heuristic"]["metrics"]["objective"] == pytest.approx(1.0)


class TestEnvOverride:
    def test_time_limit_env(self, monkeypatch):
        monkeypatch.setenv("FAIRVAX_TIME_LIMIT", "12.5")
        cfg = default_solve_config()
        assert cfg.time_limit == 12.5

    def test_invalid_env_rejected(self, monkeypatch):
        monkeypatch.setenv("FAIRVAX_TIME_LIMIT", "soon")
        with pytest.raises(ValueError):
            default_solve_config()

    def test_default_when_unset(self, monkeypatch):
        monkeypatch.delenv("FAIRVAX_TIME_LIMIT", raising=False)
        assert default_solve_config().time_limit == SolveConfig().time_limit
