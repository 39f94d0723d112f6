"""Qualitative reproduction on the default two-building benchmark.

The end-to-end checks retrain the full-size encoder several times and take
minutes; they are deselected by default (run with ``pytest -m slow``).
"""

from pathlib import Path

import numpy as np
import pytest

from stellar_loc.lib.result import unwrap
from stellar_loc.lib.storage.csvfile import load_csv, save_csv
from stellar_loc.lib.synthgen import benchmark_building, default_benchmark
from stellar_loc.models import EvalReport, ExperimentConfig, FingerprintDataset, SweepConfig
from stellar_loc.operations import model_hash, stellar_predictor
from stellar_loc.workflows import compare_baselines, sweep_d, sweep_samples, train_run
from stellar_loc.workflows.pipeline import evaluate_frozen, resolve_cells

SEED = 42


@pytest.fixture(scope="module")
def building_a() -> FingerprintDataset:
    return benchmark_building("A", SEED).dataset


@pytest.fixture(scope="module")
def cfg() -> ExperimentConfig:
    return ExperimentConfig(
        seed=SEED, sweeps=SweepConfig(d_grid=(0.1, 0.6, 0.9), samples_grid=(1, 5))
    )


@pytest.fixture(scope="module")
def compared(cfg: ExperimentConfig, building_a: FingerprintDataset) -> EvalReport:
    return unwrap(compare_baselines(cfg, building_a))


def _mean(report: EvalReport, arm: str, min_ci: int = 0) -> float:
    return float(
        np.mean([c.mean_error_m for c in report.cells if c.arm == arm and c.ci >= min_ci])
    )


class TestBenchmarkShape:
    def test_dimensions(self) -> None:
        for building in default_benchmark(SEED).values():
            ds = building.dataset
            assert len(ds.rps) == 16
            assert len(ds.ap_universe) == 40
            assert ds.devices == ("dev-a", "dev-b", "dev-c", "dev-d")
            assert ds.cis == tuple(range(17))
            assert len(ds.records) == 16 * 6 * 4 * 17

    def test_csv_round_trip(self, tmp_path: Path, building_a: FingerprintDataset) -> None:
        path = unwrap(save_csv(building_a, tmp_path / "building-A.csv"))
        assert unwrap(load_csv(path, building_id=building_a.building_id)) == building_a


@pytest.mark.slow
class TestQualitativeTrends:
    def test_moderate_dropout_beats_the_extremes(
        self, cfg: ExperimentConfig, building_a: FingerprintDataset
    ) -> None:
        rows = {r.d_fraction: r.mean_error_m for r in unwrap(sweep_d(cfg, building_a)).d_sweep}
        assert rows[0.6] <= rows[0.1]
        assert rows[0.6] <= rows[0.9]

    def test_beats_raw_knn_under_heavy_churn(self, compared: EvalReport) -> None:
        assert _mean(compared, "stellar", min_ci=10) < _mean(compared, "raw-knn", min_ci=10)

    def test_more_samples_help(
        self, cfg: ExperimentConfig, building_a: FingerprintDataset
    ) -> None:
        report = unwrap(sweep_samples(cfg, building_a))
        by_count: dict[int, list[float]] = {}
        for row in report.samples:
            by_count.setdefault(row.samples_per_rp, []).append(row.mean_error_m)
        assert np.mean(by_count[5]) <= np.mean(by_count[1])

    def test_device_spread_is_bounded(self, compared: EvalReport) -> None:
        ci0 = next(s for s in compared.per_ci if s.arm == "stellar" and s.ci == 0)
        assert ci0.spread_m <= 2.0 * ci0.mean_error_m

    def test_model_unchanged_across_all_cis(
        self, cfg: ExperimentConfig, building_a: FingerprintDataset
    ) -> None:
        run = unwrap(train_run(cfg, building_a))
        before = model_hash(run.model)
        cells = resolve_cells(run.prepared.dataset, cfg)
        assert len(cells) == 4 * 17
        unwrap(evaluate_frozen(run, [("stellar", stellar_predictor(run.model))], cells))
        assert model_hash(run.model) == before


class TestBenchmarkSchedule:
    def test_churn_endpoints(self) -> None:
        schedule = benchmark_building("A", SEED).schedule
        assert len(schedule.disabled[0]) == 0
        assert len(schedule.disabled[16]) == 24

    def test_disabled_aps_read_floor(self, building_a: FingerprintDataset) -> None:
        off = sorted(benchmark_building("A", SEED).schedule.disabled[16])
        assert (building_a.select(ci=16).matrix[:, off] == -100.0).all()

    def test_same_seed_same_bytes(self, tmp_path: Path) -> None:
        first = unwrap(save_csv(benchmark_building("B", SEED).dataset, tmp_path / "1.csv"))
        second = unwrap(save_csv(benchmark_building("B", SEED).dataset, tmp_path / "2.csv"))
        assert first.read_bytes() == second.read_bytes()


@pytest.mark.slow
class TestBaselineTrends:
    def test_ltknn_no_worse_than_static_knn_at_ci_10(self, compared: EvalReport) -> None:
        lt = [c.mean_error_m for c in compared.cells if c.arm == "lt-knn" and c.ci == 10]
        static = [c.mean_error_m for c in compared.cells if c.arm == "raw-knn" and c.ci == 10]
        assert np.mean(lt) <= np.mean(static)

    def test_training_cell_is_best_in_its_row(self, compared: EvalReport) -> None:
        row = {
            c.test_device: c.mean_error_m
            for c in compared.cells
            if c.arm == "stellar" and c.ci == 0
        }
        assert row["dev-a"] <= min(row.values()) + 1e-9
