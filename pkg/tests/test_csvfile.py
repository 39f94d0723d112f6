"""Tests for lib/storage/csvfile.py - dataset CSV ingestion and export."""

from pathlib import Path

import pytest

from stellar_loc.lib.errors import CsvFormatError, CsvRangeError, CsvSchemaError
from stellar_loc.lib.result import Err, unwrap
from stellar_loc.lib.storage.csvfile import format_number, load_csv, save_csv
from stellar_loc.models import FingerprintDataset

HEADER = "device,ci,rp_id,x,y,aa:bb:cc:dd:ee:01,aa:bb:cc:dd:ee:02\n"


def _write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "building.csv"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    def test_parses_rows(self, tmp_path: Path) -> None:
        path = _write(
            tmp_path,
            HEADER + "dev-a,0,rp-0,0,0,-40,-100\ndev-a,1,rp-1,1.5,0,-55.5,-70\n",
        )
        ds = unwrap(load_csv(path))
        assert ds.building_id == "building"
        assert ds.ap_universe == ("aa:bb:cc:dd:ee:01", "aa:bb:cc:dd:ee:02")
        assert [rp.rp_id for rp in ds.rps] == ["rp-0", "rp-1"]
        assert ds.rps[1].x == 1.5
        assert ds.records[1].ap_values == (-55.5, -70.0)
        assert ds.records[1].ci == 1

    def test_dash_separated_macs(self, tmp_path: Path) -> None:
        path = _write(tmp_path, "device,ci,rp_id,x,y,AA-BB-CC-DD-EE-01\nd,0,r,0,0,-50\n")
        assert unwrap(load_csv(path)).ap_universe == ("AA-BB-CC-DD-EE-01",)

    def test_out_of_range_rss(self, tmp_path: Path) -> None:
        path = _write(tmp_path, HEADER + "dev-a,0,rp-0,0,0,-40,5\n")
        result = load_csv(path)
        assert result == Err(CsvRangeError(path, 2, "aa:bb:cc:dd:ee:02", 5.0))

    def test_below_floor_rejected(self, tmp_path: Path) -> None:
        path = _write(tmp_path, HEADER + "dev-a,0,rp-0,0,0,-101,-40\n")
        assert isinstance(load_csv(path).error, CsvRangeError)

    def test_unknown_column(self, tmp_path: Path) -> None:
        path = _write(tmp_path, "device,ci,rp_id,x,y,floor\nd,0,r,0,0,-50\n")
        result = load_csv(path)
        assert isinstance(result, Err)
        assert isinstance(result.error, CsvSchemaError)
        assert result.error.column == "floor"

    def test_missing_fixed_column(self, tmp_path: Path) -> None:
        path = _write(tmp_path, "device,rp_id,x,y,aa:bb:cc:dd:ee:01\nd,r,0,0,-50\n")
        assert isinstance(load_csv(path).error, CsvSchemaError)

    def test_no_ap_columns(self, tmp_path: Path) -> None:
        path = _write(tmp_path, "device,ci,rp_id,x,y\nd,0,r,0,0\n")
        assert isinstance(load_csv(path).error, CsvSchemaError)

    def test_non_numeric_cell(self, tmp_path: Path) -> None:
        path = _write(tmp_path, HEADER + "dev-a,0,rp-0,0,0,strong,-40\n")
        result = load_csv(path)
        assert isinstance(result.error, CsvFormatError)
        assert result.error.line == 2

    def test_negative_ci(self, tmp_path: Path) -> None:
        path = _write(tmp_path, HEADER + "dev-a,-1,rp-0,0,0,-40,-40\n")
        assert isinstance(load_csv(path).error, CsvFormatError)

    @pytest.mark.parametrize("ci", ["²", "①", "١", "1.0", " 1"])
    def test_ci_must_be_ascii_digits(self, tmp_path: Path, ci: str) -> None:
        path = _write(tmp_path, HEADER + f"dev-a,{ci},rp-0,0,0,-40,-40\n")
        result = load_csv(path)
        assert isinstance(result, Err)
        assert isinstance(result.error, CsvFormatError)
        assert result.error.line == 2

    def test_duplicate_ap_column(self, tmp_path: Path) -> None:
        text = "device,ci,rp_id,x,y,aa:bb:cc:dd:ee:01,aa:bb:cc:dd:ee:01\nd,0,r,0,0,-50,-50\n"
        result = load_csv(_write(tmp_path, text))
        assert result == Err(
            CsvSchemaError(tmp_path / "building.csv", "aa:bb:cc:dd:ee:01", "duplicate AP column")
        )

    def test_wrong_field_count(self, tmp_path: Path) -> None:
        path = _write(tmp_path, HEADER + "dev-a,0,rp-0,0,0,-40,-40,-40,-40\n")
        assert isinstance(load_csv(path).error, CsvFormatError)

    def test_empty_cell(self, tmp_path: Path) -> None:
        path = _write(tmp_path, HEADER + "dev-a,0,rp-0,0,0,,-40\n")
        assert isinstance(load_csv(path).error, CsvFormatError)

    def test_conflicting_coordinates(self, tmp_path: Path) -> None:
        path = _write(tmp_path, HEADER + "d,0,rp-0,0,0,-40,-40\nd,0,rp-0,1,0,-40,-40\n")
        result = load_csv(path)
        assert isinstance(result.error, CsvFormatError)
        assert result.error.line == 3

    def test_missing_file(self, tmp_path: Path) -> None:
        assert isinstance(load_csv(tmp_path / "nope.csv").error, CsvFormatError)

    def test_empty_file(self, tmp_path: Path) -> None:
        assert isinstance(load_csv(_write(tmp_path, "")).error, CsvFormatError)


class TestSaveCsv:
    def test_round_trip_is_exact(self, tmp_path: Path, tiny_world: FingerprintDataset) -> None:
        path = unwrap(save_csv(tiny_world, tmp_path / "tiny-out.csv"))
        back = unwrap(load_csv(path, building_id=tiny_world.building_id))
        assert back == tiny_world

    def test_lf_line_endings(self, tmp_path: Path, tiny_world: FingerprintDataset) -> None:
        path = unwrap(save_csv(tiny_world, tmp_path / "t.csv"))
        assert b"\r\n" not in path.read_bytes()

    def test_header(self, tmp_path: Path, tiny_world: FingerprintDataset) -> None:
        path = unwrap(save_csv(tiny_world, tmp_path / "t.csv"))
        header = path.read_text().splitlines()[0].split(",")
        assert header[:5] == ["device", "ci", "rp_id", "x", "y"]
        assert tuple(header[5:]) == tiny_world.ap_universe


@pytest.mark.parametrize(
    ("value", "text"),
    [
        (-100.0, "-100"),
        (0.0, "0"),
        (-55.5, "-55.5"),
        (0.1, "0.1"),
        (-63.123456789, "-63.123456789"),
    ],
)
def test_format_number(value: float, text: str) -> None:
    assert format_number(value) == text
