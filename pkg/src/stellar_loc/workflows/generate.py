"""Benchmark generation - write the synthetic buildings as dataset CSVs."""

import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Any

from stellar_loc.lib.errors import CsvFormatError, FileWriteError
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.lib.storage import file
from stellar_loc.lib.storage.csvfile import save_csv
from stellar_loc.lib.synthgen import BenchmarkBuilding, default_benchmark

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"

type GenerateError = CsvFormatError | FileWriteError


def csv_name(building: str) -> str:
    return f"building-{building}.csv"


def _manifest_entry(building: BenchmarkBuilding) -> dict[str, Any]:
    schedule = building.schedule
    return {
        "environment": asdict(building.env),
        "devices": [asdict(d) for d in building.devices],
        "schedule": {
            "disabled": [sorted(s) for s in schedule.disabled],
            "drift_db": list(schedule.drift_db),
        },
        "num_fingerprints": len(building.dataset.records),
    }


def manifest_json(seed: int, buildings: dict[str, BenchmarkBuilding]) -> str:
    payload = {
        "seed": seed,
        "buildings": {
            name: {"csv": csv_name(name), **_manifest_entry(b)} for name, b in buildings.items()
        },
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def generate_benchmark(seed: int, out_dir: Path) -> Result[list[Path], GenerateError]:
    """Write building-A.csv, building-B.csv and manifest.json under ``out_dir``."""
    buildings = default_benchmark(seed)
    paths = []
    for name, building in buildings.items():
        logger.info("building %s: %d fingerprints", name, len(building.dataset.records))
        match save_csv(building.dataset, out_dir / csv_name(name)):
            case Err() as e:
                return e
            case Ok(path):
                paths.append(path)

    match file.write(out_dir / MANIFEST_FILE, manifest_json(seed, buildings)):
        case Err() as e:
            return e
        case Ok(path):
            paths.append(path)
    return Ok(paths)
