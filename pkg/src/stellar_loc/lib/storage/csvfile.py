"""Dataset CSV ingestion and export.

Format (one file per building, UTF-8, LF, ``.`` decimal separator):

    device,ci,rp_id,x,y,<ap_mac_1>,...,<ap_mac_M>

One row per fingerprint, RSS in dBm, invisible AP written as ``-100``.
AP columns must be MAC-like (six hex octets separated by ``:`` or ``-``);
anything else is an unknown column and the file is rejected.
"""

import math
import re
from pathlib import Path

import pandas as pd
from pandas.errors import EmptyDataError, ParserError

from stellar_loc.lib.errors import CsvError, CsvFormatError, CsvRangeError, CsvSchemaError
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import (
    RSS_CEIL_DBM,
    RSS_FLOOR_DBM,
    Fingerprint,
    FingerprintDataset,
    ReferencePoint,
)

FIXED_COLUMNS = ("device", "ci", "rp_id", "x", "y")
MAC_PATTERN = re.compile(r"^[0-9A-Fa-f]{2}([:-])[0-9A-Fa-f]{2}(\1[0-9A-Fa-f]{2}){4}$")
CI_PATTERN = re.compile(r"[0-9]+")

# Header is line 1, so data row i is line i + 2.
_FIRST_DATA_LINE = 2


def format_number(value: float) -> str:
    """Shortest text that parses back to exactly ``value``; integers lose the ``.0``."""
    if value.is_integer():
        return str(int(value))
    return repr(value)


def _check_header(path: Path, columns: list[str]) -> Result[tuple[str, ...], CsvSchemaError]:
    head = tuple(columns[: len(FIXED_COLUMNS)])
    if head != FIXED_COLUMNS:
        for expected, got in zip(FIXED_COLUMNS, head):
            if expected != got:
                return Err(CsvSchemaError(path, got, f"expected column '{expected}' here"))
        return Err(CsvSchemaError(path, "", "header is missing fixed columns"))

    aps = columns[len(FIXED_COLUMNS) :]
    if not aps:
        return Err(CsvSchemaError(path, "", "no AP columns"))
    seen: set[str] = set()
    for ap in aps:
        if not MAC_PATTERN.match(ap):
            return Err(CsvSchemaError(path, ap, "unknown column (not a MAC-like AP id)"))
        if ap in seen:
            return Err(CsvSchemaError(path, ap, "duplicate AP column"))
        seen.add(ap)
    return Ok(tuple(aps))


def _parse_float(path: Path, line: int, column: str, text: str) -> Result[float, CsvFormatError]:
    try:
        value = float(text)
    except ValueError:
        return Err(CsvFormatError(path, line, f"column '{column}': '{text}' is not a number"))
    if not math.isfinite(value):
        return Err(CsvFormatError(path, line, f"column '{column}': '{text}' is not finite"))
    return Ok(value)


def load_csv(path: Path, building_id: str | None = None) -> Result[FingerprintDataset, CsvError]:
    """Parse and validate a dataset CSV.

    ``building_id`` defaults to the file stem. RPs are listed in first-seen
    order; an RP whose coordinates differ between rows is a format error.
    """
    try:
        frame = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            encoding="utf-8",
        )
    except ParserError as e:
        found = re.search(r"line (\d+)", str(e))
        line = int(found.group(1)) if found else 0
        return Err(CsvFormatError(path, line, "wrong number of fields"))
    except EmptyDataError:
        return Err(CsvFormatError(path, 1, "file is empty"))
    except (OSError, UnicodeDecodeError) as e:
        return Err(CsvFormatError(path, 0, str(e)))

    match _check_header(path, list(frame.iloc[0])):
        case Err() as e:
            return e
        case Ok(aps):
            pass

    rps: dict[str, ReferencePoint] = {}
    records: list[Fingerprint] = []
    for i, row in enumerate(frame.iloc[1:].itertuples(index=False, name=None)):
        line = i + _FIRST_DATA_LINE
        device, ci_text, rp_id, x_text, y_text = row[: len(FIXED_COLUMNS)]
        if any(not isinstance(cell, str) or cell == "" for cell in row):
            return Err(CsvFormatError(path, line, "empty cell or missing fields"))
        if not CI_PATTERN.fullmatch(ci_text):
            return Err(CsvFormatError(path, line, f"ci '{ci_text}' is not a non-negative integer"))

        match _parse_float(path, line, "x", x_text):
            case Err() as e:
                return e
            case Ok(x):
                pass
        match _parse_float(path, line, "y", y_text):
            case Err() as e:
                return e
            case Ok(y):
                pass

        rp = ReferencePoint(rp_id, x, y)
        known = rps.setdefault(rp_id, rp)
        if known != rp:
            reason = f"rp '{rp_id}' coordinates differ from earlier rows"
            return Err(CsvFormatError(path, line, reason))

        values: list[float] = []
        for ap, text in zip(aps, row[len(FIXED_COLUMNS) :]):
            match _parse_float(path, line, ap, text):
                case Err() as e:
                    return e
                case Ok(value):
                    pass
            if not RSS_FLOOR_DBM <= value <= RSS_CEIL_DBM:
                return Err(CsvRangeError(path, line, ap, value))
            values.append(value)

        records.append(Fingerprint(tuple(values), rp_id, device, int(ci_text)))

    return Ok(
        FingerprintDataset(
            building_id=building_id if building_id is not None else path.stem,
            ap_universe=aps,
            rps=tuple(rps.values()),
            records=tuple(records),
        )
    )


def to_frame(ds: FingerprintDataset) -> pd.DataFrame:
    """The dataset as a frame of exact-text cells in the CSV column order."""
    coords = {rp.rp_id: rp for rp in ds.rps}
    rows = [
        [
            r.device_id,
            str(r.ci),
            r.rp_id,
            format_number(coords[r.rp_id].x),
            format_number(coords[r.rp_id].y),
            *(format_number(v) for v in r.ap_values),
        ]
        for r in ds.records
    ]
    return pd.DataFrame(rows, columns=[*FIXED_COLUMNS, *ds.ap_universe], dtype=str)


def save_csv(ds: FingerprintDataset, path: Path) -> Result[Path, CsvFormatError]:
    """Write ``ds`` so that ``load_csv`` reads back the identical values."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        to_frame(ds).to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as e:
        return Err(CsvFormatError(path, 0, f"write failed: {e}"))
    return Ok(path)
