"""Local file output for reports, plot data and model files."""

from pathlib import Path

from stellar_loc.lib.errors import FileWriteError
from stellar_loc.lib.result import Err, Ok, Result


def read(path: Path) -> str | None:
    """Read file contents, or None if doesn't exist."""
    if not path.exists():
        return None
    return path.read_text(encoding="utf-8")


def write(path: Path, data: str) -> Result[Path, FileWriteError]:
    """Write UTF-8 text with LF endings, creating parent dirs if needed."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
    except OSError as e:
        return Err(FileWriteError(path, str(e)))
    return Ok(path)
