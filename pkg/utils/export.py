import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence


def format_number(value: Any) -> str:
    """Integers as-is, reals in scientific notation with 17 significant digits"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.16e}"
    return str(value)


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    comments: Optional[List[str]] = None,
) -> Path:
    """Write a CSV with optional leading '# ' comment lines"""
    path = Path(path)
    with open(path, "w", newline="") as handle:
        for comment in comments or []:
            handle.write(f"# {comment}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(x) for x in row])
    return path


def write_json(path: Path, data: Any) -> Path:
    path = Path(path)
    with open(path, "w") as handle:
        json.dump(data, handle, indent=2)
        handle.write("\n")
    return path


def read_csv_rows(path: Path) -> List[List[str]]:
    """Rows of a CSV written by write_csv, comment lines skipped"""
    with open(path, newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.reader(lines))
