"""
CSV output and the command-line help texts.
"""
import csv
import io
from pathlib import Path
from typing import Iterable, Optional, TextIO


def format_cell(value) -> str:
    """Shortest round-trip decimal for floats, blank for missing values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(columns: list, rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(columns: list, rows: Iterable[dict], out: Optional[Path], stdout: TextIO):
    """Rows are rendered in full before anything is written."""
    text = render_csv(columns, rows)
    if out is None:
        stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# --- Help texts ---

DESCRIPTION = (
    "📡 sinrmoments: factorial moment measures of the SINR process in "
    "Poisson cellular networks, k-coverage, interference cancellation "
    "and signal combination, with a Monte Carlo check."
)

EPILOG = (
    "Thresholds are given in dB everywhere.\n"
    "Environment: SINRM_THREADS sets the simulator thread count."
)

HELP = {
    "coverage": "k-coverage probability P^(k)(τ) on one threshold or a dB grid",
    "moments": "n-th factorial moment measure of the SINR process at given thresholds",
    "icsc": "coverage with interference cancellation and/or signal combination",
    "figure": "reproduce a named figure sweep (fig1 … fig9) as CSV files",
    "init": "write a template scenario file",
}
