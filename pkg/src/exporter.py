"""
Export analysis results to CSV.

Rows are written to a temporary file next to the destination and moved
into place once complete, so an interrupted run never leaves a partial
CSV behind. Each CSV gets a sibling JSON file with the scenario that
produced it.
"""

import csv
import logging
import math
import os
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """Locale-independent text for a CSV cell (15 significant digits for floats)."""
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return format(value, ".15g")
    return str(value)


class ResultExporter:
    """Writes result rows and the effective config into an output directory."""

    def __init__(self, output_dir: str = "output"):
        self.output_dir = Path(output_dir)

        # Generate a timestamp for default filenames
        self.timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")

    def default_path(self, command: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / f"{command.replace('-', '_')}_{self.timestamp}.csv"

    def export_csv(
        self,
        rows: Sequence[Dict[str, Any]],
        columns: Sequence[str],
        filepath: Optional[str] = None,
        command: str = "results",
    ) -> str:
        """Write rows to CSV with a header, LF line endings and UTF-8.

        Args:
            rows: One dict per row; keys outside columns are ignored.
            columns: Header and column order.
            filepath: Destination; defaults to <output_dir>/<command>_<timestamp>.csv.
            command: Name used for the default filename.

        Returns:
            Path to the created CSV file.
        """
        target = Path(filepath) if filepath else self.default_path(command)
        target.parent.mkdir(parents=True, exist_ok=True)

        formatted = [
            {column: format_value(row.get(column)) for column in columns}
            for row in rows
        ]
        self._write_atomically(target, lambda f: self._write_rows(f, columns, formatted))

        logger.info(f"CSV exported: {target} ({len(formatted)} rows)")
        return str(target)

    def export_table(
        self,
        rows: Sequence[Dict[str, Any]],
        index: List[str],
        columns: List[str],
        values: str,
        filepath: Optional[str] = None,
        command: str = "table",
        header_format=None,
    ) -> str:
        """Pivot long-format rows into a grid and write it as CSV.

        Args:
            rows: Long-format rows.
            index: Columns that label grid rows.
            columns: Columns whose values become grid columns.
            values: Column holding the cell values.
            header_format: Callable turning a column key into header text.

        Returns:
            Path to the created CSV file.
        """
        frame = pd.DataFrame(list(rows))
        grid = frame.pivot(
            index=index[0] if len(index) == 1 else index,
            columns=columns[0] if len(columns) == 1 else columns,
            values=values,
        )
        header_format = header_format or (lambda key: format_value(key))

        column_keys = list(grid.columns)
        headers = [header_format(key) for key in column_keys]
        grid_rows = []
        for row_key, series in grid.iterrows():
            row_key = row_key if isinstance(row_key, tuple) else (row_key,)
            record = dict(zip(index, row_key))
            record.update({header: series[key] for header, key in zip(headers, column_keys)})
            grid_rows.append(record)

        return self.export_csv(grid_rows, list(index) + headers, filepath, command)

    def export_config(self, config_json: str, csv_path: str) -> str:
        """Write the effective scenario next to a result file.

        Returns:
            Path to the created JSON file.
        """
        target = Path(csv_path).with_suffix(".config.json")
        self._write_atomically(target, lambda f: f.write(config_json))
        logger.info(f"Config exported: {target}")
        return str(target)

    @staticmethod
    def _write_rows(f, columns: Sequence[str], rows: List[Dict[str, str]]):
        writer = csv.DictWriter(
            f, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n"
        )
        writer.writeheader()
        writer.writerows(rows)

    @staticmethod
    def _write_atomically(target: Path, write):
        handle = tempfile.NamedTemporaryFile(
            "w", dir=target.parent, prefix=f".{target.name}.", suffix=".tmp",
            delete=False, newline="", encoding="utf-8",
        )
        try:
            with handle as f:
                write(f)
            os.replace(handle.name, target)
        except BaseException:
            Path(handle.name).unlink(missing_ok=True)
            raise
