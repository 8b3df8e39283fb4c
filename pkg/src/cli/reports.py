from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import IO, Iterable

import numpy as np
import pandas as pd

from src.fibred_system.config_io import format_rational

FORMATS = ("csv", "json")


def to_jsonable(value):
    """Plain JSON value for report cells; exact integers stay integers."""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        # NaN and +-inf have no JSON literal
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    return value


def _csv_cell(value):
    value = to_jsonable(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return value


class ReportWriter:
    """
    Streams report rows as CSV (``# key: value`` metadata lines, header,
    one line per row) or collects them into ``{"metadata", "rows"}`` JSON.

    Use as a context manager; JSON is written on exit.
    """

    def __init__(self, stream: IO[str], fmt: str, metadata: dict):
        if fmt not in FORMATS:
            raise ValueError(f"Unknown report format {fmt!r}; expected one of {FORMATS}")
        self.stream = stream
        self.fmt = fmt
        self.metadata = to_jsonable(metadata)
        self.rows: list[dict] = []
        self.columns: list[str] | None = None

    def __enter__(self) -> ReportWriter:
        if self.fmt == "csv":
            for key, value in self.metadata.items():
                if isinstance(value, (list, dict)):
                    value = json.dumps(value)
                self.stream.write(f"# {key}: {value}\n")
        return self

    def write_row(self, row: dict) -> None:
        if self.fmt == "json":
            self.rows.append({k: to_jsonable(v) for k, v in row.items()})
            return
        header = self.columns is None
        if header:
            self.columns = list(row)
        frame = pd.DataFrame([{k: _csv_cell(row.get(k)) for k in self.columns}], columns=self.columns)
        frame.to_csv(self.stream, header=header, index=False, lineterminator="\n")
        self.stream.flush()

    def write_rows(self, rows: Iterable[dict]) -> None:
        for row in rows:
            self.write_row(row)

    def write_frame(self, df: pd.DataFrame) -> None:
        if self.fmt == "csv" and self.columns is None and df.empty:
            self.stream.write(",".join(df.columns) + "\n")
            self.columns = list(df.columns)
            return
        self.write_rows(df.to_dict(orient="records"))

    def __exit__(self, exc_type, exc, tb) -> None:
        if self.fmt == "json" and exc_type is None:
            json.dump({"metadata": self.metadata, "rows": self.rows}, self.stream, indent=2, allow_nan=False)
            self.stream.write("\n")
