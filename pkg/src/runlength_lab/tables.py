"""Tabular results and their CSV / JSON encodings.

CSV files start with ``# key=value`` comment lines carrying the metadata,
followed by an RFC 4180 header and body.  JSON files hold one object with
``metadata``, ``columns`` and ``rows``.  Floats are written with ``repr`` so
both encodings round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

LONG_COLUMNS = ("alpha", "n", "trial", "statistic", "value")


@dataclass
class ExperimentTable:
    """Rows of equal-length tuples plus free-form metadata.

    The default long-form schema is ``(alpha, n, trial, statistic, value)``;
    long-form tables keep their rows sorted by ``(statistic, n, trial)``.
    """

    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    columns: tuple = LONG_COLUMNS

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self.rows = [tuple(_plain(v) for v in r) for r in self.rows]
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row {r!r} does not match columns {self.columns}")
        if self.columns == LONG_COLUMNS:
            self.rows.sort(key=lambda r: (r[3], r[1], r[2], r[0]))

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def select(self, **match):
        idx = {self.columns.index(k): v for k, v in match.items()}
        return [r for r in self.rows if all(r[i] == v for i, v in idx.items())]

    def values(self, statistic, n=None):
        """Values of ``statistic`` (optionally at horizon ``n``), in trial order."""
        match = {"statistic": statistic} if n is None else {"statistic": statistic, "n": n}
        return [r[4] for r in self.select(**match)]

    def __eq__(self, other):
        if not isinstance(other, ExperimentTable):
            return NotImplemented
        return self.columns == other.columns and self.rows == other.rows and self.metadata == other.metadata

    # encodings

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k in sorted(self.metadata):
            buf.write(f"# {k}={json.dumps(self.metadata[k], sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ExperimentTable":
        meta = {}
        lines = text.splitlines(keepends=True)
        body_start = 0
        for i, line in enumerate(lines):
            if not line.startswith("# "):
                body_start = i
                break
            key, _, val = line[2:].rstrip("\r\n").partition("=")
            meta[key] = json.loads(val)
        else:
            body_start = len(lines)
        reader = csv.reader(io.StringIO("".join(lines[body_start:])))
        columns = tuple(next(reader))
        rows = [tuple(_parse(v) for v in r) for r in reader if r]
        return cls(rows, meta, columns)

    def to_json(self) -> str:
        doc = {"metadata": self.metadata, "columns": list(self.columns), "rows": [list(r) for r in self.rows]}
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentTable":
        doc = json.loads(text)
        return cls([tuple(r) for r in doc["rows"]], doc["metadata"], tuple(doc["columns"]))

    def write(self, path, fmt=None):
        path = Path(path)
        fmt = fmt or path.suffix.lstrip(".")
        text = self.to_csv() if fmt == "csv" else self.to_json()
        path.write_text(text, newline="")
        return path

    @classmethod
    def read(cls, path):
        path = Path(path)
        text = path.read_text()
        return cls.from_csv(text) if path.suffix == ".csv" else cls.from_json(text)


def _plain(v):
    # numpy scalars -> builtins, so repr() and json agree
    return v.item() if hasattr(v, "item") and not isinstance(v, (str, bytes)) else v


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(s: str):
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s
