"""Schema-aware reading of fibercm experiment CSVs.

Files carry a `# fibercm-csv schema=<name>` comment line, then a header
row. Raw lines are retained so --dump-table can re-emit plotted rows
byte-for-byte.
"""

import csv
import io

SCHEMAS = {
    "capacity.v1": {
        "required": ["length_m", "comp", "power_dbm", "snr_db", "mi_bits",
                     "mi_stderr"],
    },
    "waterfall.v1": {
        "required": ["code", "p_in", "ber_out", "bits_simulated"],
    },
    "pragmatic.v1": {
        "required": ["length_m", "comp", "se_achieved", "snr_db"],
    },
}


class CsvFormatError(ValueError):
    pass


class Table:
    """Parsed CSV plus the verbatim text of every line."""

    def __init__(self, path, schema, header_lines, rows, row_lines):
        self.path = path
        self.schema = schema
        self.header_lines = header_lines  # schema comment + column header
        self.rows = rows  # list of dicts
        self.row_lines = row_lines  # verbatim data lines, same order

    def __len__(self):
        return len(self.rows)


def read_table(path) -> Table:
    with open(path, "r", newline="") as f:
        raw = f.read()
    lines = raw.splitlines(keepends=True)
    if not lines:
        raise CsvFormatError(f"{path}: file is empty")
    first = lines[0].strip()
    if not first.startswith("# fibercm-csv schema="):
        raise CsvFormatError(f"{path}: missing schema comment line")
    schema = first.split("=", 1)[1]
    if schema not in SCHEMAS:
        raise CsvFormatError(f"{path}: unsupported schema {schema!r}")
    if len(lines) < 2:
        raise CsvFormatError(f"{path}: no column header")
    header = next(csv.reader(io.StringIO(lines[1])))
    missing = [c for c in SCHEMAS[schema]["required"] if c not in header]
    if missing:
        raise CsvFormatError(f"{path}: missing columns {missing}")
    rows = []
    row_lines = []
    for ln in lines[2:]:
        if not ln.strip():
            continue
        vals = next(csv.reader(io.StringIO(ln)))
        rows.append(dict(zip(header, vals)))
        row_lines.append(ln)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    return Table(path, schema, lines[:2], rows, row_lines)


def read_tables(paths, wanted_schemas):
    """Read several CSVs, keeping only supported schemas in `wanted`."""
    tables = []
    for p in paths:
        t = read_table(p)
        if t.schema not in wanted_schemas:
            raise CsvFormatError(
                f"{p}: schema {t.schema!r} not usable here "
                f"(expected one of {sorted(wanted_schemas)})"
            )
        tables.append(t)
    return tables


def dump_tables(tables, out_path):
    """Re-emit exactly the rows that were plotted, verbatim."""
    with open(out_path, "w", newline="") as f:
        for t in tables:
            for ln in t.header_lines:
                f.write(ln)
            for ln in t.row_lines:
                f.write(ln)
