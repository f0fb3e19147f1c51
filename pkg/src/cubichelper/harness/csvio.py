"""Trace CSV files.  Floats are written with ``repr`` (shortest round-trip
form), so reading a file back gives exactly the in-memory values."""

import contextlib
import csv

HEADER = ("iter", "f", "grad_norm", "mu_M", "r", "snapshot", "grad_units", "hess_units", "factorizations",
          "gradcost_total", "audit_grad_units", "audit_hess_units", "wall_ns")


def _fmt(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trace_rows(trace, timing=True):
    for row in trace:
        yield (row.t, float(row.f), float(row.grad_norm), float(row.mu_M), float(row.r), bool(row.snapshot_refreshed),
               row.grad_units, row.hess_units, row.factorizations, float(row.gradcost_total),
               row.audit_grad_units, row.audit_hess_units, row.wall_ns if timing else 0)


def write_trace_csv(trace, ledger, path, timing=True):
    """Write one row per iteration to a path or an open text stream.
    ``timing=False`` writes ``wall_ns = 0`` so that reruns are byte-identical."""
    if ledger is not None and len(trace):
        last = trace[-1]
        if (last.grad_units, last.hess_units, last.factorizations) != (
                ledger.grad_units, ledger.hess_units, ledger.factorizations):
            raise ValueError("ledger does not match the final trace row")
    opened = open(path, "w", newline="") if not hasattr(path, "write") else contextlib.nullcontext(path)
    with opened as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for row in trace_rows(trace, timing):
            writer.writerow([_fmt(v) for v in row])


_INT_COLUMNS = {"iter", "grad_units", "hess_units", "factorizations", "audit_grad_units", "audit_hess_units", "wall_ns"}


def read_trace_csv(path):
    """Rows as dicts with ints, floats and a bool ``snapshot``."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        rows = []
        for raw in reader:
            row = {}
            for key, value in raw.items():
                if key == "snapshot":
                    row[key] = value == "1"
                elif key in _INT_COLUMNS:
                    row[key] = int(value)
                else:
                    row[key] = float(value)
            rows.append(row)
    return rows


def write_table_csv(rows, columns, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c, "")) for c in columns])
