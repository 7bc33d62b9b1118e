"""CSV and JSON persistence for trajectories, matrices and reports."""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .dynsys import StateTrajectory
from .errors import CESysIdError, CSVFormatError, InvalidInputError, SpacingError
from .identify import IdentificationReport, RankedTerm

SCHEMA_VERSION = 1
REPORT_CSV_HEADER = ("derivative", "term", "mi_nats", "rank", "p_value")


class ReportIOError(CESysIdError, OSError):
    pass


def _fmt(x):
    # repr of a Python float is the shortest string that round-trips exactly
    return repr(float(x))


def _open_for_read(path):
    try:
        return open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise CSVFormatError(f"no such file: {path}") from None
    except OSError as exc:
        raise CSVFormatError(f"cannot read {path}: {exc.strerror}") from None


def read_matrix_csv(path):
    """Read a headed all-numeric CSV; returns ``(header, T x d array)``."""
    with _open_for_read(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CSVFormatError("file is empty", line=1) from None
        header = [h.strip() for h in header]
        if not header or any(not h for h in header):
            raise CSVFormatError("header row has empty column names", line=1)
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CSVFormatError(f"expected {len(header)} fields, found {len(row)}", line=line)
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise CSVFormatError(f"cannot parse number in {row!r}", line=line) from None
            if not all(math.isfinite(v) for v in vals):
                raise CSVFormatError(f"non-finite value in {row!r}", line=line)
            rows.append((line, vals))
    if not rows:
        raise CSVFormatError("no data rows", line=2)
    data = np.array([v for _, v in rows], dtype=float)
    return header, data, [ln for ln, _ in rows]


def read_trajectory_csv(path) -> StateTrajectory:
    """Read ``time,var1,var2,...`` into a trajectory, validating the spacing."""
    header, data, lines = read_matrix_csv(path)
    if len(header) < 2:
        raise CSVFormatError("need a time column and at least one state column", line=1)
    try:
        return StateTrajectory(data[:, 0], data[:, 1:], tuple(header[1:]))
    except SpacingError as exc:
        line = lines[exc.index] if getattr(exc, "index", None) is not None else None
        raise CSVFormatError(f"time column: {exc}", line=line) from None
    except InvalidInputError as exc:
        raise CSVFormatError(str(exc)) from None


def _write_rows(path, header, rows):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise ReportIOError(f"cannot write {path}: {exc.strerror}") from None


def write_trajectory_csv(traj: StateTrajectory, path, time_name="t"):
    rows = ([_fmt(t), *map(_fmt, s)] for t, s in zip(traj.times, traj.states))
    _write_rows(path, [time_name, *traj.var_names], rows)


def write_matrix_csv(header, data, path):
    _write_rows(path, list(header), ([_fmt(v) for v in row] for row in np.asarray(data)))


def write_derivatives_csv(traj, derivs, path, time_name="t"):
    rows = ([_fmt(t), *map(_fmt, d)] for t, d in zip(traj.times[:-1], derivs.values))
    _write_rows(path, [time_name, *derivs.var_names], rows)


def report_to_dict(report: IdentificationReport):
    return {
        "schema_version": SCHEMA_VERSION,
        "units": "nats",
        "metadata": report.metadata,
        "warnings": list(report.warnings),
        "derivatives": {
            name: [
                {"term": r.term, "mi_nats": r.mi_nats, "rank": r.rank, "p_value": r.p_value}
                for r in ranked
            ]
            for name, ranked in report.rankings.items()
        },
    }


def report_from_dict(doc) -> IdentificationReport:
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise InvalidInputError(f"unsupported report schema_version {doc.get('schema_version')!r}")
    rankings = {
        name: [RankedTerm(r["term"], r["mi_nats"], r["rank"], r["p_value"]) for r in ranked]
        for name, ranked in doc["derivatives"].items()
    }
    return IdentificationReport(rankings, doc["metadata"], list(doc.get("warnings", [])))


def report_to_json(report) -> str:
    return json.dumps(report_to_dict(report), indent=2, allow_nan=False) + "\n"


def report_csv_rows(report):
    for name, ranked in report.rankings.items():
        for r in ranked:
            yield [
                name,
                r.term,
                "" if r.mi_nats is None else _fmt(r.mi_nats),
                "" if r.rank is None else str(r.rank),
                "" if r.p_value is None else _fmt(r.p_value),
            ]


def write_report(report: IdentificationReport, path, format="json"):
    """Write ``report`` as the versioned JSON document or long-format CSV."""
    if format == "json":
        text = report_to_json(report)
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise ReportIOError(f"cannot write {path}: {exc.strerror}") from None
    elif format == "csv":
        _write_rows(path, REPORT_CSV_HEADER, report_csv_rows(report))
    else:
        raise InvalidInputError(f"unknown report format {format!r}; use json or csv")


def read_report_json(path) -> IdentificationReport:
    with open(path, encoding="utf-8") as fh:
        return report_from_dict(json.load(fh))


def read_config_file(path):
    """Flat ``key = value`` file; ``#`` starts a comment. Keys use dashes or underscores."""
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise CSVFormatError(f"cannot read config {path}: {exc.strerror}") from None
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CSVFormatError(f"config entry is not key=value: {raw.strip()!r}", line=lineno)
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise CSVFormatError("config entry has an empty key", line=lineno)
            out[key.replace("-", "_")] = value
    return out

