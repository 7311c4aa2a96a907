"""Per-step trajectory records and their JSONL/CSV serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class TrajectoryRecord:
    """One logged step: plant truth, agent view, actuation, and outcome."""

    step: int
    time: float
    theta: float
    alpha: float
    theta_dot: float
    alpha_dot: float
    observation: list
    voltage_commanded: float
    voltage_actuated: float
    reward: float
    indicator: str
    done: bool


FIELD_NAMES = tuple(f.name for f in fields(TrajectoryRecord))


def to_json_line(record: TrajectoryRecord) -> str:
    payload = asdict(record)
    payload["observation"] = [float(v) for v in record.observation]
    return json.dumps(payload)


def from_json_line(line: str) -> TrajectoryRecord:
    data = json.loads(line)
    return TrajectoryRecord(**data)


def to_csv_row(record: TrajectoryRecord) -> list:
    row = []
    for name in FIELD_NAMES:
        value = getattr(record, name)
        if name == "observation":
            row.append(json.dumps([float(v) for v in value]))
        elif isinstance(value, float):
            row.append(repr(value))  # repr round-trips doubles exactly
        else:
            row.append(value)
    return row


def from_csv_row(row: dict) -> TrajectoryRecord:
    return TrajectoryRecord(
        step=int(row["step"]),
        time=float(row["time"]),
        theta=float(row["theta"]),
        alpha=float(row["alpha"]),
        theta_dot=float(row["theta_dot"]),
        alpha_dot=float(row["alpha_dot"]),
        observation=json.loads(row["observation"]),
        voltage_commanded=float(row["voltage_commanded"]),
        voltage_actuated=float(row["voltage_actuated"]),
        reward=float(row["reward"]),
        indicator=row["indicator"],
        done=row["done"] in (True, "True", "true", "1"),
    )


def csv_row_text(record: TrajectoryRecord) -> str:
    buffer = io.StringIO()
    csv.writer(buffer, lineterminator="").writerow(to_csv_row(record))
    return buffer.getvalue()


class TrajectoryRecorder:
    """Buffered sink for trajectory records, optionally backed by a file.

    With a path, rows are held in a buffer and written on flush()/close();
    without one, it is a plain in-memory collector.
    """

    def __init__(self, path=None, fmt: str = "jsonl"):
        if fmt not in ("jsonl", "csv"):
            raise ValueError(f"unknown trajectory format {fmt!r}")
        self.records: list[TrajectoryRecord] = []
        self._path = path
        self._fmt = fmt
        self._pending: list[TrajectoryRecord] = []
        self._file = None
        if path is not None:
            self._file = open(path, "w", newline="")
            if fmt == "csv":
                csv.writer(self._file).writerow(FIELD_NAMES)

    def append(self, record: TrajectoryRecord) -> None:
        self.records.append(record)
        if self._file is not None:
            self._pending.append(record)

    def flush(self) -> None:
        if self._file is None:
            return
        for record in self._pending:
            if self._fmt == "jsonl":
                self._file.write(to_json_line(record) + "\n")
            else:
                csv.writer(self._file).writerow(to_csv_row(record))
        self._pending.clear()
        self._file.flush()

    def close(self) -> None:
        if self._file is not None:
            self.flush()
            self._file.close()
            self._file = None
