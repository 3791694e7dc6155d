"""Append-only session event logs and the timing analytics over them.

A session log is newline-delimited: one JSON record per line with the
fields ``seq``, ``t_ms``, ``stage``, ``kind``, ``payload``. Records are
written canonically (sorted keys, no spaces) so a write/read round trip is
byte-exact. Timestamps are milliseconds since session start, never wall
clock, so logs from different machines aggregate cleanly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class StageId(Enum):
    """Session stages, in their one and only legal order."""

    PRE_TEST = "pre_test"
    TRAINING = "training"
    C1 = "c1"
    C2 = "c2"
    C3 = "c3"
    BONUS = "bonus"
    POST_TEST = "post_test"

    @property
    def short(self) -> str:
        """Compact display name: PreTest, Training, C1, ..."""
        return "".join(part.capitalize() for part in self.name.split("_"))


STAGE_ORDER: tuple[StageId, ...] = tuple(StageId)

# Row labels used by the timing table, one per stage plus the total row.
STAGE_LABELS: dict[StageId, str] = {
    StageId.PRE_TEST: "Pre-test",
    StageId.TRAINING: "Training",
    StageId.C1: "Scenario 1",
    StageId.C2: "Scenario 2",
    StageId.C3: "Scenario 3",
    StageId.BONUS: "Scenario Bonus",
    StageId.POST_TEST: "Post-test",
}
TOTAL_LABEL = "Total game time"


class EventKind(Enum):
    STAGE_ENTER = "stage_enter"
    STAGE_EXIT = "stage_exit"
    PREDICTION_SUBMITTED = "prediction_submitted"
    OUTCOME_OBSERVED = "outcome_observed"
    BALANCE_USED = "balance_used"
    ITEM_ANSWERED = "item_answered"


class TelemetryError(Exception):
    """Malformed or out-of-order log data."""


@dataclass(frozen=True)
class Event:
    seq: int
    t_ms: int
    stage: StageId
    kind: EventKind
    payload: dict

    def to_line(self) -> str:
        record = {
            "seq": self.seq,
            "t_ms": self.t_ms,
            "stage": self.stage.value,
            "kind": self.kind.value,
            "payload": self.payload,
        }
        return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_line(cls, line: str) -> "Event":
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TelemetryError(f"invalid log record: {exc}") from exc
        try:
            return cls(
                seq=int(record["seq"]),
                t_ms=int(record["t_ms"]),
                stage=StageId(record["stage"]),
                kind=EventKind(record["kind"]),
                payload=record["payload"],
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise TelemetryError(f"invalid log record: {exc}") from exc


@dataclass
class EventLog:
    """Append-only, strictly sequenced event list for one session."""

    events: list[Event] = field(default_factory=list)

    def append(self, event: Event) -> None:
        expected = self.next_seq()
        if event.seq != expected:
            raise TelemetryError(f"out-of-order event: seq {event.seq}, expected {expected}")
        if self.events and event.t_ms < self.events[-1].t_ms:
            raise TelemetryError(
                f"timestamp went backwards: {event.t_ms} ms after {self.events[-1].t_ms} ms"
            )
        self.events.append(event)

    def next_seq(self) -> int:
        return self.events[-1].seq + 1 if self.events else 1

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def to_lines(self) -> list[str]:
        return [event.to_line() for event in self.events]

    def write(self, path: str | Path) -> None:
        Path(path).write_text("".join(line + "\n" for line in self.to_lines()), encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> "EventLog":
        log = cls()
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                log.append(Event.from_line(line))
            except TelemetryError as exc:
                raise TelemetryError(f"{path}:{lineno}: {exc}") from exc
        return log


def append_event(log: EventLog, event: Event) -> EventLog:
    """Functional-style append; mutates and returns the same log."""
    log.append(event)
    return log


def stage_durations(log: EventLog) -> dict[StageId, float]:
    """Minutes spent per visited stage, from matched enter/exit pairs."""
    entered: dict[StageId, int] = {}
    durations: dict[StageId, float] = {}
    for event in log:
        if event.kind is EventKind.STAGE_ENTER:
            if event.stage in entered or event.stage in durations:
                raise TelemetryError(f"{event.stage.short} unbalanced")
            entered[event.stage] = event.t_ms
        elif event.kind is EventKind.STAGE_EXIT:
            if event.stage not in entered:
                raise TelemetryError(f"{event.stage.short} unbalanced")
            durations[event.stage] = (event.t_ms - entered.pop(event.stage)) / 60000.0
    if entered:
        stage = next(iter(entered))
        raise TelemetryError(f"{stage.short} unbalanced")
    return durations


def total_minutes(log: EventLog) -> float | None:
    """Whole-session time: post-test exit minus pre-test enter, in minutes."""
    start = end = None
    for event in log:
        if event.kind is EventKind.STAGE_ENTER and event.stage is StageId.PRE_TEST:
            start = event.t_ms
        elif event.kind is EventKind.STAGE_EXIT and event.stage is StageId.POST_TEST:
            end = event.t_ms
    if start is None or end is None:
        return None
    return (end - start) / 60000.0


@dataclass(frozen=True)
class TimingRow:
    label: str
    sessions: int
    min_minutes: float | None
    max_minutes: float | None
    avg_minutes: float | None

    def cells(self, decimal_sep: str = ",") -> tuple[str, str, str]:
        def fmt(value: float | None) -> str:
            if value is None:
                return "-"
            return f"{value:.2f}".replace(".", decimal_sep)

        return fmt(self.min_minutes), fmt(self.max_minutes), fmt(self.avg_minutes)


@dataclass(frozen=True)
class TimingReport:
    rows: list[TimingRow]

    def render(self, decimal_sep: str = ",") -> str:
        """Paper-style table: label column, then min/max/avg joined by single spaces."""
        width = max(len(row.label) for row in self.rows) + 2
        lines = [f"{'Sections':<{width}}Min t Max t Average t"]
        for row in self.rows:
            lines.append(f"{row.label:<{width}}" + " ".join(row.cells(decimal_sep)))
        return "\n".join(lines)

    def row(self, label: str) -> TimingRow:
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label)

    def to_dict(self) -> dict:
        return {
            "rows": [
                {
                    "label": row.label,
                    "sessions": row.sessions,
                    "min_minutes": row.min_minutes,
                    "max_minutes": row.max_minutes,
                    "avg_minutes": row.avg_minutes,
                }
                for row in self.rows
            ]
        }


def _stats_row(label: str, values: list[float]) -> TimingRow:
    if not values:
        return TimingRow(label, 0, None, None, None)
    return TimingRow(label, len(values), min(values), max(values), sum(values) / len(values))


def timing_report(logs: list[EventLog]) -> TimingReport:
    """Min/max/average minutes per stage across sessions, plus the total row.

    The total row aggregates per-session totals; it is not the sum of the
    stage averages.
    """
    if not logs:
        raise TelemetryError("timing_report needs at least one log")
    per_stage: dict[StageId, list[float]] = {stage: [] for stage in STAGE_ORDER}
    totals: list[float] = []
    for log in logs:
        durations = stage_durations(log)
        for stage, minutes in durations.items():
            per_stage[stage].append(minutes)
        total = total_minutes(log)
        if total is not None:
            totals.append(total)
    rows = [_stats_row(STAGE_LABELS[stage], per_stage[stage]) for stage in STAGE_ORDER]
    rows.append(_stats_row(TOTAL_LABEL, totals))
    return TimingReport(rows=rows)
