"""Demand response event timeline."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .errors import InvalidArgument


@dataclass(frozen=True)
class DrEvent:
    """Timeline of one DR event: notification, reduction deadline, the
    sustained response period [start, end], and recovery end."""

    notification: datetime
    deadline: datetime
    start: datetime
    end: datetime
    recovery_end: datetime
    interval_minutes: int

    def __post_init__(self):
        if not (self.notification <= self.deadline <= self.start
                <= self.end <= self.recovery_end):
            raise InvalidArgument("event milestones must be non-decreasing")
        if self.interval_minutes <= 0:
            raise InvalidArgument("interval_minutes must be positive")

    @property
    def n_steps(self) -> int:
        total = (self.end - self.start).total_seconds() / 60.0
        return int(total // self.interval_minutes)

    def to_json(self) -> dict:
        return {
            "notification": self.notification.isoformat(),
            "deadline": self.deadline.isoformat(),
            "start": self.start.isoformat(),
            "end": self.end.isoformat(),
            "recovery_end": self.recovery_end.isoformat(),
            "interval_minutes": self.interval_minutes,
        }

    @classmethod
    def from_json(cls, data: dict) -> "DrEvent":
        return cls(
            notification=datetime.fromisoformat(data["notification"]),
            deadline=datetime.fromisoformat(data["deadline"]),
            start=datetime.fromisoformat(data["start"]),
            end=datetime.fromisoformat(data["end"]),
            recovery_end=datetime.fromisoformat(data["recovery_end"]),
            interval_minutes=int(data["interval_minutes"]),
        )
