"""Prover verdicts."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Status(str, enum.Enum):
    PROVED = "Proved"
    REFUTED = "Refuted"
    UNKNOWN = "Unknown"
    TIMEOUT = "Timeout"
    BACKEND_ERROR = "BackendError"
    NOT_ATTEMPTED = "NotAttempted"

    def __str__(self) -> str:
        return self.value


@dataclass
class Verdict:
    status: Status
    szs_word: str | None = None
    derivation_text: str | None = None
    wall_seconds: float = 0.0
    backend: str = ""
    note: str = ""
    used_premises: list[str] | None = field(default=None)

    @property
    def proved(self) -> bool:
        return self.status is Status.PROVED
