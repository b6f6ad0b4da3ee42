"""Append-only run logs: one JSON object per line after a version header.

Reals are written with 17 significant digits so a log read back reproduces
every utility bit for bit.  Writers hold an exclusive ``flock`` while
appending; readers take a shared one and therefore see a whole-line prefix.
"""

from __future__ import annotations

import fcntl
import json
import math
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fairness import History, UtilityVector

FORMAT = "tempfair-history"
VERSION = 1


class LogError(ValueError):
    """A record was rejected or the log file is malformed."""


@dataclass(frozen=True)
class RunRecord:
    """One committed step of a run."""

    timestep: int
    domain: str
    utilities: UtilityVector
    formulation: dict = field(default_factory=dict)
    quality_term: float = 0.0
    fairness_term: float = 0.0
    total: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "timestep": int(self.timestep),
            "domain": self.domain,
            "formulation": dict(self.formulation),
            "entities": list(self.utilities.entities),
            "utilities": [float(v) for v in self.utilities.values],
            "quality_term": float(self.quality_term),
            "fairness_term": float(self.fairness_term),
            "total": float(self.total),
            "diagnostics": dict(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        try:
            return cls(int(d["timestep"]), str(d["domain"]),
                       UtilityVector(tuple(d["entities"]), tuple(d["utilities"])),
                       dict(d.get("formulation", {})), float(d["quality_term"]),
                       float(d["fairness_term"]), float(d["total"]),
                       dict(d.get("diagnostics", {})))
        except (KeyError, TypeError) as exc:
            raise LogError(f"malformed record: {exc}") from None

    @classmethod
    def from_scored(cls, timestep: int, domain: str, scored, spec=None) -> "RunRecord":
        """Record the committed (first) step of a :class:`ScoredPlan`."""
        form = {}
        if spec is not None:
            form = {"kind": spec.kind.value, "beta": spec.beta, "gamma": spec.disc.gamma,
                    "tau": spec.disc.tau, "horizon": spec.horizon, "metric": spec.metric.value}
        diag = {k: v for k, v in scored.diagnostics.items()
                if isinstance(v, (int, float, str, bool))}
        return cls(timestep, domain, scored.per_step_utilities[0], form,
                   scored.quality_term, scored.fairness_term, scored.total, diag)


def _dump(value) -> str:
    """JSON text with reals at 17 significant digits."""
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            raise LogError(f"cannot store non-finite real {v}")
        text = format(v, ".17g")
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_dump(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_dump(v) for v in value) + "]"
    raise LogError(f"cannot serialize {type(value).__name__}")


def serialize(record: RunRecord) -> str:
    return _dump(record.to_dict())


def parse(line: str) -> RunRecord:
    try:
        return RunRecord.from_dict(json.loads(line))
    except json.JSONDecodeError as exc:
        raise LogError(f"malformed line: {exc}") from None


def _header() -> str:
    return _dump({"format": FORMAT, "version": VERSION})


@contextmanager
def _locked(path: Path, mode: str, lock: int):
    with open(path, mode, encoding="utf-8") as fh:
        fcntl.flock(fh.fileno(), lock)
        try:
            yield fh
        finally:
            fcntl.flock(fh.fileno(), fcntl.LOCK_UN)


def _read_lines(fh) -> list[str] | None:
    """Record lines, or ``None`` for an empty file without header."""
    lines = [ln for ln in fh.read().split("\n") if ln.strip()]
    if not lines:
        return None
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError:
        raise LogError("not a history log (unreadable header)") from None
    if not isinstance(head, dict) or head.get("format") != FORMAT:
        raise LogError("not a history log (missing format header)")
    if head.get("version") != VERSION:
        raise LogError(f"unsupported log version {head.get('version')}")
    return lines[1:]


def records(log) -> list[RunRecord]:
    path = Path(log)
    if not path.exists():
        return []
    with _locked(path, "r", fcntl.LOCK_SH) as fh:
        return [parse(ln) for ln in _read_lines(fh) or ()]


def append(log, record: RunRecord) -> None:
    """Append ``record``; rejects timestep gaps and entity changes unwritten."""
    path = Path(log)
    path.touch(exist_ok=True)
    with _locked(path, "r+", fcntl.LOCK_EX) as fh:
        lines = _read_lines(fh)
        if lines:
            last = parse(lines[-1])
            if record.timestep != last.timestep + 1:
                raise LogError(f"timestep {record.timestep} does not follow {last.timestep}")
            if record.utilities.entities != last.utilities.entities:
                raise LogError(f"entities {record.utilities.entities} differ from "
                               f"{last.utilities.entities}")
        elif record.timestep != 0:
            raise LogError(f"first record must have timestep 0, got {record.timestep}")
        text = serialize(record) + "\n"
        if lines is None:
            text = _header() + "\n" + text
        fh.seek(0, os.SEEK_END)
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())


def load_history(log, window: int | None = None) -> History:
    """Utilities of the last ``window`` records (all when ``None``), oldest first."""
    if window is not None and window < 0:
        raise ValueError("window must be >= 0")
    hist = History(tuple(r.utilities for r in records(log)))
    return hist.window(window)


def cumulative(log) -> list[UtilityVector]:
    """Running per-entity sums over the log."""
    out: list[UtilityVector] = []
    for r in records(log):
        out.append(r.utilities if not out else out[-1] + r.utilities)
    return out

