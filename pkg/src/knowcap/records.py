"""Self-describing textual record format.

One JSON object per line; the ``rec`` field names the record type, ``seq``
carries the repository-wide sequence number.  The same encoding is used for
the append-only log file, exported logs, and event-stream frames, so a log
round-trips losslessly through any of them.
"""

from __future__ import annotations

import json
from typing import Any, Iterable

from .errors import CorruptLog

REC_ACTOR = "actor"
REC_DOCUMENT = "document"
REC_PROBLEM = "dp"
REC_KR = "kr"
REC_STATUS = "status"
REC_AWARENESS = "awareness"

# Fields every record of a given type must carry (beyond rec/seq/wall).
REQUIRED_FIELDS: dict[str, tuple[str, ...]] = {
    REC_ACTOR: ("actor_id", "display_name", "role", "token"),
    REC_DOCUMENT: ("doc_uri", "content", "content_hash"),
    REC_PROBLEM: ("dp_id", "title", "initial_demand", "internal_context", "external_context", "created_by", "phase"),
    REC_KR: ("kr_id", "version", "kind", "payload", "author", "author_role", "stamp_tag", "status"),
    REC_STATUS: ("kr_id", "version", "status", "actor"),
    REC_AWARENESS: ("workspace", "event_id", "kind", "actor", "payload"),
}


def encode(record: dict[str, Any]) -> str:
    """Single-line canonical encoding (sorted keys, no trailing newline)."""
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def decode_line(line: str, line_number: int) -> dict[str, Any]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptLog(line_number, f"invalid JSON: {exc.msg}")
    if not isinstance(record, dict):
        raise CorruptLog(line_number, "record is not an object")
    validate_record(record, line_number)
    return record


def validate_record(record: dict[str, Any], line_number: int) -> None:
    rec_type = record.get("rec")
    if rec_type not in REQUIRED_FIELDS:
        raise CorruptLog(line_number, f"unknown record type {rec_type!r}")
    if not isinstance(record.get("seq"), int) or record["seq"] < 1:
        raise CorruptLog(line_number, "missing or invalid seq")
    if "wall" not in record:
        raise CorruptLog(line_number, "missing wall clock")
    missing = [f for f in REQUIRED_FIELDS[rec_type] if f not in record]
    if missing:
        raise CorruptLog(line_number, f"{rec_type} record missing fields: {', '.join(missing)}")


def parse_log_text(text: str) -> list[dict[str, Any]]:
    """Parse and integrity-check a full log body.

    Every line must decode, the final line must be newline-terminated
    (a bare tail means a torn write), and seq must strictly increase.
    """
    records: list[dict[str, Any]] = []
    if not text:
        return records
    if not text.endswith("\n"):
        last_line = text.count("\n") + 1
        raise CorruptLog(last_line, "truncated record (no trailing newline)")
    last_seq = 0
    for line_number, line in enumerate(text.split("\n")[:-1], start=1):
        if not line:
            raise CorruptLog(line_number, "blank line in log")
        record = decode_line(line, line_number)
        if record["seq"] <= last_seq:
            raise CorruptLog(line_number, f"seq {record['seq']} not greater than previous {last_seq}")
        last_seq = record["seq"]
        records.append(record)
    return records


def read_log_file(path) -> list[dict[str, Any]]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return parse_log_text(handle.read())


def write_log_file(path, records: Iterable[dict[str, Any]]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for record in records:
            handle.write(encode(record) + "\n")
            count += 1
    return count
