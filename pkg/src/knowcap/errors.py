"""Error types shared by every module.

Each error carries a stable machine-readable ``code`` so the HTTP layer can
map failures one-to-one onto response codes without string matching.
"""

from __future__ import annotations


class KnowcapError(Exception):
    """Base class for all service errors."""

    code = "error"
    http_status = 400

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


class EmptyName(KnowcapError):
    code = "empty_name"


class EmptyField(KnowcapError):
    code = "empty_field"


class RoleViolation(KnowcapError):
    code = "role_violation"
    http_status = 403


class UnknownActor(KnowcapError):
    code = "unknown_actor"
    http_status = 404


class UnknownProblem(KnowcapError):
    code = "unknown_problem"
    http_status = 404


class UnknownDocument(KnowcapError):
    code = "unknown_document"
    http_status = 404


class UnknownLineage(KnowcapError):
    code = "unknown_lineage"
    http_status = 404


class UnknownFixture(KnowcapError):
    code = "unknown_fixture"
    http_status = 404


class PhaseGate(KnowcapError):
    code = "phase_gate"
    http_status = 409


class TerminalPhase(KnowcapError):
    code = "terminal_phase"
    http_status = 409


class DanglingAnchor(KnowcapError):
    code = "dangling_anchor"
    http_status = 404


class QuoteMismatch(KnowcapError):
    code = "quote_mismatch"
    http_status = 409


class InvalidFragment(KnowcapError):
    code = "invalid_fragment"


class EmptyAnnotation(KnowcapError):
    code = "empty_annotation"


class Orphaned(KnowcapError):
    code = "orphaned"
    http_status = 410


class StaleVersion(KnowcapError):
    code = "stale_version"
    http_status = 409


class AlreadyValidated(KnowcapError):
    code = "already_validated"
    http_status = 409


class RatingOutOfRange(KnowcapError):
    code = "rating_out_of_range"


class InvalidKind(KnowcapError):
    code = "invalid_kind"


class EmptyQuery(KnowcapError):
    code = "empty_query"


class ExpiredSession(KnowcapError):
    code = "expired_session"
    http_status = 410


class UnknownSession(KnowcapError):
    code = "unknown_session"
    http_status = 404


class CorruptLog(KnowcapError):
    """Raised when the persisted log fails integrity checks.

    ``line_number`` is 1-based and names the first bad record.
    """

    code = "corrupt_log"
    http_status = 500

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class WriteFailure(KnowcapError):
    code = "write_failure"
    http_status = 500


class ConfigError(KnowcapError):
    code = "config_error"


class AuthFailure(KnowcapError):
    code = "auth_failure"
    http_status = 401
