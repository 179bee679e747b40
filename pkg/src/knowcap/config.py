"""Service configuration.

Plain ``key = value`` text file; ``#`` starts a comment.  Unknown keys are
rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .exploitation import RetrievalWeights


@dataclass
class ServiceConfig:
    data_directory: Path
    listen_host: str = "127.0.0.1"
    listen_port: int = 8347
    heartbeat_interval_s: int = 15
    session_timeout_s: int = 45
    weights: RetrievalWeights = field(default_factory=RetrievalWeights)
    cf_min_co_raters: int = 1
    static_dir: Path | None = None  # optional browser-app assets to serve

    def __post_init__(self):
        if min(self.weights.role, self.weights.phase, self.weights.terms) <= 0:
            raise ConfigError("retrieval weights must all be positive")
        if self.session_timeout_s <= self.heartbeat_interval_s:
            raise ConfigError("session_timeout_s must exceed heartbeat_interval_s")
        if self.cf_min_co_raters < 1:
            raise ConfigError("cf_min_co_raters must be >= 1")


_INT_KEYS = {"listen_port", "heartbeat_interval_s", "session_timeout_s", "cf_min_co_raters"}
_FLOAT_KEYS = {"weight_role", "weight_phase", "weight_terms"}
_KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | {"data_directory", "listen_host", "static_dir"}


def parse_config(text: str, base_dir: Path | None = None) -> ServiceConfig:
    values: dict[str, object] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_number}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {line_number}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError:
            raise ConfigError(f"line {line_number}: bad value for {key}: {value!r}")

    if "data_directory" not in values:
        raise ConfigError("data_directory is required")

    def resolve(p: str) -> Path:
        path = Path(p)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        return path

    try:
        weights = RetrievalWeights(
            role=float(values.get("weight_role", 0.5)),
            phase=float(values.get("weight_phase", 0.2)),
            terms=float(values.get("weight_terms", 0.3)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    return ServiceConfig(
        data_directory=resolve(str(values["data_directory"])),
        listen_host=str(values.get("listen_host", "127.0.0.1")),
        listen_port=int(values.get("listen_port", 8347)),
        heartbeat_interval_s=int(values.get("heartbeat_interval_s", 15)),
        session_timeout_s=int(values.get("session_timeout_s", 45)),
        weights=weights,
        cf_min_co_raters=int(values.get("cf_min_co_raters", 1)),
        static_dir=resolve(str(values["static_dir"])) if "static_dir" in values else None,
    )


def load_config(path: str | Path) -> ServiceConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)
