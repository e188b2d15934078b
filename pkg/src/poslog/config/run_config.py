# config/run_config.py
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from poslog.config import settings
from poslog.exceptions import ConfigError

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("text", "json", "dot")


def _bound(flag: Optional[int], env_name: str, default: int) -> int:
    """Flag value, else the environment as it is now, else the default."""
    if flag is not None:
        return flag
    raw = os.getenv(env_name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"{env_name} must be an integer, got '{raw}'") from e


def resolve_path(path: Optional[str], corpus_dir: Optional[str] = None) -> Optional[Path]:
    """A path as given, or the same name inside the corpus directory.

    Raises:
        ConfigError: when neither exists
    """
    if path is None:
        return None
    candidate = Path(path)
    if candidate.exists():
        return candidate
    shipped = Path(corpus_dir or settings.CORPUS_DIR) / path
    if shipped.exists():
        return shipped
    raise ConfigError(f"File not found: {path}")


@dataclass(frozen=True)
class RunConfig:
    depth: int
    width_cap: int
    ceiling: int
    dnf_ceiling: int
    theory_path: Optional[Path] = None
    class_path: Optional[Path] = None
    fragment_path: Optional[Path] = None
    existential_member: Optional[str] = None
    variables: Optional[int] = None
    output_format: str = "text"

    def __post_init__(self):
        if self.depth < 0:
            raise ConfigError("depth must not be negative")
        if self.variables is not None and self.variables < 1:
            raise ConfigError("variables must be positive")
        for name in ("width_cap", "ceiling", "dnf_ceiling"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"Unknown output format '{self.output_format}'")

    @classmethod
    def build(cls, depth: Optional[int] = None, width_cap: Optional[int] = None,
              ceiling: Optional[int] = None, theory: Optional[str] = None,
              universe: Optional[str] = None, fragment: Optional[str] = None,
              existential_member: Optional[str] = None, variables: Optional[int] = None,
              output_format: str = "text") -> "RunConfig":
        """Resolve every bound with flag > environment > default precedence.

        Raises:
            ConfigError: on a missing file, a malformed variable or a non-positive bound
        """
        corpus_dir = os.getenv("POSLOG_CORPUS_DIR", settings.CORPUS_DIR)
        return cls(
            depth=_bound(depth, "POSLOG_DEPTH", 1),
            width_cap=_bound(width_cap, "POSLOG_WIDTH_CAP", 2),
            ceiling=_bound(ceiling, "POSLOG_CEILING", 200000),
            dnf_ceiling=_bound(None, "POSLOG_DNF_CEILING", 4096),
            theory_path=resolve_path(theory, corpus_dir),
            class_path=resolve_path(universe, corpus_dir),
            fragment_path=resolve_path(fragment, corpus_dir),
            existential_member=existential_member,
            variables=variables,
            output_format=output_format,
        )

    def apply(self):
        """Install the bounds as the process-wide defaults read by the services."""
        settings.POSLOG_DEPTH = self.depth
        settings.POSLOG_WIDTH_CAP = self.width_cap
        settings.POSLOG_CEILING = self.ceiling
        settings.POSLOG_DNF_CEILING = self.dnf_ceiling
        logger.debug(f"Run bounds: depth {self.depth}, width {self.width_cap}, "
                     f"ceiling {self.ceiling}, dnf ceiling {self.dnf_ceiling}")
