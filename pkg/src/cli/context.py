from __future__ import annotations

from dataclasses import dataclass, field

from src import __version__
from src.config.run_config import RUN_CONFIG
from src.fibred_system.config_io import system_metadata
from src.fibred_system.digit_system import DigitSystem


@dataclass
class RunConfig:
    """Everything one CLI run depends on; ``metadata()`` is the report header."""
    command: str
    system: DigitSystem
    source: str
    params: dict = field(default_factory=dict)
    fmt: str = "csv"
    seed: int = RUN_CONFIG["seed"]
    version: str = __version__

    def metadata(self) -> dict:
        meta = {
            "command": self.command,
            "version": self.version,
            "seed": self.seed,
            "system_source": self.source,
        }
        meta.update({f"system_{k}": v for k, v in system_metadata(self.system).items()})
        meta.update(self.params)
        return meta
