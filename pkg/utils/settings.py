"""
Settings Manager for PyQuadMat
Handles loading and saving engine settings using JSON, plus the
environment override for the worker count
"""

import logging
import os
import sys
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from core.errors import ConfigError

logger = logging.getLogger(__name__)

SETTINGS_FILE_NAME = "settings.json"


class EngineSettings(BaseModel):
    """Persisted defaults for the task engine and the bench harness"""

    topology_mode: Literal["shared_queue", "multidispatch"] = "multidispatch"
    repetitions: int = Field(3, ge=3)
    worker_counts: List[int] = Field(default_factory=lambda: [1, 2, 4, 8])
    granularity: int = Field(256, ge=1)
    leaf_order: int = Field(32, ge=1)
    prime_bits: int = Field(31, ge=16, le=62)

    @field_validator("worker_counts")
    @classmethod
    def _ascending_counts(cls, counts):
        if not counts or any(c < 1 for c in counts) or counts != sorted(set(counts)):
            raise ValueError("worker counts must be positive, distinct and ascending")
        return counts

    @field_validator("leaf_order")
    @classmethod
    def _power_of_two(cls, value):
        if value & (value - 1):
            raise ValueError("leaf order must be a power of two")
        return value


class EnvOverrides(BaseSettings):
    """PYQUADMAT_WORKERS replaces the worker count of a run"""

    model_config = SettingsConfigDict(env_prefix="PYQUADMAT_")

    workers: Optional[int] = Field(None, ge=1)


def worker_override():
    """Worker count from the environment, or None"""
    try:
        return EnvOverrides().workers
    except ValidationError as exc:
        raise ConfigError(f"PYQUADMAT_WORKERS: {exc.errors()[0]['msg']}") from None


class SettingsManager:
    """Manages engine settings storage and retrieval"""

    def __init__(self, settings_file=None):
        self._settings_file = settings_file
        self.settings = EngineSettings()

    def get_settings_file_path(self):
        """Get the path to settings.json - next to the application script unless given"""
        if self._settings_file:
            return self._settings_file
        main_module = sys.modules.get("__main__")
        if main_module is not None and getattr(main_module, "__file__", None):
            script_dir = os.path.dirname(os.path.abspath(main_module.__file__))
        else:
            script_dir = os.getcwd()
        self._settings_file = os.path.join(script_dir, SETTINGS_FILE_NAME)
        return self._settings_file

    def load_settings(self):
        """Load settings; a missing file yields the defaults"""
        settings_file = self.get_settings_file_path()
        if not os.path.exists(settings_file):
            logger.info("no settings file at %s, using defaults", settings_file)
            self.settings = EngineSettings()
            return self.settings
        try:
            with open(settings_file, "r", encoding="utf-8") as f:
                self.settings = EngineSettings.model_validate_json(f.read())
        except ValidationError as exc:
            first = exc.errors()[0]
            where = ".".join(str(part) for part in first["loc"]) or "settings"
            raise ConfigError(f"{settings_file}: {where}: {first['msg']}") from None
        logger.info("loaded settings from %s", settings_file)
        return self.settings

    def save_settings(self, settings=None):
        """Save settings to the settings file"""
        if settings is not None:
            self.settings = settings
        settings_file = self.get_settings_file_path()
        with open(settings_file, "w", encoding="utf-8") as f:
            f.write(self.settings.model_dump_json(indent=2))
            f.write("\n")
        logger.info("saved settings to %s", settings_file)

    def update(self, **changes):
        """Validate and store changed fields, then save"""
        try:
            updated = EngineSettings.model_validate({**self.settings.model_dump(), **changes})
        except ValidationError as exc:
            raise ConfigError(str(exc.errors()[0]["msg"])) from None
        self.save_settings(updated)
        return updated
