# maw/config.py
import os
import sys
from functools import lru_cache

from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

load_dotenv()


def _env_bool(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).lower() in ("1", "true", "yes")


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    utc_offset_min: int = Field(default=0, ge=-14 * 60, le=14 * 60)
    accuracy_split_m: float = Field(default=100.0, gt=0)
    workers: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    memory_sample_hz: float = Field(default=1.0, ge=1.0)
    debug_checks: bool = False
    progress: bool = False


@lru_cache
def get_settings() -> Settings:
    return Settings(
        utc_offset_min=int(os.getenv("MAW_UTC_OFFSET_MIN", "0")),
        accuracy_split_m=float(os.getenv("MAW_ACCURACY_SPLIT_M", "100")),
        workers=int(os.getenv("MAW_WORKERS", "1")),
        log_level=os.getenv("MAW_LOG_LEVEL", "INFO").upper(),
        memory_sample_hz=float(os.getenv("MAW_MEMORY_SAMPLE_HZ", "1.0")),
        debug_checks=_env_bool("MAW_DEBUG_CHECKS"),
        progress=_env_bool("MAW_PROGRESS"),
    )


def configure_logging(level: str | None = None) -> None:
    logger.remove()
    logger.add(
        sys.stderr,
        level=(level or get_settings().log_level),
        format="{time:HH:mm:ss} | {level: <7} | {name}:{line} - {message}",
    )
