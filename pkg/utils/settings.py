import logging
import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class Settings(BaseModel):
    """Environment-driven defaults shared by the CLI and the HTTP service."""

    log_level: str = "INFO"
    time_limit: float = Field(100.0, gt=0)
    ingested_time_limit: float = Field(180.0, gt=0)
    oracle_max_n: int = Field(14, gt=0)
    ne_max_n: int = Field(10, gt=0)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    load_dotenv()
    return Settings(
        log_level=os.getenv("CNG_LOG", "INFO").upper(),
        time_limit=float(os.getenv("CNG_TIME_LIMIT", "100")),
        ingested_time_limit=float(os.getenv("CNG_INGESTED_TIME_LIMIT", "180")),
        oracle_max_n=int(os.getenv("CNG_ORACLE_MAX_N", "14")),
        ne_max_n=int(os.getenv("CNG_NE_MAX_N", "10")),
    )


def configure_logging() -> None:
    level = getattr(logging, get_settings().log_level, logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT)
