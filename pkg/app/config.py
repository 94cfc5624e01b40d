# app/config.py
from __future__ import annotations

from functools import lru_cache

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Process-level defaults. Read from LAGRANGE_* environment variables
    (a local .env is loaded first).
    """

    model_config = SettingsConfigDict(env_prefix="LAGRANGE_", extra="ignore")

    invertibility_tol: float = Field(1e-10, gt=0)
    hermitian_tol: float = Field(1e-12, gt=0)
    unitary_tol: float = Field(1e-12, gt=0)
    output_dir: str = "runs"
    log_level: str = "INFO"
    max_samples: int = Field(1001, ge=2)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    load_dotenv()
    return Settings()
