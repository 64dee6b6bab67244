from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="WNGF_", env_file=".env", extra="ignore")

    app_name: str = "wngf"

    # Logging
    log_level: str = "INFO"
    log_file: str = ""  # empty => console only
    log_max_bytes: int = 2_000_000
    log_backup_count: int = 5

    # Brute-force oracle is O(n^3); refuse graphs above this size
    oracle_max_nodes: int = Field(default=64, ge=3)

    # Default parallelism of count_roles (flags override)
    workers: int = Field(default=1, ge=1)

    # Default ranking depth of compare (flags override)
    top_k: int = Field(default=5, ge=1)


settings = Settings()
