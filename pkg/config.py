from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_prefix="SSPEC_", extra="ignore")

    app_name: str = "S-Spectrum Dirac Toolkit"
    log_level: str = "INFO"

    identity_tolerance: float = 1e-10
    pivot_tolerance: float = 1e-12
    residual_tolerance: float = 1e-10
    bound_tolerance: float = 1e-8
    resolvent_slack: float = 0.05
    beta_circle_rtol: float = 1e-12

    poly_degree_cap: int = 8
    quadrature_points: int = 4

    trace_max_iterations: int = 10_000
    trace_tolerance: float = 1e-13

    trial_batch_size: int = 250

    max_workers: Optional[int] = 4
    default_seed: int = 42


settings = Settings()
