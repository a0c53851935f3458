from __future__ import annotations

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide numerical defaults loaded from environment variables."""

    grid_n: int = Field(default=512, ge=16)
    u_min: float = 0.0
    u_max: float = 1.0
    depth: int = Field(default=6, ge=1)
    analytic_tolerance: float = Field(default=1e-6, gt=0)
    sampled_tolerance: float = Field(default=1e-3, gt=0)
    # alpha_{-D} needs 2D derivatives of k; sampled jets stop at order 4.
    max_sampled_depth: int = Field(default=2, ge=1)
    drift_tolerance: float = Field(default=1e-8, gt=0)
    blowup_threshold: float = Field(default=1e6, gt=0)
    gram_tolerance: float = Field(default=1e-10, gt=0)
    eta_cross_tolerance: float = Field(default=1e-12, gt=0)
    vanishing_tolerance: float = Field(default=1e-3, gt=0)
    lstsq_rcond: float = Field(default=1e-9, gt=0)
    output_dir: str = "out"
    log_level: str = "INFO"

    model_config = SettingsConfigDict(env_prefix="ISOTHERMIC_", env_file=".env", extra="ignore")

    def default_tolerance(self, sampled: bool) -> float:
        return self.sampled_tolerance if sampled else self.analytic_tolerance


settings = Settings()
