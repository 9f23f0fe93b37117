import sys
from pathlib import Path

from loguru import logger
from pydantic import BaseModel, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

__all__ = ('app_config', 'AppConfig')


class Solver(BaseModel):
    """Contains integrator defaults."""

    corrector_iterations: int = Field(2, ge=0)
    corrector_tolerance: float = Field(1e-10, gt=0)
    quadrature_points_per_step: int = Field(1, ge=1)
    step_fraction: float = Field(0.25, gt=0, le=1)


class Analysis(BaseModel):
    """Contains certification defaults."""

    samples_per_window: int = Field(64, ge=8)
    history_samples: int = Field(256, ge=8)
    check_slack: float = Field(1e-6, gt=0)
    hull_directions: int = Field(16, ge=16)
    hull_sample_times: int = Field(64, ge=2)
    projection_trials: int = Field(64, ge=1)
    psi0_resolution: int = Field(64, ge=2)
    psi0_pair_budget: int = Field(2 ** 22, ge=16)
    delay_probe_points: int = Field(10_000, ge=2)
    rate_tolerance: float = Field(1e-6, ge=0)
    seed: int = 0


class Logging(BaseModel):
    """Contains logging settings."""

    level: str = 'INFO'


class AppConfig(BaseSettings):
    """Responsible for loading and validation of application settings.
    """

    solver: Solver = Solver()
    analysis: Analysis = Analysis()
    logging: Logging = Logging()
    seed_dir: Path = Path(__file__).resolve().parent.parent / 'scenarios'
    jobs: int = Field(1, ge=1)

    model_config = SettingsConfigDict(
        env_prefix='HKDELAY_',
        env_file='.env',
        env_file_encoding='utf-8',
        extra='ignore',
        env_nested_delimiter='__'
    )


try:
    # noinspection PyArgumentList
    app_config = AppConfig()
except ValidationError as e:
    logger.error(f'Validation error during config initialization: {e}')

    sys.exit(-1)
