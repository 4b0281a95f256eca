"""
Application settings and configuration.
"""
import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    """Base configuration."""

    DEBUG = False
    TESTING = False

    # Logging
    LOG_LEVEL = os.getenv("VRMHD_LOG_LEVEL", "INFO")
    LOG_FORMAT = os.getenv("VRMHD_LOG_FORMAT", "json")
    LOG_FILE = os.getenv("VRMHD_LOG_FILE")

    # Runtime
    THREADS = int(os.getenv("VRMHD_THREADS", 1))
    OUTPUT_ROOT = os.getenv("VRMHD_OUTPUT_ROOT", "./runs")

    # Solvers
    LINEAR_TOL = float(os.getenv("VRMHD_LINEAR_TOL", 1e-12))
    NONLINEAR_TOL = float(os.getenv("VRMHD_NONLINEAR_TOL", 1e-10))
    MAX_NONLINEAR_ITERATIONS = int(os.getenv("VRMHD_MAX_ITERATIONS", 50))
    MAX_LINEAR_ITERATIONS = int(os.getenv("VRMHD_MAX_LINEAR_ITERATIONS", 2000))
    INVARIANT_TOL = float(os.getenv("VRMHD_INVARIANT_TOL", 1e-9))


class DevelopmentConfig(Config):
    """Development configuration."""

    DEBUG = True
    LOG_LEVEL = os.getenv("VRMHD_LOG_LEVEL", "DEBUG")
    LOG_FORMAT = os.getenv("VRMHD_LOG_FORMAT", "text")


class ProductionConfig(Config):
    """Production configuration."""

    DEBUG = False


class TestingConfig(Config):
    """Testing configuration."""

    TESTING = True
    LOG_FORMAT = "text"
    LOG_FILE = None
    OUTPUT_ROOT = os.getenv("VRMHD_TEST_OUTPUT_ROOT", "./runs-test")


CONFIGS = {
    "development": DevelopmentConfig,
    "production": ProductionConfig,
    "testing": TestingConfig,
}


def get_config(name: str = None) -> type:
    """Configuration class by name (defaults to VRMHD_ENV, then production)."""
    name = name or os.getenv("VRMHD_ENV", "production")
    try:
        return CONFIGS[name]
    except KeyError:
        from src.domain.exceptions import ConfigurationError
        raise ConfigurationError(f"unknown configuration {name!r}; expected one of {sorted(CONFIGS)}")


def export_thread_count(threads: int):
    """Pin BLAS/OpenMP pools; effective only before numpy is imported."""
    for key in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(key, str(max(int(threads), 1)))
