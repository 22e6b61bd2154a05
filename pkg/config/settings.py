import os
from typing import Dict, Any
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


def _env_bool(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


class Settings:
    # Application
    PROJECT_NAME = "Volterra Sum-Kernel Solver"
    VERSION = "1.0.0"

    # Logging
    LOG_LEVEL = os.getenv("VOLTERRA_LOG_LEVEL", "INFO")

    # Series stop rule
    ABS_TOL = float(os.getenv("VOLTERRA_ABS_TOL", "1e-12"))
    REL_TOL = float(os.getenv("VOLTERRA_REL_TOL", "1e-10"))
    DEFAULT_ORDERS = int(os.getenv("VOLTERRA_DEFAULT_ORDERS", "8"))

    # Numeric component resolvents are run to floor, capped at this many terms
    NEUMANN_MAX_TERMS = int(os.getenv("VOLTERRA_NEUMANN_MAX_TERMS", "200"))

    # Largest delta coefficient of T accepted before clamping
    DELTA_FLOOR = float(os.getenv("VOLTERRA_DELTA_FLOOR", "1e-9"))

    # Verification
    THETA_POWER_TOL = float(os.getenv("VOLTERRA_THETA_POWER_TOL", "5e-5"))
    THETA_POWER_MAX_K = int(os.getenv("VOLTERRA_THETA_POWER_MAX_K", "6"))

    # Output
    OUTPUT_DIR = os.getenv("VOLTERRA_OUTPUT_DIR", "./output")
    INCLUDE_TIMINGS = _env_bool("VOLTERRA_INCLUDE_TIMINGS")

    @property
    def output_directory(self) -> Path:
        """Get default output directory as Path object"""
        return Path(self.OUTPUT_DIR)

    def ensure_output_directory(self, path: Path = None) -> Path:
        """Ensure an output directory exists and return it"""
        directory = Path(path) if path is not None else self.output_directory
        directory.mkdir(parents=True, exist_ok=True)
        return directory

    def __str__(self) -> str:
        return f"{self.PROJECT_NAME} v{self.VERSION}"

    def to_dict(self) -> Dict[str, Any]:
        """Convert settings to dictionary (timing flag excluded, outputs stay reproducible)"""
        return {
            "project_name": self.PROJECT_NAME,
            "version": self.VERSION,
            "abs_tol": self.ABS_TOL,
            "rel_tol": self.REL_TOL,
            "default_orders": self.DEFAULT_ORDERS,
            "neumann_max_terms": self.NEUMANN_MAX_TERMS,
            "delta_floor": self.DELTA_FLOOR,
            "theta_power_tol": self.THETA_POWER_TOL,
            "theta_power_max_k": self.THETA_POWER_MAX_K,
        }


# Create global settings instance
settings = Settings()
