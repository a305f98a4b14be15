"""
Adiabatic Counting - Berry-phase quantum counting simulation and invariant checks
"""

__version__ = "1.0.0"
__author__ = "Adiabatic Counting Team"

from .analysis.scheduler import CountingScheduler, run_counting
from .core.database import create_database, load_instance
from .core.models import EngineMode, RunConfig

__all__ = [
    "CountingScheduler",
    "EngineMode",
    "RunConfig",
    "create_database",
    "load_instance",
    "run_counting",
]
