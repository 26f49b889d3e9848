"""Genealogical distances in a two-type Moran population under selection and mutation."""

__version__ = "0.1.0"

from .moran import ModelParams, init_population, run_replicate, run_until, step_event  # noqa: E402
from .stats import EmpiricalCdf, dkw_band, dominance_check  # noqa: E402

__all__ = [
    "__version__", "ModelParams", "init_population", "step_event", "run_until", "run_replicate",
    "EmpiricalCdf", "dkw_band", "dominance_check",
]
