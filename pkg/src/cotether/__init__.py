"""SINR statistics, simulation and topology optimization for eNB-controlled WLAN offloading via AP relays."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.1.0"

from .dist import (
    FormAIID,
    FormAIND,
    FormBIID,
    FormBIND,
    MaxOf,
    MinOf,
    SinrDistribution,
    end_to_end_distribution,
    from_interference_config,
)
from .errors import DivergentIntegralError, IllConditionedError, SearchCapExceeded

__all__ = [
    "FormAIID",
    "FormAIND",
    "FormBIID",
    "FormBIND",
    "MaxOf",
    "MinOf",
    "SinrDistribution",
    "end_to_end_distribution",
    "from_interference_config",
    "DivergentIntegralError",
    "IllConditionedError",
    "SearchCapExceeded",
    "__version__",
]
