"""Adaptive conformal prediction intervals for streaming point forecasts."""

from .algorithms import ACI, FACI, SAOCP, SFOGD, AgACI, make_estimator
from .core import PredictionInterval, ProtocolError, RunConfig, StreamStep, run_stream
from .metrics import RunReport, report_from_steps, run_report

__version__ = "0.1.0"

__all__ = [
    "ACI", "AgACI", "FACI", "SFOGD", "SAOCP", "make_estimator",
    "PredictionInterval", "ProtocolError", "RunConfig", "StreamStep", "run_stream",
    "RunReport", "report_from_steps", "run_report",
]
