"""Non-Markovian dephasing of a qubit by a single spin: temporal inequalities,
master-equation tomography, divisibility/BLP witnesses and ideal pulse sequences."""

from .model import ModelParams, TimeGrid

__all__ = ["ModelParams", "TimeGrid"]
__version__ = "0.1.0"
