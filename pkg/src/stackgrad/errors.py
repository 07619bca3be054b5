"""Exception types shared across the package."""

from __future__ import annotations

import numpy as np


class StackgradError(Exception):
    """Base class for all package errors."""


class InstanceError(StackgradError):
    """A game instance violates a validity requirement (shape, symmetry, definiteness, conditioning)."""


class GenerationError(InstanceError):
    """Random instance generation exhausted its rejection budget."""


class ConfigError(StackgradError):
    """An experiment configuration is malformed or inconsistent."""


class AnalysisError(StackgradError):
    """A requested theory quantity is undefined for the given inputs."""


class OracleFailure(StackgradError):
    """An iterative follower oracle ran out of budget before certifying its target accuracy.

    Carries the best iterate found and the accuracy that *was* certified for it,
    so callers can decide whether to salvage the response.
    """

    def __init__(self, message: str, best_y: np.ndarray, eps_certified: float, iterations: int):
        super().__init__(message)
        self.best_y = best_y
        self.eps_certified = eps_certified
        self.iterations = iterations
