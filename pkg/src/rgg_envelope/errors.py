"""Exception types raised by the library.

Each class corresponds to one failure mode named in the operation
contracts; the CLI maps them to exit codes.
"""

from __future__ import annotations


class EnvelopeError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(EnvelopeError):
    """Dimension below 2 requested."""


class InvalidParameterError(EnvelopeError):
    """Parameter outside its legal range (r, delta, alpha, grids, ...)."""


class ScheduleUndefinedError(EnvelopeError):
    """Parameter schedule requested for n too small to define it."""


class MissingAnnulusError(EnvelopeError):
    """An operation required a nonempty annulus neighborhood."""

    def __init__(self, vertex: int):
        self.vertex = int(vertex)
        super().__init__(f"vertex {vertex} has an empty annulus neighborhood")


class DegenerateExperimentError(EnvelopeError):
    """Interior or boundary set is empty where both are required."""


class NonConvergenceError(EnvelopeError):
    """Value iteration hit the sweep cap before reaching tolerance."""

    def __init__(self, sweeps: int, residual_history):
        self.sweeps = int(sweeps)
        self.residual_history = list(residual_history)
        last = self.residual_history[-1] if self.residual_history else float("nan")
        super().__init__(
            f"no convergence after {sweeps} sweeps, last residual {last:.3e}"
        )


class NonTerminationError(EnvelopeError):
    """A game episode hit the step cap before reaching the boundary."""

    def __init__(self, episode: int, cap: int):
        self.episode = int(episode)
        self.cap = int(cap)
        super().__init__(f"episode {episode} exceeded the step cap {cap}")


class OutOfDomainError(EnvelopeError):
    """Query point outside the closed domain."""


class InfeasibleOracleError(EnvelopeError):
    """Brute-force envelope oracle found no feasible combination."""


class ConfigError(EnvelopeError):
    """Experiment configuration file is invalid."""
