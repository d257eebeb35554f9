"""Exception types shared across the simulator."""


class ConfigurationError(ValueError):
    """Invalid grid/simulation configuration (bad key, bad value, K > B, ...)."""


class ContractViolation(ValueError):
    """An operation was fed inputs outside its documented domain."""


class InvariantViolation(RuntimeError):
    """A runtime invariant (power budget, demand conservation) failed mid-run."""
