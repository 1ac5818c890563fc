"""Error types shared across the package."""


class ConfigurationError(ValueError):
    """A config value is missing, malformed, or out of range."""


class ParseError(ValueError):
    """A text input (Pauli-sum file, trace file, config) failed to parse."""


class CapabilityError(ValueError):
    """A request exceeds what the simulator supports (e.g. too many qubits)."""


class TraceExhaustedError(RuntimeError):
    """The transient trace ran out of entries before the run finished."""
