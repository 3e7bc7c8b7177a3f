"""Exception types shared across the simulator."""


class ConfigurationError(ValueError):
    """Invalid pilot configuration, feasible set, or scenario parameter."""


class ProtocolError(ValueError):
    """Malformed or out-of-contract feedback message / epoch state."""
