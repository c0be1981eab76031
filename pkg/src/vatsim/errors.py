"""Exception types raised across the package."""


class VatError(Exception):
    """Base class for all errors raised by vatsim."""


class ConfigError(VatError, ValueError):
    """Invalid model or experiment parameters."""


class AddressRangeError(VatError, ValueError):
    """A virtual address lies outside the translatable range."""

    def __init__(self, value, maximum):
        super().__init__(
            f"address {value} outside translatable range [0, {maximum}]")
        self.value = value
        self.maximum = maximum


class SequencingError(VatError, RuntimeError):
    """An offline policy was fed an address that diverges from its trace."""


class PreconditionError(VatError, ValueError):
    """A bound formula was evaluated outside its stated domain."""


class TraceFormatError(VatError, ValueError):
    """A trace file could not be parsed."""
