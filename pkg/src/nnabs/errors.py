"""Exception types raised across the package."""


class NnabsError(Exception):
    """Base class for all errors raised by nnabs."""


class ModelFormatError(NnabsError, ValueError):
    """Malformed model or input file."""


class ShapeMismatchError(NnabsError, ValueError):
    def __init__(self, message: str, layer_index: int | None = None):
        if layer_index is not None:
            message = f"layer {layer_index}: {message}"
        super().__init__(message)
        self.layer_index = layer_index


class UnknownVariableError(NnabsError, KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unknown variable {self.name!r}"


class BottomError(NnabsError, ValueError):
    """Operation needs a feasible (non-bottom) abstract element."""


class DomainMismatchError(NnabsError, ValueError):
    """Two abstract elements do not range over the same variables."""


class HintsSchemaError(NnabsError, ValueError):
    def __init__(self, message: str, record_index: int | None = None):
        if record_index is not None:
            message = f"neuron record {record_index}: {message}"
        super().__init__(message)
        self.record_index = record_index
