"""Exception types shared across the simulator."""


class NcsimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(NcsimError, ValueError):
    """Invalid, unknown, or inconsistent configuration input."""


class DomainError(NcsimError, ValueError):
    """A state evaluation was requested outside the plant's state domain."""


class IntegrationDomainError(DomainError):
    """An integration stage left the state domain.

    Attributes:
        stage: 1-based index of the offending stage.
        state: the state value that fell outside the domain.
    """

    def __init__(self, message: str, stage: int, state: float):
        super().__init__(message)
        self.stage = stage
        self.state = state


class NonFiniteError(NcsimError, ArithmeticError):
    """A computation produced NaN or infinity."""


class ControllerOverflowError(NonFiniteError):
    """The feedback formula overflowed (e.g. the fourth power of LgV)."""


class TrajectoryError(NcsimError):
    """Prediction left the state domain before the horizon was filled.

    Carries the valid prefix so callers can inspect how far the
    prediction got.

    Attributes:
        valid_length: number of input entries computed before the failure.
        inputs: tuple with the valid input prefix.
        predicted_states: tuple with the valid predicted-state prefix.
    """

    def __init__(self, message: str, inputs, predicted_states):
        super().__init__(message)
        self.inputs = tuple(inputs)
        self.predicted_states = tuple(predicted_states)
        self.valid_length = len(self.inputs)


class CalibrationRangeError(NcsimError):
    """Calibration produced a correction factor with magnitude >= 1.

    Attributes:
        gamma: the raw out-of-range value.
    """

    def __init__(self, message: str, gamma: float):
        super().__init__(message)
        self.gamma = gamma


class TraceExhaustedError(NcsimError):
    """A reception trace ran out of entries and wrapping was not enabled."""


class SimulationDiverged(NcsimError):
    """The closed-loop state left the plant domain mid-run.

    Attributes:
        records: the per-step records accumulated before the failure.
        step: index of the control interval during which the run failed.
        reason: short human-readable cause.
    """

    def __init__(self, message: str, records, step: int, reason: str):
        super().__init__(message)
        self.records = list(records)
        self.step = step
        self.reason = reason
