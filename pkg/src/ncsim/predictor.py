"""State prediction for control intervals without fresh measurements.

The predictor advances the nominal model (disturbance set to zero) with
one classical fourth-order Runge-Kutta step per break point and applies
a multiplicative correction afterwards:

    xhat[i+1] = (1 + gamma) * xhat[i] + dx[i],   |gamma| < 1

``gamma`` soaks up model error that grows with the state itself, which
is exactly the structure of a disturbance entering through a gain
proportional to x.  Two offline procedures estimate it from recorded
pairs of predicted and measured states; both divide a mean squared
error by a mean prediction, so the result is unit dependent and the
sample sets must share the plant's units.
"""

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import (
    CalibrationRangeError,
    DomainError,
    IntegrationDomainError,
    TrajectoryError,
)
from .plant import SystemDynamics

Controller = Callable[[float], float]


@dataclass(frozen=True)
class PredictorConfig:
    """Prediction step size, correction factor, and buffer horizon.

    Attributes:
        delta: integration step of the predictor [s].
        gamma: multiplicative correction factor, magnitude below one.
        horizon: number of look-ahead entries N; a trajectory holds
            N + 1 inputs.
    """

    delta: float
    gamma: float
    horizon: int

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta!r}")
        if not abs(self.gamma) < 1:
            raise ValueError(f"|gamma| must be < 1, got {self.gamma!r}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon!r}")


@dataclass(frozen=True)
class ControlTrajectory:
    """Inputs precomputed at a sample instant for the next N intervals.

    Attributes:
        origin_step: control-interval index at which the trajectory was
            computed.
        inputs: N + 1 input values, entry j intended for the j-th
            interval after the origin.
        predicted_states: the predicted states the inputs were computed
            from, aligned with ``inputs``.
    """

    origin_step: int
    inputs: tuple[float, ...]
    predicted_states: tuple[float, ...]

    def __post_init__(self):
        if len(self.inputs) != len(self.predicted_states) or not self.inputs:
            raise ValueError("inputs and predicted_states must be equally sized and non-empty")
        if self.origin_step < 0:
            raise ValueError("origin_step must be non-negative")


def rk4_increment(dynamics: SystemDynamics, x: float, u: float, delta: float) -> float:
    """One classical Runge-Kutta step of the nominal model.

    Returns the increment (k1 + 2*k2 + 2*k3 + k4) / 6 for
    dx/dt = f(x) + g(x)*u with the input held constant across all four
    stages.  A stage state outside the plant domain raises
    ``IntegrationDomainError`` carrying the stage index.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")

    def stage(xs: float, index: int) -> float:
        try:
            return delta * (dynamics.f(xs) + dynamics.g(xs) * u)
        except DomainError as exc:
            raise IntegrationDomainError(
                f"stage {index} state {xs!r} left the domain", stage=index, state=xs
            ) from exc

    k1 = stage(x, 1)
    k2 = stage(x + k1 / 2.0, 2)
    k3 = stage(x + k2 / 2.0, 3)
    k4 = stage(x + k3, 4)
    return (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def predict_step(
    cfg: PredictorConfig, dynamics: SystemDynamics, xhat: float, u: float
) -> float:
    """Advance the prediction one break point.

    With ``gamma == 0`` this reduces bitwise to the plain update
    ``xhat + rk4_increment(...)``.  The corrected state must stay in the
    plant domain.
    """
    increment = rk4_increment(dynamics, xhat, u, cfg.delta)
    corrected = (1.0 + cfg.gamma) * xhat + increment
    dynamics.check_state(corrected)
    return corrected


def predict_trajectory(
    cfg: PredictorConfig,
    dynamics: SystemDynamics,
    x0: float,
    controller: Controller,
    origin_step: int = 0,
    steps_per_input: int = 1,
) -> ControlTrajectory:
    """Roll the predictor forward and collect a length-(N+1) input buffer.

    Entry j is the controller evaluated on the predicted state j
    intervals ahead; the prediction then advances ``steps_per_input``
    predictor steps holding that input (one step when the predictor step
    equals the control interval).  If the prediction leaves the plant
    domain mid-horizon a ``TrajectoryError`` with the valid prefix is
    raised.
    """
    if steps_per_input < 1:
        raise ValueError("steps_per_input must be >= 1")
    dynamics.check_state(x0)
    inputs: list[float] = []
    states: list[float] = [x0]
    xhat = x0
    for j in range(cfg.horizon + 1):
        u = controller(xhat)
        inputs.append(u)
        if j == cfg.horizon:
            break
        try:
            for _ in range(steps_per_input):
                xhat = predict_step(cfg, dynamics, xhat, u)
        except DomainError as exc:
            raise TrajectoryError(
                f"prediction left the domain after {len(inputs)} entries",
                inputs=inputs,
                predicted_states=states,
            ) from exc
        states.append(xhat)
    return ControlTrajectory(
        origin_step=origin_step,
        inputs=tuple(inputs),
        predicted_states=tuple(states),
    )


@dataclass(frozen=True)
class SamplePair:
    """One matched recording of predicted and measured state sequences."""

    predicted: tuple[float, ...]
    measured: tuple[float, ...]

    def __post_init__(self):
        if len(self.predicted) != len(self.measured) or not self.predicted:
            raise ValueError("predicted and measured must be equally sized and non-empty")
        if any(not math.isfinite(v) for v in self.predicted + self.measured):
            raise ValueError("samples must be finite")


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def mean_squared_error(predicted: Sequence[float], measured: Sequence[float]) -> float:
    """Average of the squared prediction errors over one sample set."""
    if len(predicted) != len(measured) or not predicted:
        raise ValueError("predicted and measured must be equally sized and non-empty")
    return sum((m - p) ** 2 for p, m in zip(predicted, measured)) / len(predicted)


def _check_range(gamma: float) -> float:
    if not abs(gamma) < 1:
        raise CalibrationRangeError(
            f"calibrated correction factor {gamma!r} outside (-1, 1)", gamma=gamma
        )
    return gamma


def calibrate_gamma_one(
    predicted: Sequence[float], measured: Sequence[float]
) -> float:
    """Single-recording calibration.

    The mean squared error E is divided by the mean predicted state and
    signed positive exactly when the predictions underestimate the
    measurements on average.  Raises ``ZeroDivisionError`` for a zero
    mean prediction and ``CalibrationRangeError`` when the result has
    magnitude one or more.
    """
    e = mean_squared_error(predicted, measured)
    mean_pred = _mean(predicted)
    mean_meas = _mean(measured)
    if mean_pred == 0.0:
        raise ZeroDivisionError("mean predicted state is zero")
    zeta = 1.0 if mean_pred <= mean_meas else -1.0
    return _check_range(zeta * e / mean_pred)


def calibrate_gamma_two(pairs: Sequence[SamplePair]) -> float:
    """Multi-recording calibration.

    Per-pair mean squared errors are averaged, the denominator is the
    grand mean of the per-pair prediction means, and the sign compares
    the grand means of predictions and measurements.  With a single pair
    this collapses to the single-recording method.
    """
    if not pairs:
        raise ValueError("at least one sample pair is required")
    m = len(pairs)
    e = sum(mean_squared_error(p.predicted, p.measured) for p in pairs) / m
    grand_pred = sum(_mean(p.predicted) for p in pairs) / m
    grand_meas = sum(_mean(p.measured) for p in pairs) / m
    if grand_pred == 0.0:
        raise ZeroDivisionError("grand mean predicted state is zero")
    zeta = 1.0 if grand_pred <= grand_meas else -1.0
    return _check_range(zeta * e / grand_pred)


def read_sample_pairs(path: str) -> list[SamplePair]:
    """Load calibration samples from a CSV file.

    Expected header: ``pair_id,predicted,measured``.  Rows sharing a
    ``pair_id`` form one sample pair; pairs keep first-appearance order.
    """
    groups: dict[str, tuple[list[float], list[float]]] = {}
    order: list[str] = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"pair_id", "predicted", "measured"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(
                f"sample file must have columns pair_id,predicted,measured, got {reader.fieldnames}"
            )
        for row in reader:
            pair_id = row["pair_id"]
            if pair_id not in groups:
                groups[pair_id] = ([], [])
                order.append(pair_id)
            try:
                groups[pair_id][0].append(float(row["predicted"]))
                groups[pair_id][1].append(float(row["measured"]))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"bad sample row {row!r}") from exc
    if not order:
        raise ValueError(f"no sample rows in {path}")
    return [
        SamplePair(predicted=tuple(groups[p][0]), measured=tuple(groups[p][1]))
        for p in order
    ]
