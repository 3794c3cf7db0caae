"""Sampled-data closed loop with dropout compensation strategies.

Each control interval [t_k, t_{k+1}) applies one constant input chosen
from the current measurement when it arrives, or from a compensation
strategy when it is lost:

* ``predictive-buffer`` recomputes a predicted input trajectory at every
  received sample and replays buffered entries during losses, advancing
  one entry per lost interval and freezing at the last entry once the
  buffer is exhausted.
* ``hold-last-value`` repeats the last applied input.
* ``zero-input`` applies zero.

The true state advances by Runge-Kutta integration of the full dynamics
(disturbance included), subdivided into ``n_truth`` substeps per
interval, which stands in for the continuous plant.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import median
from typing import Optional, Sequence

from .controller import ControllerConfig, LyapunovSpec, sontag_input
from .errors import (
    DomainError,
    IntegrationDomainError,
    NonFiniteError,
    SimulationDiverged,
    TrajectoryError,
)
from .losses import LossModel
from .plant import SystemDynamics, UncertaintySignal
from .predictor import ControlTrajectory, PredictorConfig, predict_trajectory

PREDICTIVE_BUFFER = "predictive-buffer"
HOLD_LAST_VALUE = "hold-last-value"
ZERO_INPUT = "zero-input"
STRATEGIES = (PREDICTIVE_BUFFER, HOLD_LAST_VALUE, ZERO_INPUT)

TRACE_HEADER = ("k", "t", "x_true", "x_pred", "s", "i", "u", "J_running")


@dataclass(frozen=True)
class SimulationRecord:
    """One control interval of a closed-loop run.

    Attributes:
        k: control-interval index.
        t: interval start time, t0 + k * t_s.
        x_true: plant state at t.
        x_pred: predicted state the applied input was computed for
            (None for strategies that do not predict).
        s: reception bit of the interval's measurement.
        i: buffer age, zero on reception and capped at the horizon.
        u: applied input.
        j_running: cumulative cost through this interval.
    """

    k: int
    t: float
    x_true: float
    x_pred: Optional[float]
    s: int
    i: int
    u: float
    j_running: float


@dataclass(frozen=True)
class CostWeights:
    """Quadratic stage-cost weights and evaluation horizon."""

    q_c: float
    r_c: float
    m_steps: int

    def __post_init__(self):
        if self.q_c < 0 or self.r_c < 0:
            raise ValueError("cost weights must be non-negative")
        if self.m_steps < 1:
            raise ValueError("m_steps must be >= 1")


@dataclass(frozen=True)
class SimSettings:
    """Initial state, sampling grid, and truth-integration refinement.

    ``doubled_age_offset`` switches the buffer replay rule during loss
    bursts: entry ``2i + 1`` after ``i`` consecutive losses rather than
    the entry matching the elapsed steps since the trajectory's origin.
    """

    x0: float
    t_s: float
    steps: int
    theta: UncertaintySignal
    n_truth: int = 20
    doubled_age_offset: bool = False

    def __post_init__(self):
        if not math.isfinite(self.x0):
            raise ValueError("x0 must be finite")
        if not self.t_s > 0:
            raise ValueError("t_s must be positive")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.n_truth < 1:
            raise ValueError("n_truth must be >= 1")


@dataclass(frozen=True)
class RunResult:
    """Records of a completed run plus the state after the last interval."""

    records: tuple[SimulationRecord, ...]
    x_final: float


def integrate_interval(
    dynamics: SystemDynamics,
    x: float,
    u: float,
    t_start: float,
    t_s: float,
    n_truth: int,
    theta: UncertaintySignal,
) -> float:
    """Advance the true state one control interval under constant input.

    Runs ``n_truth`` Runge-Kutta steps of the full dynamics, evaluating
    the disturbance at each substep start.  Any stage outside the state
    domain raises ``IntegrationDomainError``.
    """
    lo, hi = dynamics.state_domain
    f = dynamics.drift
    g = dynamics.input_gain
    w = dynamics.uncertainty_gain
    h = t_s / n_truth

    def rhs(xs: float, th: float, stage: int) -> float:
        if not (lo <= xs <= hi):
            raise IntegrationDomainError(
                f"stage {stage} state {xs!r} left the domain", stage=stage, state=xs
            )
        return f(xs) + g(xs) * u + w(xs) * th

    for j in range(n_truth):
        th = theta.value(t_start + j * h)
        k1 = h * rhs(x, th, 1)
        k2 = h * rhs(x + k1 / 2.0, th, 2)
        k3 = h * rhs(x + k2 / 2.0, th, 3)
        k4 = h * rhs(x + k3, th, 4)
        x = x + (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if not math.isfinite(x):
            raise NonFiniteError(f"state became non-finite during interval at t={t_start!r}")
    dynamics.check_state(x)
    return x


def run_closed_loop(
    dynamics: SystemDynamics,
    predictor_cfg: PredictorConfig,
    lyapunov: LyapunovSpec,
    control_cfg: ControllerConfig,
    loss_model: LossModel,
    strategy: str,
    sim: SimSettings,
    weights: CostWeights,
    cost_raw_state: bool = False,
    steps_per_input: int = 1,
) -> RunResult:
    """Simulate the lossy loop and return per-interval records.

    On a domain exit (truth integration or prediction) raises
    ``SimulationDiverged`` carrying the records accumulated so far.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")
    dynamics.check_state(sim.x0)

    def controller(xs: float) -> float:
        return sontag_input(dynamics, lyapunov, control_cfg, xs)

    horizon = predictor_cfg.horizon
    setpoint = lyapunov.setpoint
    records: list[SimulationRecord] = []
    x = sim.x0
    trajectory: Optional[ControlTrajectory] = None
    age = 0
    last_u = 0.0
    j_running = 0.0

    for k in range(sim.steps):
        t_k = k * sim.t_s
        s_k = loss_model.sample_reception(k)
        try:
            x_pred: Optional[float] = None
            if strategy == PREDICTIVE_BUFFER:
                if s_k:
                    trajectory = predict_trajectory(
                        predictor_cfg,
                        dynamics,
                        x,
                        controller,
                        origin_step=k,
                        steps_per_input=steps_per_input,
                    )
                    age = 0
                    offset = 0
                else:
                    if trajectory is None:
                        # No measurement yet: fall back to the trajectory
                        # planned from the known initial state.
                        trajectory = predict_trajectory(
                            predictor_cfg,
                            dynamics,
                            sim.x0,
                            controller,
                            origin_step=0,
                            steps_per_input=steps_per_input,
                        )
                    if sim.doubled_age_offset:
                        offset = min(2 * age + 1, horizon)
                    else:
                        offset = min(k - trajectory.origin_step, horizon)
                    age = min(age + 1, horizon)
                u = trajectory.inputs[offset]
                x_pred = trajectory.predicted_states[offset]
            elif strategy == HOLD_LAST_VALUE:
                if s_k:
                    u = controller(x)
                    age = 0
                else:
                    u = last_u
                    age = min(age + 1, horizon)
            else:  # ZERO_INPUT
                if s_k:
                    u = controller(x)
                    age = 0
                else:
                    u = 0.0
                    age = min(age + 1, horizon)

            deviation = x if cost_raw_state else x - setpoint
            j_running += weights.q_c * deviation * deviation + weights.r_c * u * u
            records.append(
                SimulationRecord(
                    k=k, t=t_k, x_true=x, x_pred=x_pred, s=s_k, i=age, u=u,
                    j_running=j_running,
                )
            )
            x = integrate_interval(
                dynamics, x, u, t_k, sim.t_s, sim.n_truth, sim.theta
            )
            last_u = u
        except (DomainError, NonFiniteError, TrajectoryError) as exc:
            raise SimulationDiverged(
                f"run diverged at step {k}: {exc}", records=records, step=k,
                reason=str(exc),
            ) from exc

    return RunResult(records=tuple(records), x_final=x)


def evaluate_cost(
    records: Sequence[SimulationRecord],
    weights: CostWeights,
    setpoint: float = 0.0,
    raw_state: bool = False,
) -> float:
    """Quadratic cost over the first ``m_steps`` records.

    Sums q_c * (x - setpoint)^2 + r_c * u^2 per interval; with
    ``raw_state`` the undeviated state enters the quadratic term.
    """
    if not records:
        raise ValueError("records must be non-empty")
    if weights.m_steps > len(records):
        raise ValueError(
            f"m_steps={weights.m_steps} exceeds record count {len(records)}"
        )
    total = 0.0
    for record in records[: weights.m_steps]:
        deviation = record.x_true if raw_state else record.x_true - setpoint
        total += weights.q_c * deviation * deviation + weights.r_c * record.u * record.u
    return total


def run_scenario(scenario, strategy: str, seed: Optional[int] = None) -> RunResult:
    """Run one strategy of a scenario, optionally overriding the loss seed."""
    return run_closed_loop(
        dynamics=scenario.build_dynamics(),
        predictor_cfg=scenario.predictor_config(),
        lyapunov=scenario.lyapunov(),
        control_cfg=scenario.controller_config(),
        loss_model=scenario.build_loss(seed),
        strategy=strategy,
        sim=scenario.sim_settings(),
        weights=scenario.cost_weights(),
        cost_raw_state=scenario.cost_raw_state(),
        steps_per_input=scenario.steps_per_input(),
    )


def scenario_cost(scenario, result: RunResult) -> float:
    """Evaluate a finished run under the scenario's cost settings."""
    return evaluate_cost(
        result.records,
        scenario.cost_weights(),
        setpoint=scenario.lyapunov().setpoint,
        raw_state=scenario.cost_raw_state(),
    )


@dataclass(frozen=True)
class ComparisonResult:
    """Paired-seed cost table of several strategies on one scenario.

    ``costs[strategy][seed]`` is the cost of that cell or None when the
    run diverged.
    """

    strategies: tuple[str, ...]
    seeds: tuple[int, ...]
    costs: dict

    def median_cost(self, strategy: str) -> Optional[float]:
        finished = [c for c in self.costs[strategy].values() if c is not None]
        return median(finished) if finished else None

    def count_wins(self, a: str, b: str) -> int:
        """Seeds on which strategy ``a`` costs strictly less than ``b``."""
        wins = 0
        for seed in self.seeds:
            ca = self.costs[a][seed]
            cb = self.costs[b][seed]
            if ca is not None and cb is not None and ca < cb:
                wins += 1
        return wins

    def diverged_count(self, strategy: str) -> int:
        return sum(1 for c in self.costs[strategy].values() if c is None)


def _compare_cell(args) -> tuple[str, int, Optional[float]]:
    scenario, strategy, seed = args
    try:
        result = run_scenario(scenario, strategy, seed=seed)
    except SimulationDiverged:
        return strategy, seed, None
    return strategy, seed, scenario_cost(scenario, result)


def compare_strategies(
    scenario,
    strategies: Optional[Sequence[str]] = None,
    n_seeds: int = 10,
    workers: int = 1,
) -> ComparisonResult:
    """Run each strategy against the same loss realizations.

    Seeds are ``base_seed + j`` for j < n_seeds, shared across
    strategies so comparisons are paired.  A diverged cell is marked
    None instead of aborting the table.  ``workers > 1`` fans cells out
    to a process pool; results are keyed by cell, so the output does not
    depend on completion order.
    """
    chosen = tuple(strategies) if strategies else tuple(scenario.strategies)
    if not chosen:
        raise ValueError("at least one strategy is required")
    for name in chosen:
        if name not in STRATEGIES:
            raise ValueError(f"unknown strategy {name!r}, expected one of {STRATEGIES}")
    if len(set(chosen)) != len(chosen):
        raise ValueError("strategies must be unique")
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    base_seed = scenario.loss_seed()
    seeds = tuple(base_seed + j for j in range(n_seeds))
    tasks = [(scenario, strategy, seed) for strategy in chosen for seed in seeds]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_compare_cell, tasks))
    else:
        outcomes = [_compare_cell(task) for task in tasks]

    costs: dict = {strategy: {} for strategy in chosen}
    for strategy, seed, cost in outcomes:
        costs[strategy][seed] = cost
    return ComparisonResult(strategies=chosen, seeds=seeds, costs=costs)


def _format_float(value: float) -> str:
    return repr(float(value))


def write_records_csv(records: Sequence[SimulationRecord], path: str) -> None:
    """Write run records with full float round-trip precision."""
    with open(path, "w", newline="") as handle:
        handle.write(",".join(TRACE_HEADER) + "\n")
        for r in records:
            x_pred = "" if r.x_pred is None else _format_float(r.x_pred)
            handle.write(
                f"{r.k},{_format_float(r.t)},{_format_float(r.x_true)},{x_pred},"
                f"{r.s},{r.i},{_format_float(r.u)},{_format_float(r.j_running)}\n"
            )


def read_records_csv(path: str) -> list[SimulationRecord]:
    """Parse a records CSV written by ``write_records_csv``."""
    records = []
    with open(path, newline="") as handle:
        header = handle.readline().strip()
        if tuple(header.split(",")) != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {header!r}")
        for line in handle:
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(TRACE_HEADER):
                raise ValueError(f"bad trace row {line!r}")
            records.append(
                SimulationRecord(
                    k=int(parts[0]),
                    t=float(parts[1]),
                    x_true=float(parts[2]),
                    x_pred=None if parts[3] == "" else float(parts[3]),
                    s=int(parts[4]),
                    i=int(parts[5]),
                    u=float(parts[6]),
                    j_running=float(parts[7]),
                )
            )
    return records


def write_comparison_csv(result: ComparisonResult, path: str) -> None:
    """Write the paired cost table; diverged cells stay empty."""
    with open(path, "w", newline="") as handle:
        handle.write(",".join(("seed",) + result.strategies) + "\n")
        for seed in result.seeds:
            cells = [str(seed)]
            for strategy in result.strategies:
                cost = result.costs[strategy][seed]
                cells.append("" if cost is None else _format_float(cost))
            handle.write(",".join(cells) + "\n")
