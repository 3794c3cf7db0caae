"""Input-affine SISO plant models and the pressurized-tank benchmark.

Every plant handled by this package has scalar dynamics of the form

    dx/dt = f(x) + g(x) * u + w(x) * theta

where ``u`` is the control input and ``theta`` an unmeasured, slowly
varying disturbance entering through the gain ``w``.  The benchmark
plant is a gas tank of volume ``vol`` whose pressure ``x`` is raised by
an inlet valve (opening ``u``, supply pressure ``p1``) and lowered by an
outlet valve at a fixed opening ``m2`` discharging against the back
pressure ``p2``.  With the ideal-gas/orifice model the flow terms are

    f(x) = -(1/vol) * alpha2 * a2 * m2 * x * sqrt(2 * (x - p2) / rho)
    g(x) =  (1/vol) * alpha1 * a1      * x * sqrt(2 * (p1 - x) / rho)
    w(x) =  x / vol

so the model is only meaningful for pressures between ``p2`` and ``p1``.
All evaluations are guarded: leaving the state domain raises
``DomainError`` instead of silently extrapolating through a negative
square-root argument.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable

from .errors import DomainError, NonFiniteError

StateFunction = Callable[[float], float]


@dataclass(frozen=True)
class SystemDynamics:
    """Scalar input-affine dynamics with a guarded state domain.

    Attributes:
        drift: the autonomous term f(x).
        input_gain: the control gain g(x).
        uncertainty_gain: the disturbance gain w(x).
        state_domain: closed interval (lo, hi) on which the three
            callables may be evaluated.
    """

    drift: StateFunction
    input_gain: StateFunction
    uncertainty_gain: StateFunction
    state_domain: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.state_domain
        if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
            raise ValueError(f"state_domain must be a finite interval, got {self.state_domain}")

    def check_state(self, x: float) -> None:
        """Raise DomainError unless ``x`` lies in the state domain."""
        lo, hi = self.state_domain
        if not (lo <= x <= hi):
            raise DomainError(f"state {x!r} outside domain [{lo!r}, {hi!r}]")

    def f(self, x: float) -> float:
        self.check_state(x)
        return self.drift(x)

    def g(self, x: float) -> float:
        self.check_state(x)
        return self.input_gain(x)

    def w(self, x: float) -> float:
        self.check_state(x)
        return self.uncertainty_gain(x)


def eval_rhs(dynamics: SystemDynamics, x: float, u: float, theta: float) -> float:
    """Evaluate dx/dt = f(x) + g(x)*u + w(x)*theta.

    The state is checked against the domain once; a NaN or infinite
    result raises ``NonFiniteError``.
    """
    dynamics.check_state(x)
    value = dynamics.drift(x) + dynamics.input_gain(x) * u + dynamics.uncertainty_gain(x) * theta
    if not math.isfinite(value):
        raise NonFiniteError(f"dx/dt not finite at x={x!r}, u={u!r}, theta={theta!r}")
    return value


@dataclass(frozen=True)
class UncertaintySignal:
    """Piecewise-constant disturbance schedule theta(t).

    ``values[j]`` holds from ``times[j]`` until the next entry; before
    ``times[0]`` the first value applies.  A single entry therefore
    represents a constant disturbance.
    """

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values) or not self.times:
            raise ValueError("times and values must be equally sized and non-empty")
        if any(not math.isfinite(v) for v in self.times + self.values):
            raise ValueError("schedule entries must be finite")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("schedule times must be strictly increasing")

    @classmethod
    def constant(cls, value: float) -> "UncertaintySignal":
        return cls(times=(0.0,), values=(float(value),))

    def value(self, t: float) -> float:
        idx = bisect_right(self.times, t) - 1
        return self.values[max(idx, 0)]


@dataclass(frozen=True)
class TankParams:
    """Physical parameters of the benchmark tank.

    Attributes:
        alpha1, alpha2: discharge coefficients of the inlet/outlet valve.
        a1, a2: valve pass cross-sections [m^2].
        p1: supply pressure upstream of the inlet valve [Pa].
        p2: back pressure downstream of the outlet valve [Pa].
        rho: gas density [kg/m^3].
        vol: tank volume [m^3].
        m2: fixed opening degree of the outlet valve, in [0, 1].
    """

    alpha1: float
    alpha2: float
    a1: float
    a2: float
    p1: float
    p2: float
    rho: float
    vol: float
    m2: float

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "a1", "a2", "rho", "vol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.m2 <= 1.0:
            raise ValueError(f"m2 must lie in [0, 1], got {self.m2!r}")
        if not self.p2 >= 0:
            raise ValueError("p2 must be non-negative")
        if not self.p1 > self.p2:
            raise ValueError(f"p1 must exceed p2, got p1={self.p1!r}, p2={self.p2!r}")

    @classmethod
    def benchmark(cls, p2: float = 100_000.0, m2: float = 1.0) -> "TankParams":
        """Benchmark tank parameters.

        ``p2`` and ``m2`` are not fixed by the benchmark description and
        must be chosen; the defaults are an atmospheric-order back
        pressure and a fully open outlet valve.
        """
        return cls(
            alpha1=0.631811,
            alpha2=0.631811,
            a1=1.9625e-3,
            a2=1.9625e-3,
            p1=2.0e5,
            p2=p2,
            rho=3.49772,
            vol=2.0,
            m2=m2,
        )


def tank_dynamics(params: TankParams, margin: float = 1e-3) -> SystemDynamics:
    """Build the tank's SystemDynamics.

    The state domain is shrunk to [p2 + margin, p1 - margin] so that
    integration stages cannot probe the square roots at negative
    arguments.  ``margin = 0`` exposes the closed interval, where the
    boundary values f(p2) = 0 and g(p1) = 0 are still well defined.
    """
    if margin < 0:
        raise ValueError("margin must be non-negative")
    lo = params.p2 + margin
    hi = params.p1 - margin
    if not lo < hi:
        raise ValueError(f"margin {margin!r} leaves an empty pressure range")

    c_out = params.alpha2 * params.a2 * params.m2 / params.vol
    c_in = params.alpha1 * params.a1 / params.vol
    two_over_rho = 2.0 / params.rho
    p1 = params.p1
    p2 = params.p2
    inv_vol = 1.0 / params.vol

    def drift(x: float) -> float:
        return -c_out * x * math.sqrt(two_over_rho * (x - p2))

    def input_gain(x: float) -> float:
        return c_in * x * math.sqrt(two_over_rho * (p1 - x))

    def uncertainty_gain(x: float) -> float:
        return x * inv_vol

    return SystemDynamics(
        drift=drift,
        input_gain=input_gain,
        uncertainty_gain=uncertainty_gain,
        state_domain=(lo, hi),
    )
