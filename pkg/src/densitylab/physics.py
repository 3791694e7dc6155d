"""Buoyancy statics and damped 1-D vertical dynamics for rigid cubes.

Everything in here is a pure function over immutable value types, in CGS
units (cm, g, s). Statics answer "what happens eventually" (sink, suspend,
float, and how deep a floater rests); the dynamics integrate the actual
drop so a UI can animate it. The two must agree, and the test suite holds
them to that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

WATER_DENSITY = 1.0  # g/cm3, the reference liquid

# Suspension tolerance used by physics-level tests; gameplay uses a looser
# one (see engine.GAMEPLAY_EPSILON) so catalog rounding never misclassifies.
DEFAULT_EPSILON = 1e-6


class FlotationOutcome(Enum):
    SINKS = "sinks"
    SUSPENDS = "suspends"
    FLOATS = "floats"


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Cube:
    """Homogeneous axis-aligned cube.

    ``dot_level`` is the per-face dot count used by the visual density
    encoding (more dots = denser). When omitted it is derived as
    ``round(10 * density)``, which is monotone in density.
    """

    id: str
    volume: float  # cm3
    mass: float  # g
    dot_level: int = -1

    def __post_init__(self) -> None:
        _require_finite("volume", self.volume)
        _require_finite("mass", self.mass)
        if self.volume <= 0:
            raise ValueError(f"cube {self.id}: volume must be positive")
        if self.mass <= 0:
            raise ValueError(f"cube {self.id}: mass must be positive")
        if self.dot_level < 0:
            object.__setattr__(self, "dot_level", round(10 * self.mass / self.volume))

    @property
    def edge(self) -> float:
        return self.volume ** (1.0 / 3.0)


@dataclass(frozen=True)
class Liquid:
    id: str
    name: str
    density: float  # g/cm3

    def __post_init__(self) -> None:
        _require_finite("density", self.density)
        if self.density <= 0:
            raise ValueError(f"liquid {self.id}: density must be positive")


@dataclass(frozen=True)
class BodyState:
    """Vertical state of a cube relative to the liquid surface.

    ``submersion`` is the depth of the cube's bottom face below the surface
    (negative = fully airborne). ``velocity`` is positive downward.
    """

    submersion: float  # cm
    velocity: float  # cm/s

    def __post_init__(self) -> None:
        _require_finite("submersion", self.submersion)
        _require_finite("velocity", self.velocity)


@dataclass(frozen=True)
class DynamicsParams:
    """Integrator constants.

    The quadratic drag coefficient is deliberately small: a bluff-body value
    (~1) makes dense liquids so overdamped that a light cube released deep
    in quicksilver creeps to the surface instead of shooting out of it.
    The linear term exists because quadratic drag alone decays as a power
    law and never reaches the settle tolerance in bounded time.
    """

    gravity: float = 981.0  # cm/s2
    drag_coefficient: float = 0.05  # quadratic, dimensionless
    linear_drag_coefficient: float = 0.3  # dimensionless
    time_step: float = 1.0 / 120.0  # s
    settle_tolerance: float = 1e-3
    tank_depth: float = 50.0  # cm, liquid surface to tank bottom

    def __post_init__(self) -> None:
        if self.gravity <= 0:
            raise ValueError("gravity must be positive")
        if self.time_step <= 0:
            raise ValueError("time_step must be positive")
        if self.drag_coefficient < 0 or self.linear_drag_coefficient < 0:
            raise ValueError("drag coefficients must be non-negative")
        if self.settle_tolerance <= 0:
            raise ValueError("settle_tolerance must be positive")
        if self.tank_depth <= 0:
            raise ValueError("tank_depth must be positive")


@dataclass(frozen=True)
class TrajectorySample:
    t: float  # s since release
    submersion: float  # cm
    velocity: float  # cm/s


@dataclass(frozen=True)
class ReleaseResult:
    samples: list[TrajectorySample]
    outcome: FlotationOutcome
    surface_breach: bool
    settled: bool

    @property
    def final(self) -> BodyState:
        last = self.samples[-1]
        return BodyState(last.submersion, last.velocity)


def density(cube: Cube) -> float:
    """Mass per unit volume, g/cm3."""
    return cube.mass / cube.volume


def relative_density(cube: Cube, liquid: Liquid) -> float:
    """Cube density over liquid density (unitless)."""
    return density(cube) / liquid.density


def classify_flotation(cube: Cube, liquid: Liquid, epsilon: float = DEFAULT_EPSILON) -> FlotationOutcome:
    """Statics verdict: sinks, suspends (within ``epsilon`` of neutral) or floats."""
    if not 0.0 < epsilon < 0.1:
        raise ValueError(f"epsilon must be in (0, 0.1), got {epsilon}")
    r = relative_density(cube, liquid)
    if abs(r - 1.0) <= epsilon:
        return FlotationOutcome.SUSPENDS
    if r < 1.0:
        return FlotationOutcome.FLOATS
    return FlotationOutcome.SINKS


def equilibrium_submerged_fraction(cube: Cube, liquid: Liquid) -> float:
    """Resting submerged volume fraction: the density ratio, capped at 1."""
    return min(relative_density(cube, liquid), 1.0)


def submerged_volume(cube: Cube, submersion: float) -> float:
    """Displaced volume at a given bottom-face depth (piecewise linear)."""
    if submersion <= 0.0:
        return 0.0
    edge = cube.edge
    if submersion >= edge:
        return cube.volume
    return cube.volume * submersion / edge


def _drag_constants(cube: Cube, liquid: Liquid, params: DynamicsParams) -> tuple[float, float]:
    edge = cube.edge
    k_quad = 0.5 * liquid.density * params.drag_coefficient * edge * edge
    k_lin = params.linear_drag_coefficient * liquid.density * edge * edge * math.sqrt(params.gravity * edge)
    return k_quad, k_lin


def _acceleration(state: BodyState, cube: Cube, liquid: Liquid, params: DynamicsParams) -> float:
    """Net downward acceleration; zero while pinned against the tank bottom."""
    k_quad, k_lin = _drag_constants(cube, liquid, params)
    v = state.velocity
    buoyancy = liquid.density * submerged_volume(cube, state.submersion) * params.gravity
    drag = k_quad * v * abs(v) + k_lin * v  # opposes motion
    force_down = cube.mass * params.gravity - buoyancy - drag
    if state.submersion >= params.tank_depth and force_down >= 0.0:
        return 0.0
    return force_down / cube.mass


def step_dynamics(state: BodyState, cube: Cube, liquid: Liquid, params: DynamicsParams) -> BodyState:
    """One semi-implicit Euler step: velocity first, then position.

    The bottom contact is inelastic: downward velocity is zeroed when the
    cube reaches the tank floor, and a resting cube stays pinned while the
    net force still points down.
    """
    _require_finite("submersion", state.submersion)
    _require_finite("velocity", state.velocity)
    a = _acceleration(state, cube, liquid, params)
    v = state.velocity
    if state.submersion >= params.tank_depth and v >= 0.0 and a == 0.0:
        v = 0.0  # resting on the bottom
    v = v + a * params.time_step
    s = state.submersion + v * params.time_step
    if s >= params.tank_depth:
        s = params.tank_depth
        if v > 0.0:
            v = 0.0
    return BodyState(submersion=s, velocity=v)


def simulate_release(
    cube: Cube,
    liquid: Liquid,
    initial: BodyState,
    params: DynamicsParams = DynamicsParams(),
    max_time: float = 30.0,
) -> ReleaseResult:
    """Integrate a released cube until it settles or ``max_time`` elapses.

    Settled means the velocity is below the settle tolerance and would stay
    there (the next velocity increment is also below it), so a floater
    pausing at the top of a bob does not count. The returned outcome is
    read off the terminal state; if the run did not settle, ``settled`` is
    False and the outcome is the best guess from the last state.
    """
    if max_time < 1.0:
        raise ValueError(f"max_time must be at least 1 s, got {max_time}")
    dt = params.time_step
    state = initial
    samples = [TrajectorySample(0.0, state.submersion, state.velocity)]
    surface_breach = False
    settled = False
    steps = int(round(max_time / dt))
    for i in range(1, steps + 1):
        state = step_dynamics(state, cube, liquid, params)
        samples.append(TrajectorySample(i * dt, state.submersion, state.velocity))
        if state.submersion < 0.0:
            surface_breach = True
        a = _acceleration(state, cube, liquid, params)
        if abs(state.velocity) < params.settle_tolerance and abs(a) * dt < params.settle_tolerance:
            settled = True
            break
    outcome = _outcome_from_state(state, cube, params)
    return ReleaseResult(samples=samples, outcome=outcome, surface_breach=surface_breach, settled=settled)


def _outcome_from_state(state: BodyState, cube: Cube, params: DynamicsParams) -> FlotationOutcome:
    if state.submersion >= params.tank_depth - 1e-9:
        return FlotationOutcome.SINKS
    if state.submersion >= cube.edge:
        return FlotationOutcome.SUSPENDS
    return FlotationOutcome.FLOATS


def mechanical_energy(state: BodyState, cube: Cube, liquid: Liquid, params: DynamicsParams) -> float:
    """Kinetic plus potential energy (gravity and buoyancy), in erg.

    Drag is dissipative, so along any trajectory that stays out of bottom
    contact and does not breach the surface this is non-increasing.
    """
    s = state.submersion
    edge = cube.edge
    if s <= 0.0:
        displaced_integral = 0.0
    elif s >= edge:
        displaced_integral = cube.volume * edge / 2.0 + cube.volume * (s - edge)
    else:
        displaced_integral = cube.volume * s * s / (2.0 * edge)
    potential = -cube.mass * params.gravity * s + liquid.density * params.gravity * displaced_integral
    return 0.5 * cube.mass * state.velocity * state.velocity + potential
