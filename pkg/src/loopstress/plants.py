"""Simulated closed-loop plants with injectable non-linear blocks.

Two self-contained control loops are provided as testbeds:

* ``drone_alt`` -- altitude axis of a small quadrotor: a point mass pushed
  by thrust against linear air drag (gravity already compensated), under a
  PID controller.  The integrator is deliberately plain -- no anti-windup --
  so saturated tests expose windup as an observable stress behaviour.
* ``dc_servo`` -- voltage-driven DC servo (rotor inertia plus viscous
  damping, voltage -> angle) under state feedback with integral action.

Both integrate with semi-implicit Euler at the controller period (default
1 ms, one controller execution per physics step).  Non-linear blocks can be
attached to the sensor path (range clipping, ADC quantisation), the
actuation path (dead zone, backlash, command saturation) or the physics
itself (coulomb and quadratic friction forces).  Every step is instrumented:
saturation flags plus the absolute deviation each injected block introduced
relative to an ideal linear counterpart, so test outcomes can be attributed
to specific non-linearities afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import Trace

__all__ = [
    "BLOCK_KINDS",
    "NonlinearBlock",
    "actuator_saturation",
    "sensor_saturation",
    "quantizer",
    "dead_zone",
    "backlash",
    "coulomb_friction",
    "quadratic_friction",
    "apply_block",
    "PlantSpec",
    "drone_spec",
    "dc_servo_spec",
    "InstrumentationLog",
    "PlantRun",
    "run_plant",
]

# kind -> required parameter names
BLOCK_KINDS: dict[str, tuple[str, ...]] = {
    "actuator_saturation": ("lo", "hi"),
    "sensor_saturation": ("lo", "hi"),
    "quantizer": ("step",),
    "dead_zone": ("half_width",),
    "backlash": ("play",),
    "coulomb_friction": ("level",),
    "quadratic_friction": ("coef",),
}


@dataclass(frozen=True)
class NonlinearBlock:
    """One non-linear element, identified by kind plus its parameters."""

    kind: str
    params: dict[str, float]

    def __post_init__(self):
        if self.kind not in BLOCK_KINDS:
            raise ValueError(f"unknown block kind {self.kind!r}")
        wanted = set(BLOCK_KINDS[self.kind])
        got = set(self.params)
        if got != wanted:
            raise ValueError(
                f"{self.kind} expects parameters {sorted(wanted)}, got {sorted(got)}"
            )
        object.__setattr__(
            self, "params", {k: float(v) for k, v in self.params.items()}
        )
        p = self.params
        if self.kind.endswith("saturation") and not p["lo"] < p["hi"]:
            raise ValueError("saturation needs lo < hi")
        if self.kind == "quantizer" and p["step"] <= 0.0:
            raise ValueError("quantizer step must be positive")
        if self.kind == "dead_zone" and p["half_width"] < 0.0:
            raise ValueError("dead zone half width must be non-negative")
        if self.kind == "backlash" and p["play"] < 0.0:
            raise ValueError("backlash play must be non-negative")
        if self.kind == "coulomb_friction" and p["level"] < 0.0:
            raise ValueError("friction level must be non-negative")
        if self.kind == "quadratic_friction" and p["coef"] < 0.0:
            raise ValueError("friction coefficient must be non-negative")


def actuator_saturation(lo: float, hi: float) -> NonlinearBlock:
    return NonlinearBlock("actuator_saturation", {"lo": lo, "hi": hi})


def sensor_saturation(lo: float, hi: float) -> NonlinearBlock:
    return NonlinearBlock("sensor_saturation", {"lo": lo, "hi": hi})


def quantizer(step: float) -> NonlinearBlock:
    return NonlinearBlock("quantizer", {"step": step})


def dead_zone(half_width: float) -> NonlinearBlock:
    return NonlinearBlock("dead_zone", {"half_width": half_width})


def backlash(play: float) -> NonlinearBlock:
    return NonlinearBlock("backlash", {"play": play})


def coulomb_friction(level: float) -> NonlinearBlock:
    return NonlinearBlock("coulomb_friction", {"level": level})


def quadratic_friction(coef: float) -> NonlinearBlock:
    return NonlinearBlock("quadratic_friction", {"coef": coef})


def apply_block(block: NonlinearBlock, value: float, state: float | None = None):
    """Apply one block to a scalar; returns ``(output, new_state)``.

    Only backlash is stateful: its state is the held output position
    (initially 0.0).  Friction blocks map a velocity to an opposing
    force/torque term.  Stateless blocks return ``state`` unchanged (None).
    """
    if not math.isfinite(value):
        raise ValueError("block input must be finite")
    p = block.params
    kind = block.kind
    if kind in ("actuator_saturation", "sensor_saturation"):
        return min(max(value, p["lo"]), p["hi"]), state
    if kind == "quantizer":
        step = p["step"]
        return math.floor(value / step + 0.5) * step, state
    if kind == "dead_zone":
        hw = p["half_width"]
        if value > hw:
            return value - hw, state
        if value < -hw:
            return value + hw, state
        return 0.0, state
    if kind == "backlash":
        half = p["play"] / 2.0
        held = 0.0 if state is None else state
        if value > held + half:
            held = value - half
        elif value < held - half:
            held = value + half
        return held, held
    if kind == "coulomb_friction":
        level = p["level"]
        if value > 0.0:
            return -level, state
        if value < 0.0:
            return level, state
        return 0.0, state
    if kind == "quadratic_friction":
        return -p["coef"] * value * abs(value), state
    raise ValueError(f"unknown block kind {kind!r}")  # pragma: no cover


_MODEL_DEFAULTS = {
    "drone_alt": {
        "physical": {"mass": 0.1, "drag": 1.0, "nominal_speed": 1.0},
        "controller": {"kp": 3.0, "ki": 2.0, "kd": 0.0, "deriv_tau": 0.0},
    },
    "dc_servo": {
        "physical": {
            "inertia": 0.01,
            "damping": 0.02,
            "torque_const": 0.05,
            "nominal_speed": 1.0,
            "pwm_step": 0.0,  # >0 replaces PWM by duty-cycle quantisation
        },
        "controller": {"k_pos": 3.7, "k_int": 2.0, "k_vel": 0.8, "deriv_tau": 0.01},
    },
}


@dataclass(frozen=True)
class PlantSpec:
    """Fully describes a simulated loop: model, parameters, blocks, sampling.

    Missing physical/controller entries are filled with the model defaults;
    unknown entries are rejected.  At most one block of each kind may be
    attached.
    """

    model: str
    physical: dict[str, float] = field(default_factory=dict)
    controller: dict[str, float] = field(default_factory=dict)
    blocks: tuple[NonlinearBlock, ...] = ()
    sample_interval: float = 0.001

    def __post_init__(self):
        if self.model not in _MODEL_DEFAULTS:
            raise ValueError(f"unknown plant model {self.model!r}")
        defaults = _MODEL_DEFAULTS[self.model]
        for attr in ("physical", "controller"):
            given = dict(getattr(self, attr))
            allowed = defaults[attr]
            unknown = set(given) - set(allowed)
            if unknown:
                raise ValueError(
                    f"unknown {attr} parameters for {self.model}: {sorted(unknown)}"
                )
            merged = {**allowed, **{k: float(v) for k, v in given.items()}}
            object.__setattr__(self, attr, merged)
        blocks = tuple(self.blocks)
        object.__setattr__(self, "blocks", blocks)
        kinds = [b.kind for b in blocks]
        if len(kinds) != len(set(kinds)):
            raise ValueError("at most one block of each kind may be attached")
        if self.sample_interval <= 0.0:
            raise ValueError("sample_interval must be positive")
        if self.physical.get("mass", 1.0) <= 0.0:
            raise ValueError("mass must be positive")
        if self.physical.get("drag", 0.0) < 0.0:
            raise ValueError("drag must be non-negative")
        if self.physical.get("inertia", 1.0) <= 0.0:
            raise ValueError("inertia must be positive")


def drone_spec(
    thrust_limit: float = 2.0,
    extra_blocks: tuple[NonlinearBlock, ...] = (),
    sample_interval: float = 0.001,
    **param_overrides,
) -> PlantSpec:
    """Quadrotor altitude loop with symmetric thrust saturation (default 2 N)."""
    blocks = ()
    if thrust_limit > 0.0:
        blocks = (actuator_saturation(-thrust_limit, thrust_limit),)
    physical = {k: v for k, v in param_overrides.items() if k in ("mass", "drag", "nominal_speed")}
    controller = {k: v for k, v in param_overrides.items() if k in ("kp", "ki", "kd", "deriv_tau")}
    leftovers = set(param_overrides) - set(physical) - set(controller)
    if leftovers:
        raise ValueError(f"unknown drone parameters: {sorted(leftovers)}")
    return PlantSpec(
        model="drone_alt",
        physical=physical,
        controller=controller,
        blocks=blocks + tuple(extra_blocks),
        sample_interval=sample_interval,
    )


def dc_servo_spec(
    voltage_limit: float = 10.0,
    sensor_range: float = 4.0 * math.pi,
    adc_step: float = 2.0 * math.pi / 4096.0,
    extra_blocks: tuple[NonlinearBlock, ...] = (),
    sample_interval: float = 0.001,
    **param_overrides,
) -> PlantSpec:
    """DC servo loop: voltage-limited drive, range-limited and quantised encoder."""
    blocks: tuple[NonlinearBlock, ...] = ()
    if voltage_limit > 0.0:
        blocks += (actuator_saturation(-voltage_limit, voltage_limit),)
    if sensor_range > 0.0:
        blocks += (sensor_saturation(-sensor_range, sensor_range),)
    if adc_step > 0.0:
        blocks += (quantizer(adc_step),)
    phys_keys = ("inertia", "damping", "torque_const", "nominal_speed", "pwm_step")
    ctrl_keys = ("k_pos", "k_int", "k_vel", "deriv_tau")
    physical = {k: v for k, v in param_overrides.items() if k in phys_keys}
    controller = {k: v for k, v in param_overrides.items() if k in ctrl_keys}
    leftovers = set(param_overrides) - set(physical) - set(controller)
    if leftovers:
        raise ValueError(f"unknown dc servo parameters: {sorted(leftovers)}")
    return PlantSpec(
        model="dc_servo",
        physical=physical,
        controller=controller,
        blocks=blocks + tuple(extra_blocks),
        sample_interval=sample_interval,
    )


@dataclass(frozen=True)
class InstrumentationLog:
    """Per-step flags and deviations recorded alongside the trace.

    ``nonlinearity_deviation`` sums, over the injected blocks (dead zone,
    backlash, coulomb and quadratic friction), the absolute difference
    between each block's output and what its linear counterpart would have
    produced: identity for dead zone/backlash, zero force for coulomb
    friction, and a linear drag matched at the declared nominal speed for
    quadratic friction.  Saturations are tracked by the flags instead, and
    quantisation affects every step alike so it is not scored.
    """

    actuator_saturated: np.ndarray
    sensor_saturated: np.ndarray
    nonlinearity_deviation: np.ndarray
    actuation: np.ndarray

    @property
    def actuator_saturation_fraction(self) -> float:
        return float(np.mean(self.actuator_saturated))

    @property
    def sensor_saturation_fraction(self) -> float:
        return float(np.mean(self.sensor_saturated))

    @property
    def mean_deviation(self) -> float:
        return float(np.mean(self.nonlinearity_deviation))


@dataclass(frozen=True)
class PlantRun:
    """Outcome of one closed-loop simulation."""

    trace: Trace
    log: InstrumentationLog
    diverged: bool


class _Wiring:
    """Unpacked block parameters for the tight simulation loop."""

    __slots__ = (
        "sens_lo", "sens_hi", "sens_step", "dz_hw", "bl_half", "act_lo",
        "act_hi", "coulomb", "quad", "quad_lin",
    )

    def __init__(self, spec: PlantSpec):
        by_kind = {b.kind: b.params for b in spec.blocks}
        sat = by_kind.get("sensor_saturation")
        self.sens_lo, self.sens_hi = (sat["lo"], sat["hi"]) if sat else (None, None)
        q = by_kind.get("quantizer")
        self.sens_step = q["step"] if q else None
        dz = by_kind.get("dead_zone")
        self.dz_hw = dz["half_width"] if dz else None
        bl = by_kind.get("backlash")
        self.bl_half = bl["play"] / 2.0 if bl else None
        sat = by_kind.get("actuator_saturation")
        self.act_lo, self.act_hi = (sat["lo"], sat["hi"]) if sat else (None, None)
        cf = by_kind.get("coulomb_friction")
        self.coulomb = cf["level"] if cf else None
        qf = by_kind.get("quadratic_friction")
        self.quad = qf["coef"] if qf else None
        self.quad_lin = (
            self.quad * abs(spec.physical["nominal_speed"]) if qf else None
        )


def run_plant(spec: PlantSpec, reference: np.ndarray) -> PlantRun:
    """Simulate the closed loop over ``reference`` and return the instrumented run.

    The loop per step: read the sensor (saturation, then quantisation),
    execute the controller, shape the command through the actuation-path
    blocks (dead zone, backlash, saturation), then advance the physics by
    one semi-implicit Euler step including any friction blocks.  The run is
    deterministic.  If the output magnitude exceeds ``1e6`` times the
    largest reference value (or turns non-finite) the simulation stops and
    the run is flagged diverged, with the trace truncated to the completed
    steps.
    """
    ref = np.asarray(reference, dtype=float)
    if ref.ndim != 1 or len(ref) < 2:
        raise ValueError("reference must be 1-D with at least two samples")
    if not np.all(np.isfinite(ref)):
        raise ValueError("reference contains non-finite samples")
    peak = float(np.max(np.abs(ref)))
    limit = 1e6 * peak if peak > 0.0 else math.inf

    if spec.model == "drone_alt":
        runner = _run_drone
    else:
        runner = _run_dc_servo
    out, act, a_sat, s_sat, dev, diverged = runner(spec, ref.tolist(), limit)

    n = len(out)
    trace = Trace(
        reference=ref[:n],
        output=np.asarray(out, dtype=float),
        sample_interval=spec.sample_interval,
    )
    log = InstrumentationLog(
        actuator_saturated=np.asarray(a_sat, dtype=bool),
        sensor_saturated=np.asarray(s_sat, dtype=bool),
        nonlinearity_deviation=np.asarray(dev, dtype=float),
        actuation=np.asarray(act, dtype=float),
    )
    return PlantRun(trace=trace, log=log, diverged=diverged)


def _shape_command(w: _Wiring, u: float, bl_state: float, dev: float):
    """Actuation-path blocks; returns (command, backlash state, deviation, flag)."""
    if w.dz_hw is not None:
        shaped = u - w.dz_hw if u > w.dz_hw else (u + w.dz_hw if u < -w.dz_hw else 0.0)
        dev += abs(shaped - u)
        u = shaped
    if w.bl_half is not None:
        if u > bl_state + w.bl_half:
            bl_state = u - w.bl_half
        elif u < bl_state - w.bl_half:
            bl_state = u + w.bl_half
        dev += abs(bl_state - u)
        u = bl_state
    saturated = False
    if w.act_lo is not None:
        if u > w.act_hi:
            u, saturated = w.act_hi, True
        elif u < w.act_lo:
            u, saturated = w.act_lo, True
    return u, bl_state, dev, saturated


def _friction(w: _Wiring, v: float):
    """Friction force at velocity v plus deviation from the linear counterpart."""
    force = 0.0
    dev = 0.0
    if w.coulomb is not None and v != 0.0:
        fc = -w.coulomb if v > 0.0 else w.coulomb
        force += fc
        dev += abs(fc)
    if w.quad is not None:
        fq = -w.quad * v * abs(v)
        force += fq
        dev += abs(fq - (-w.quad_lin * v))
    return force, dev


def _run_drone(spec: PlantSpec, ref: list, limit: float):
    dt = spec.sample_interval
    mass = spec.physical["mass"]
    drag = spec.physical["drag"]
    c = spec.controller
    kp, ki, kd, tau = c["kp"], c["ki"], c["kd"], c["deriv_tau"]
    alpha = dt / (tau + dt)
    w = _Wiring(spec)

    z = v = 0.0
    integ = dfilt = 0.0
    prev_meas = None
    bl_state = 0.0
    out, act, a_sat, s_sat, dev_log = [], [], [], [], []
    diverged = False

    for r in ref:
        out.append(z)
        dev = 0.0

        meas = z
        sflag = False
        if w.sens_lo is not None:
            if meas > w.sens_hi:
                meas, sflag = w.sens_hi, True
            elif meas < w.sens_lo:
                meas, sflag = w.sens_lo, True
        if w.sens_step is not None:
            meas = math.floor(meas / w.sens_step + 0.5) * w.sens_step
        s_sat.append(sflag)

        e = r - meas
        d_raw = 0.0 if prev_meas is None else (meas - prev_meas) / dt
        prev_meas = meas
        dfilt += alpha * (d_raw - dfilt)
        u = kp * e + integ - kd * dfilt

        u, bl_state, dev, aflag = _shape_command(w, u, bl_state, dev)
        a_sat.append(aflag)
        act.append(u)
        integ += ki * e * dt

        f_fric, f_dev = _friction(w, v)
        dev_log.append(dev + f_dev)

        v += (u + f_fric - drag * v) / mass * dt
        z += v * dt
        if not (abs(z) <= limit and math.isfinite(v)):
            if len(out) >= 2:
                diverged = True
                break
    return out, act, a_sat, s_sat, dev_log, diverged


def _run_dc_servo(spec: PlantSpec, ref: list, limit: float):
    dt = spec.sample_interval
    p = spec.physical
    inertia, damping, kt = p["inertia"], p["damping"], p["torque_const"]
    pwm_step = p["pwm_step"]
    c = spec.controller
    k_pos, k_int, k_vel, tau = c["k_pos"], c["k_int"], c["k_vel"], c["deriv_tau"]
    alpha = dt / (tau + dt)
    w = _Wiring(spec)

    theta = omega = 0.0
    integ = dfilt = 0.0
    prev_meas = None
    bl_state = 0.0
    out, act, a_sat, s_sat, dev_log = [], [], [], [], []
    diverged = False

    for r in ref:
        out.append(theta)
        dev = 0.0

        meas = theta
        sflag = False
        if w.sens_lo is not None:
            if meas > w.sens_hi:
                meas, sflag = w.sens_hi, True
            elif meas < w.sens_lo:
                meas, sflag = w.sens_lo, True
        if w.sens_step is not None:
            meas = math.floor(meas / w.sens_step + 0.5) * w.sens_step
        s_sat.append(sflag)

        e = r - meas
        d_raw = 0.0 if prev_meas is None else (meas - prev_meas) / dt
        prev_meas = meas
        dfilt += alpha * (d_raw - dfilt)
        u = k_pos * e + integ - k_vel * dfilt

        u, bl_state, dev, aflag = _shape_command(w, u, bl_state, dev)
        if pwm_step > 0.0:  # duty-cycle averaged PWM: quantised drive voltage
            u = math.floor(u / pwm_step + 0.5) * pwm_step
        a_sat.append(aflag)
        act.append(u)
        integ += k_int * e * dt

        t_fric, t_dev = _friction(w, omega)
        dev_log.append(dev + t_dev)

        omega += (kt * u + t_fric - damping * omega) / inertia * dt
        theta += omega * dt
        if not (abs(theta) <= limit and math.isfinite(omega)):
            if len(out) >= 2:
                diverged = True
                break
    return out, act, a_sat, s_sat, dev_log, diverged
