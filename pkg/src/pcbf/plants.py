"""Case-study plants: a double integrator with input delay, and a planar
bicopter flown by a cascaded inner/outer control loop.

The bicopter carries two rotors on a rigid frame in the vertical plane; the
controller commands total thrust T and total torque tau (individual rotor
thrusts never appear). Vertical position is positive DOWN: gravity enters the
vertical velocity rate with a plus sign, thrust opposes it at zero tilt, and a
climb command means a negative vertical reference.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .barrier import PcbfFilter, apply_filter
from .controllers import LqrIntController
from .lifting import LtiModel
from .linalg import column


class DivergenceError(RuntimeError):
    """Numerical integration produced a non-finite state."""


def double_integrator_model(ts: float) -> LtiModel:
    """Position/velocity pair driven by acceleration, discretized exactly."""
    return LtiModel(
        [[1.0, ts], [0.0, 1.0]],
        [[0.5 * ts * ts], [ts]],
        ts,
    )


class DelayedDoubleIntegrator:
    """Double integrator whose input takes `delay_steps` samples to arrive.

    The delay line is a plain queue, zero-filled at start; the state exposed
    to controllers is only the physical (position, velocity) pair, so the
    delay stays unknown to them.
    """

    def __init__(self, ts: float, delay_steps: int = 0, x0=None):
        if int(delay_steps) != delay_steps or delay_steps < 0:
            raise ValueError(f"delay must be a nonnegative integer, got {delay_steps!r}")
        self.model = double_integrator_model(ts)
        self.ts = ts
        self.delay_steps = int(delay_steps)
        self._x = column(x0, "initial state") if x0 is not None else np.zeros((2, 1))
        if self._x.shape != (2, 1):
            raise ValueError(f"initial state must have 2 entries, got shape {self._x.shape}")
        self._buffer = deque([0.0] * self.delay_steps)

    @property
    def state(self) -> np.ndarray:
        return self._x.copy()

    def step(self, u: float) -> np.ndarray:
        """Advance one sample; `u` enters the delay line, the oldest entry acts."""
        u = float(u)
        if self.delay_steps > 0:
            applied = self._buffer.popleft()
            self._buffer.append(u)
        else:
            applied = u
        self._x = self.model.a @ self._x + self.model.b * applied
        return self.state


@dataclass(frozen=True)
class BicopterParams:
    """Rigid-body parameters; all strictly positive."""

    mass: float = 1.0
    inertia: float = 0.01
    arm: float = 0.5
    gravity: float = 9.81

    def __post_init__(self):
        for name in ("mass", "inertia", "arm", "gravity"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def hover_thrust(self) -> float:
        return self.mass * self.gravity


@dataclass
class BicopterState:
    """Planar pose: horizontal/vertical position and velocity, tilt, tilt rate."""

    p_h: float = 0.0
    v_h: float = 0.0
    p_v: float = 0.0
    v_v: float = 0.0
    theta: float = 0.0
    omega: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.p_h, self.v_h, self.p_v, self.v_v, self.theta, self.omega])

    @classmethod
    def from_array(cls, arr) -> "BicopterState":
        arr = np.asarray(arr, dtype=float).reshape(-1)
        if arr.shape[0] != 6:
            raise ValueError(f"bicopter state needs 6 entries, got {arr.shape[0]}")
        return cls(*[float(v) for v in arr])


def bicopter_deriv(
    state: BicopterState, thrust: float, torque: float, params: BicopterParams
) -> np.ndarray:
    """Continuous-time state derivative under total thrust and torque.

    Thrust acts along the body axis: horizontally as (T/m) sin(theta), and
    against gravity as (T/m) cos(theta); positive vertical is down, so gravity
    appears with a plus sign.
    """
    sin_t = math.sin(state.theta)
    cos_t = math.cos(state.theta)
    acc = thrust / params.mass
    return np.array(
        [
            state.v_h,
            acc * sin_t,
            state.v_v,
            -acc * cos_t + params.gravity,
            state.omega,
            torque / params.inertia,
        ]
    )


def rk4_step(
    state: BicopterState,
    thrust: float,
    torque: float,
    params: BicopterParams,
    dt: float,
    substeps: int = 1,
) -> BicopterState:
    """Classical fourth-order Runge-Kutta over one sample, inputs held constant."""
    if not dt > 0:
        raise ValueError(f"integration step must be positive, got {dt!r}")
    if int(substeps) != substeps or substeps < 1:
        raise ValueError(f"substep count must be a positive integer, got {substeps!r}")
    h = dt / int(substeps)
    y = state.as_array()

    def f(arr):
        return bicopter_deriv(BicopterState.from_array(arr), thrust, torque, params)

    for _ in range(int(substeps)):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.isfinite(y).all():
        raise DivergenceError(
            f"integration diverged with thrust={thrust!r}, torque={torque!r}"
        )
    return BicopterState.from_array(y)


def f_map(u_h: float, u_v: float, params: BicopterParams) -> Tuple[float, float]:
    """Map translational force commands to total thrust and a tilt reference.

    T = sqrt(u_h^2 + (m g - u_v)^2), theta_ref = atan2(u_h, m g - u_v); the
    degenerate case T = 0 returns theta_ref = 0 for continuity with hover.
    """
    u_h = float(u_h)
    vertical = params.hover_thrust - float(u_v)
    thrust = math.hypot(u_h, vertical)
    if thrust == 0.0:
        return 0.0, 0.0
    return thrust, math.atan2(u_h, vertical)


def bicopter_position_model(ts: float, mass: float) -> LtiModel:
    """Decoupled design model for one translational axis (force input)."""
    return LtiModel(
        [[1.0, ts], [0.0, 1.0]],
        [[0.5 * ts * ts / mass], [ts / mass]],
        ts,
    )


def bicopter_attitude_model(ts: float, inertia: float) -> LtiModel:
    """Design model for the tilt axis (torque input)."""
    return LtiModel(
        [[1.0, ts], [0.0, 1.0]],
        [[0.5 * ts * ts / inertia], [ts / inertia]],
        ts,
    )


@dataclass
class CascadeStepRecord:
    """Signals of one closed-loop tick, sampled before the plant advances."""

    state: BicopterState
    r_h: float
    r_v: float
    u_req_h: float
    u_req_v: float
    u_app_h: float
    u_app_v: float
    thrust: float
    torque: float
    status_h: str
    status_v: str


class BicopterCascade:
    """Inner/outer-loop closed loop with optional per-axis safety filters.

    One tick runs the dataflow: outer tracking controllers produce requested
    accelerations, the per-axis filters project them onto their admissible
    sets, the thrust/tilt map converts them to (T, theta_ref), the inner
    controller turns the tilt error into torque, and the continuous dynamics
    integrate one sample under held inputs.
    """

    def __init__(
        self,
        params: BicopterParams,
        ts: float,
        ctrl_h: LqrIntController,
        ctrl_v: LqrIntController,
        ctrl_att: LqrIntController,
        filter_h: Optional[PcbfFilter] = None,
        filter_v: Optional[PcbfFilter] = None,
        substeps: int = 10,
        qls_max_iter: int = 100,
        initial_state: Optional[BicopterState] = None,
    ):
        self.params = params
        self.ts = ts
        self.ctrl_h = ctrl_h
        self.ctrl_v = ctrl_v
        self.ctrl_att = ctrl_att
        self.filter_h = filter_h
        self.filter_v = filter_v
        self.substeps = substeps
        self.qls_max_iter = qls_max_iter
        self.state = initial_state if initial_state is not None else BicopterState()

    def step(self, r_h: float, r_v: float) -> CascadeStepRecord:
        s = self.state
        x_h = column([s.p_h, s.v_h])
        x_v = column([s.p_v, s.v_v])
        u_req_h = self.ctrl_h.step([r_h - s.p_h, -s.v_h])
        u_req_v = self.ctrl_v.step([r_v - s.p_v, -s.v_v])
        u_h_col, status_h, _ = apply_filter(
            self.filter_h, [[u_req_h]], x_h, max_iter=self.qls_max_iter
        )
        u_v_col, status_v, _ = apply_filter(
            self.filter_v, [[u_req_v]], x_v, max_iter=self.qls_max_iter
        )
        u_app_h = float(u_h_col[0, 0])
        u_app_v = float(u_v_col[0, 0])
        thrust, theta_ref = f_map(u_app_h, u_app_v, self.params)
        torque = self.ctrl_att.step([theta_ref - s.theta, -s.omega])
        self.ctrl_h.set_applied_input(u_app_h)
        self.ctrl_v.set_applied_input(u_app_v)
        self.ctrl_att.set_applied_input(torque)
        self.state = rk4_step(s, thrust, torque, self.params, self.ts, self.substeps)
        return CascadeStepRecord(
            state=s,
            r_h=r_h,
            r_v=r_v,
            u_req_h=u_req_h,
            u_req_v=u_req_v,
            u_app_h=u_app_h,
            u_app_v=u_app_v,
            thrust=thrust,
            torque=torque,
            status_h=status_h,
            status_v=status_v,
        )
