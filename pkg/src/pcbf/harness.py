"""Closed-loop scenario execution for the two case-study plants.

Each recorded row holds the sampled state at step k, the reference, the
requested and applied inputs, barrier values at that state, the filter
disposition, and per-constraint violation flags. Identical configurations
produce identical traces: there is no randomness, no wall clock, and the
solver path is deterministic.
"""

from __future__ import annotations

import copy
from typing import Iterable, List, Tuple

from .barrier import PcbfFilter, apply_filter, eval_barrier
from .config import (
    BICOPTER,
    BicopterScenario,
    DoubleIntegratorScenario,
    ScenarioConfig,
    from_dict,
)
from .controllers import LqrIntController
from .lifting import lift
from .plants import (
    BicopterCascade,
    DelayedDoubleIntegrator,
    bicopter_position_model,
    double_integrator_model,
)
from .trace import SimTrace, violation_flags

DI_COLUMNS = [
    "step", "t", "r", "x1", "x2", "u_req", "u_app",
    "h1", "h2", "h3", "h4", "status", "viol1", "viol2", "viol3", "viol4",
]

BICOPTER_COLUMNS = [
    "step", "t", "r_h", "r_v",
    "p_h", "v_h", "p_v", "v_v", "theta", "omega",
    "u_req_h", "u_app_h", "u_req_v", "u_app_v", "T", "tau",
    "h_h1", "h_h2", "h_h3", "h_h4", "h_v1", "h_v2", "h_v3", "h_v4",
    "status_h", "status_v",
    "viol_h1", "viol_h2", "viol_h3", "viol_h4",
    "viol_v1", "viol_v2", "viol_v3", "viol_v4",
]


class ScenarioError(RuntimeError):
    """A component failed during closed-loop execution."""


def _controller(gain: Iterable[float], anti_windup: float, ts: float) -> LqrIntController:
    return LqrIntController(
        k_lqr=[list(gain)],
        c_int=[[1.0, 0.0]],
        ts=ts,
        eta_aw=anti_windup,
    )


def _run_double_integrator(s: DoubleIntegratorScenario) -> SimTrace:
    plant = DelayedDoubleIntegrator(s.ts, s.delay_steps)
    ctrl = _controller(s.gain, s.anti_windup, s.ts)
    filt = None
    if s.filter_enabled:
        filt = PcbfFilter(lift(double_integrator_model(s.ts), s.horizon), s.barrier, s.gamma)
    trace = SimTrace(list(DI_COLUMNS), [])
    for k in range(s.duration):
        try:
            t = k * s.ts
            x = plant.state
            r = s.reference.at(t)
            u_req = ctrl.step([r - x[0, 0], -x[1, 0]])
            u_col, status, _ = apply_filter(filt, [[u_req]], x)
            u_app = float(u_col[0, 0])
            h = eval_barrier(s.barrier, x)[:, 0]
            flags = violation_flags(h)
            trace.append(
                [k, t, r, x[0, 0], x[1, 0], u_req, u_app, *h.tolist(), status, *flags]
            )
            plant.step(u_app)
            ctrl.set_applied_input(u_app)
        except Exception as exc:
            raise ScenarioError(f"step {k}: {exc}") from exc
    return trace


def _run_bicopter(s: BicopterScenario) -> SimTrace:
    ctrl_h = _controller(s.gain_h, s.anti_windup, s.ts)
    ctrl_v = _controller(s.gain_v, s.anti_windup, s.ts)
    ctrl_att = _controller(s.gain_att, s.anti_windup, s.ts)
    filter_h = filter_v = None
    if s.filter_enabled:
        design = bicopter_position_model(s.ts, s.params.mass)
        filter_h = PcbfFilter(lift(design, s.horizon_h), s.barrier_h, s.gamma)
        filter_v = PcbfFilter(lift(design, s.horizon_v), s.barrier_v, s.gamma)
    cascade = BicopterCascade(
        s.params, s.ts, ctrl_h, ctrl_v, ctrl_att,
        filter_h=filter_h, filter_v=filter_v, substeps=s.substeps,
    )
    trace = SimTrace(list(BICOPTER_COLUMNS), [])
    for k in range(s.duration):
        try:
            t = k * s.ts
            rec = cascade.step(s.reference_h.at(t), s.reference_v.at(t))
            st = rec.state
            h_h = eval_barrier(s.barrier_h, [[st.p_h], [st.v_h]])[:, 0]
            h_v = eval_barrier(s.barrier_v, [[st.p_v], [st.v_v]])[:, 0]
            trace.append(
                [
                    k, t, rec.r_h, rec.r_v,
                    st.p_h, st.v_h, st.p_v, st.v_v, st.theta, st.omega,
                    rec.u_req_h, rec.u_app_h, rec.u_req_v, rec.u_app_v,
                    rec.thrust, rec.torque,
                    *h_h.tolist(), *h_v.tolist(),
                    rec.status_h, rec.status_v,
                    *violation_flags(h_h), *violation_flags(h_v),
                ]
            )
        except Exception as exc:
            raise ScenarioError(f"step {k}: {exc}") from exc
    return trace


def run_scenario(cfg: ScenarioConfig) -> SimTrace:
    """Execute the configured closed loop and return its trace."""
    if cfg.plant == BICOPTER:
        return _run_bicopter(cfg.scenario)
    return _run_double_integrator(cfg.scenario)


def _set_by_path(data: dict, path: str, value) -> None:
    keys = path.split(".")
    node = data
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            node[key] = {}
        node = node[key]
    node[keys[-1]] = value


def sweep_param(cfg: ScenarioConfig, param: str, values) -> List[Tuple[object, SimTrace]]:
    """Re-run the scenario once per value of a dotted config path.

    Each run revalidates the patched raw config, so sweeps can only visit
    states a hand-written config could reach. Runs execute sequentially and
    independently (fresh plant, controller, and solver per value).
    """
    if cfg.raw is None:
        raise ValueError("sweep requires a config built from a raw dict")
    results = []
    for value in values:
        patched = copy.deepcopy(cfg.raw)
        _set_by_path(patched, param, value)
        results.append((value, run_scenario(from_dict(patched))))
    return results
