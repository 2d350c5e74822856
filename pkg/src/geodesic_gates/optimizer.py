"""Ansatz-parameter optimization and the published parameter sets.

The published tables list (b1, b2, b3, c) for X(pi) (a = -1/(32 pi^2)) and
X(pi/2) (a = -1/(64 pi^2)) in two- and three-qubit settings. Those rows
follow the opposite sign convention for phi(chi) from the one used here
(the boundary condition phi(4 pi) - phi(0) = +Phi): evaluated verbatim they
enclose area 2*A*a instead of zero and their susceptibilities are large.
Negating (b1, b2, b3, c) lands on the intended curves; the negated values
reproduce zero area and the published robustness to within table rounding.
:func:`presets` returns the rows verbatim for auditing; :func:`preset_curve`
returns the sign-corrected, area-resolved parameters used everywhere a
curve is actually synthesized. The audit command reports both.

Optimization is a deterministic seeded multi-start Nelder-Mead over the
free parameters, with the area constraint eliminated exactly through the
affine dependence of C_target on the coefficients.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize as sp_optimize

from .curves import (
    CHI_GRID_POINTS,
    CurveParams,
    area_functional,
    coefficient_for_angle,
    synthesize_waveform,
)
from .frames import DRIVE_RESONANT_LOWER, FrameData, SystemConfig, dressing
from .magnus import ChannelWeights, robust_cost

PRESET_KEYS = (
    "xpi-2q-nonrobust", "xpi-2q-robust", "xpi-3q-nonrobust", "xpi-3q-robust",
    "xhalfpi-2q-nonrobust", "xhalfpi-2q-robust", "xhalfpi-3q-nonrobust", "xhalfpi-3q-robust",
)

# Published rows, verbatim. gate angle pi: a = -1/(32 pi^2); pi/2: -1/(64 pi^2).
_TABLE_ROWS = {
    "xpi-2q-nonrobust": (0.0, 0.0, 0.0, 0.0),
    "xpi-2q-robust": (-5.86744, 0.0, 0.0, 5.46421),
    "xpi-3q-nonrobust": (5.71915, 0.0, 0.0, 0.0),
    "xpi-3q-robust": (221.65146, -20.91401, 101.22649, -136.55137),
    "xhalfpi-2q-nonrobust": (0.0, 0.0, 0.0, 0.0),
    "xhalfpi-2q-robust": (-2.93379, 0.0, 0.0, 4.81114),
    "xhalfpi-3q-nonrobust": (2.85958, 0.0, 0.0, 0.0),
    "xhalfpi-3q-robust": (124.10776, -12.12601, 57.20512, -73.09143),
}


@dataclass(frozen=True)
class PresetRow:
    key: str
    gate: str          # "xpi" | "xhalfpi"
    setting: str       # "2q" | "3q"
    robust: bool
    phi_target: float
    a: float
    b1: float
    b2: float
    b3: float
    c: float


def presets() -> dict:
    """The eight published rows, bit-matching the tables."""
    table = {}
    for key in PRESET_KEYS:
        gate, setting, flavor = key.split("-")
        phi_t = np.pi if gate == "xpi" else np.pi / 2.0
        b1, b2, b3, c = _TABLE_ROWS[key]
        table[key] = PresetRow(key=key, gate=gate, setting=setting,
                               robust=flavor == "robust", phi_target=phi_t,
                               a=coefficient_for_angle(phi_t), b1=b1, b2=b2, b3=b3, c=c)
    return table


def preset_curve(key: str) -> CurveParams:
    """Simulation-ready curve for a preset row.

    Signs are flipped onto the +Phi branch; for the chain rows, which
    require zero enclosed area, the constrained coefficient is re-solved by
    quadrature so |C_target| < 1e-8 holds exactly rather than to the five
    published decimals.
    """
    row = presets()[key]
    params = CurveParams(a=row.a, b1=-row.b1, b2=-row.b2, b3=-row.b3, c=-row.c,
                         phi_target=row.phi_target)
    if row.setting == "3q":
        if row.robust:
            b3 = _solve_constrained(row.a, b1=-row.b1, b2=-row.b2, which="b3")
            params = params.with_updates(b3=b3)
        else:
            b1 = _solve_constrained(row.a, b1=0.0, b2=0.0, which="b1")
            params = params.with_updates(b1=b1)
    return params


def preset_system(key: str, delta: float = 20.0) -> SystemConfig:
    """Default system configuration for a preset row (J = g1 = g2 = 1)."""
    row = presets()[key]
    if row.setting == "2q":
        return SystemConfig(n_qubits=2, delta=delta)
    return SystemConfig(n_qubits=3, delta=delta, drive_choice="center")


def _area_affine(a: float, grid_points: int = CHI_GRID_POINTS):
    """C_target = c0 + k1 b1 + k2 b2 + k3 b3 (affine, c has no area)."""
    base = CurveParams(a=a, phi_target=-32.0 * np.pi**3 * a)
    c0 = area_functional(base, grid_points)
    k1 = area_functional(base.with_updates(b1=1.0), grid_points) - c0
    k2 = area_functional(base.with_updates(b2=1.0), grid_points) - c0
    k3 = area_functional(base.with_updates(b3=1.0), grid_points) - c0
    return c0, k1, k2, k3


def _solve_constrained(a: float, b1: float, b2: float, which: str) -> float:
    c0, k1, k2, k3 = _area_affine(a)
    if which == "b3":
        return -(c0 + k1 * b1 + k2 * b2) / k3
    return -(c0 + k2 * b2) / k1


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs of the multi-start search."""

    w1: float = 1.0e4
    w2: float = 1.0
    channel_weights: ChannelWeights = field(default_factory=ChannelWeights)
    free_params: tuple = ("b1", "b2", "c")
    starts: int = 16
    seed: int = 42
    max_iters: int = 400
    tol: float = 1e-12
    box_halfwidth: float = 300.0
    include_preset_start: bool = True
    grid_points: int = CHI_GRID_POINTS

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in
             ("w1", "w2", "starts", "seed", "max_iters", "tol", "box_halfwidth",
              "include_preset_start", "grid_points")}
        d["channel_weights"] = self.channel_weights.to_dict()
        d["free_params"] = list(self.free_params)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerConfig":
        data = dict(data)
        if "channel_weights" in data:
            data["channel_weights"] = ChannelWeights.from_dict(data["channel_weights"])
        if "free_params" in data:
            data["free_params"] = tuple(data["free_params"])
        return cls(**data)


def area_zero_required(system: SystemConfig) -> bool:
    """Zero enclosed area is needed whenever a resonant block exists."""
    return system.n_qubits == 3 or system.drive_choice == DRIVE_RESONANT_LOWER


def total_cost(params: CurveParams, system: SystemConfig, frame: FrameData,
               cfg: OptimizerConfig) -> float:
    """C_total = w1 |C_target|^2 + w2 |C_robust|^2."""
    area = area_functional(params, cfg.grid_points) if cfg.w1 != 0.0 else 0.0
    return cfg.w1 * area * area + cfg.w2 * robust_cost(
        params, system, frame, cfg.channel_weights, cfg.grid_points)


@dataclass(frozen=True)
class OptimizeResult:
    params: CurveParams
    cost: float
    converged: bool
    gate_time: float
    start_costs: tuple
    n_evaluations: int
    seed: int

    def to_dict(self) -> dict:
        p = self.params
        return {
            "params": {"a": p.a, "b1": p.b1, "b2": p.b2, "b3": p.b3, "c": p.c,
                       "chi_max": p.chi_max, "phi_target": p.phi_target},
            "cost": self.cost,
            "converged": self.converged,
            "gate_time": self.gate_time,
            "start_costs": list(self.start_costs),
            "n_evaluations": self.n_evaluations,
            "seed": self.seed,
        }


def _matching_preset_key(gate_angle: float, system: SystemConfig, robust: bool = True):
    gate = None
    if abs(gate_angle - np.pi) < 1e-12:
        gate = "xpi"
    elif abs(gate_angle - np.pi / 2.0) < 1e-12:
        gate = "xhalfpi"
    if gate is None:
        return None
    setting = "2q" if system.n_qubits == 2 else "3q"
    return f"{gate}-{setting}-{'robust' if robust else 'nonrobust'}"


def optimize(gate_angle: float, system: SystemConfig, cfg: OptimizerConfig) -> OptimizeResult:
    """Minimize the robustness cost over the free ansatz parameters.

    a is pinned by the gate angle. Where a resonant block requires zero
    area, b3 is eliminated exactly via the affine area relation and the
    remaining free parameters default to (b1, b2, c); for the midpoint
    two-qubit drive the area term is moot, b2 = b3 = 0, and (b1, c) are
    free. Restart 0 starts from the matching published row when one exists,
    the rest from seeded uniform draws in the box; with a fixed seed the
    result is reproducible bit for bit, and ties break by restart index.
    """
    frame = dressing(system)
    a = coefficient_for_angle(gate_angle)
    eliminate = area_zero_required(system)
    if eliminate:
        names = tuple(n for n in cfg.free_params if n in ("b1", "b2", "c"))
        c0, k1, k2, k3 = _area_affine(a, cfg.grid_points)
    else:
        names = tuple(n for n in cfg.free_params if n in ("b1", "c")) or ("b1", "c")
        c0 = k1 = k2 = k3 = 0.0
    if not names:
        raise ValueError("no free parameters selected")

    def build(vec: np.ndarray) -> CurveParams:
        vals = dict(zip(names, vec))
        b1 = vals.get("b1", 0.0)
        b2 = vals.get("b2", 0.0)
        c = vals.get("c", 0.0)
        b3 = -(c0 + k1 * b1 + k2 * b2) / k3 if eliminate else 0.0
        return CurveParams(a=a, b1=b1, b2=b2, b3=b3, c=c, phi_target=gate_angle)

    # the area condition is handled structurally: eliminated exactly via b3
    # where required, moot for the midpoint drive; the penalty weight w1 only
    # matters for direct total_cost evaluations
    objective_cfg = OptimizerConfig.from_dict({**cfg.to_dict(), "w1": 0.0})
    eval_count = 0

    def objective(vec: np.ndarray) -> float:
        nonlocal eval_count
        eval_count += 1
        return total_cost(build(vec), system, frame, objective_cfg)

    rng = np.random.default_rng(cfg.seed)
    starts = []
    if cfg.include_preset_start:
        key = _matching_preset_key(gate_angle, system, robust=True)
        if key is not None:
            row = preset_curve(key)
            starts.append(np.array([getattr(row, n) for n in names]))
    while len(starts) < max(1, cfg.starts):
        starts.append(rng.uniform(-cfg.box_halfwidth, cfg.box_halfwidth, size=len(names)))
    starts = starts[: max(1, cfg.starts)]

    best = None
    start_costs = []
    for idx, x0 in enumerate(starts):
        res = sp_optimize.minimize(
            objective, x0, method="Nelder-Mead",
            options={"maxiter": cfg.max_iters, "xatol": 1e-10, "fatol": cfg.tol,
                     "adaptive": True},
        )
        start_costs.append(float(res.fun))
        if best is None or res.fun < best[1]:
            best = (idx, float(res.fun), np.array(res.x), bool(res.success))
    _, cost, x_best, success = best
    params = build(x_best)
    wave = synthesize_waveform(params, frame.design_beta, n_samples=1024)
    converged = success or cost <= cfg.tol
    return OptimizeResult(params=params, cost=cost, converged=converged,
                          gate_time=wave.T, start_costs=tuple(start_costs),
                          n_evaluations=eval_count, seed=cfg.seed)


def config_digest(payload: dict) -> str:
    """Stable hash of a JSON-serializable config, for output provenance."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
