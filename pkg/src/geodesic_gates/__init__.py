"""Geometric synthesis of crosstalk-robust single-qubit gates.

Single-qubit drives in coupled qubit arrays see state-dependent detunings
(ZZ crosstalk) and leak onto neighbors (control crosstalk). This package
reverse-engineers control pulses from closed curves on the 2-sphere, adds
first-order Magnus robustness functionals, and validates every pulse by
direct time-domain simulation of the two- and three-qubit models.
"""

from .curves import (
    CHI_GRID_POINTS,
    CurveParams,
    Waveform,
    arc_speed,
    area_functional,
    closed_form_b3,
    coefficient_for_angle,
    curve_grid,
    phi,
    phi_prime,
    rotation_angle,
    shortest_b1,
    solve_b1_zero_area,
    solve_b3_zero_area,
    synthesize_waveform,
    theta_of_chi,
)
from .frames import (
    FrameData,
    SystemConfig,
    dressing,
    lab_hamiltonian,
    logical_from_lab,
    logical_target,
    reduced_hamiltonian,
    three_qubit_dressing,
    two_qubit_dressing,
)
from .linalg import (
    expm_hermitian,
    gate_fidelity,
    pauli_string,
    propagate,
    propagate_converged,
)
from .magnus import (
    ChannelWeights,
    Susceptibility,
    channel_costs,
    crosstalk_amplitudes,
    full_susceptibility,
    magnus_oracle,
    robust_cost,
    susceptibility_beta,
    susceptibility_beta0,
)
from .optimizer import (
    OptimizerConfig,
    OptimizeResult,
    optimize,
    preset_curve,
    preset_system,
    presets,
    total_cost,
)
from .simulate import (
    NoiseSetting,
    SweepResult,
    cosine_baseline,
    matched_cosine_baseline,
    noise_sweep,
    simulate_gate,
    slope_fit,
)

__version__ = "0.1.0"
