"""Time-domain validation: gate simulation, noise sweeps, slope fits.

Quasi-static noise enters as constant operators for one gate duration:
frequency noise dw * Z_target and coupling noise dJ * sum_n Z_target Z_n.
Both the reduced rotating-frame model and the full lab-frame model can be
propagated; the lab result is unwound to the logical frame before the
fidelity is taken.

The reduced model without control crosstalk is block diagonal, so each
noise point costs a batch of closed-form SU(2) steps (fourth-order Magnus
on Gauss nodes); whole noise grids are propagated in one vectorized pass.
With crosstalk on, or in the lab frame, the midpoint rule with batched
eigendecompositions is used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import Waveform
from .frames import (
    FrameData,
    SystemConfig,
    dressing,
    lab_hamiltonian_samples,
    logical_from_lab,
    logical_target,
    reduced_hamiltonian_samples,
)
from .linalg import (
    SIGMA_X,
    embed_single,
    expm_hermitian,
    gate_fidelity,
    pauli_string,
    product_reduce,
    propagate_sampled,
    su2_exp_batch,
)

MODEL_REDUCED = "reduced"
MODEL_LAB = "lab"

_GAUSS_OFFSET = 0.5 * np.sqrt(3.0) / 3.0
_BATCH_ELEMENTS = 2_000_000  # chunk size cap for (grid x time) step arrays


@dataclass(frozen=True)
class NoiseSetting:
    """Quasi-static noise offsets, constant over one gate."""

    delta_omega: float = 0.0
    delta_j: float = 0.0
    crosstalk_on: bool = True

    def __post_init__(self):
        if abs(self.delta_omega) > 0.5 or abs(self.delta_j) > 0.5:
            raise ValueError("quasi-static noise magnitudes must be <= 0.5 (units of J)")


def noise_operator(config: SystemConfig, noise: NoiseSetting) -> np.ndarray:
    """dw Z_target + dJ sum_neighbors Z_target Z_neighbor (diagonal)."""
    n = config.n_qubits
    op = noise.delta_omega * embed_single(np.diag([1.0, -1.0]).astype(complex),
                                          config.target_qubit, n)
    if n == 2:
        op = op + noise.delta_j * pauli_string("ZZ")
    else:
        op = op + noise.delta_j * (pauli_string("ZIZ") + pauli_string("IZZ"))
    return op


def _coupling_block_signs(config: SystemConfig) -> np.ndarray:
    """Per-block Z coefficient of sum_n Z_target Z_n."""
    return np.array([1.0, -1.0]) if config.n_qubits == 2 else np.array([2.0, 0.0, 0.0, -2.0])


def _check_waveform(frame: FrameData, waveform: Waveform) -> None:
    if waveform.beta_design != 0.0 and abs(abs(waveform.beta_design) - frame.design_beta) > 1e-12:
        raise ValueError(
            f"waveform designed for |beta| = {abs(waveform.beta_design)} "
            f"but the system's design detuning is {frame.design_beta}")


def _block_unitaries(wave: Waveform, z_coefs: np.ndarray, n_steps: int) -> np.ndarray:
    """Propagators of (2 z_b Z + Omega(t) X)/2 ... for a grid of Z coefficients.

    `z_coefs` has shape (..., ) of static Z/2 coefficients (i.e. the block
    Hamiltonian is z_b * Z + Omega(t) X / 2 with z_b = beta_b/2 + noise).
    Fourth-order Magnus steps on two Gauss nodes; the commutator term is
    closed form. Returns shape z_coefs.shape + (2, 2).
    """
    dt = wave.T / n_steps
    t0 = np.arange(n_steps) * dt
    om1 = wave.envelope(t0 + (0.5 - _GAUSS_OFFSET) * dt)
    om2 = wave.envelope(t0 + (0.5 + _GAUSS_OFFSET) * dt)
    x_row = 0.25 * (om1 + om2) * dt
    y_base = -np.sqrt(3.0) / 24.0 * dt * (om2 - om1)
    flat = np.atleast_1d(np.asarray(z_coefs, dtype=float)).ravel()
    out = np.empty((flat.size, 2, 2), dtype=complex)
    chunk = max(1, _BATCH_ELEMENTS // n_steps)
    for lo in range(0, flat.size, chunk):
        zc = flat[lo:lo + chunk]
        x = np.broadcast_to(x_row, (zc.size, n_steps))
        z = np.repeat(zc[:, None] * dt, n_steps, axis=1)
        y = y_base[None, :] * (2.0 * zc[:, None])
        out[lo:lo + chunk] = product_reduce(su2_exp_batch(x, y, z))
    return out.reshape(np.shape(z_coefs) + (2, 2))


def _default_steps(wave: Waveform, crosstalk_on: bool, frame: FrameData) -> int:
    if not crosstalk_on:
        return 4 * (len(wave.samples) - 1)
    # resolve the crosstalk oscillation at delta_tilde
    per_unit = max(64.0, 10.0 * abs(frame.delta_tilde))
    n = int(2 ** np.ceil(np.log2(max(16384, per_unit * wave.T))))
    return n


def simulate_gate(system: SystemConfig, frame: FrameData, waveform: Waveform,
                  noise: NoiseSetting = NoiseSetting(), model: str = MODEL_REDUCED,
                  gate_angle: float = np.pi, n_steps: int | None = None):
    """Propagate one gate and return (U_final, infidelity vs R_X target)."""
    _check_waveform(frame, waveform)
    target = logical_target(system, gate_angle)
    if model == MODEL_REDUCED:
        if noise.crosstalk_on:
            n = n_steps or _default_steps(waveform, True, frame)
            dt = waveform.T / n
            mids = (np.arange(n) + 0.5) * dt
            hams = reduced_hamiltonian_samples(system, frame, waveform.envelope(mids), mids)
            hams += noise_operator(system, noise)[None, :, :]
            u_final = propagate_sampled(hams, dt)
        else:
            n = n_steps or _default_steps(waveform, False, frame)
            signs = _coupling_block_signs(system)
            z_coefs = 0.5 * np.asarray(frame.betas) + noise.delta_omega + noise.delta_j * signs
            blocks = _block_unitaries(waveform, z_coefs, n)
            u_final = np.zeros((system.dim, system.dim), dtype=complex)
            for b in range(len(frame.betas)):
                u_final[2 * b:2 * b + 2, 2 * b:2 * b + 2] = blocks[b]
    elif model == MODEL_LAB:
        lab_wave = Waveform(T=waveform.T, dt=waveform.dt,
                            samples=waveform.samples / frame.drive_scale,
                            beta_design=waveform.beta_design)
        n = n_steps or max(131072, _default_steps(waveform, True, frame))
        dt = waveform.T / n
        mids = (np.arange(n) + 0.5) * dt
        hams = lab_hamiltonian_samples(system, lab_wave, mids)
        hams += noise_operator(system, noise)[None, :, :]
        u_lab = propagate_sampled(hams, dt)
        u_final = logical_from_lab(u_lab, system, frame, waveform.T)
    else:
        raise ValueError(f"unknown model {model!r}")
    return u_final, 1.0 - gate_fidelity(u_final, target)


@dataclass(frozen=True)
class SweepResult:
    """Infidelity over a (dw, dJ) grid plus provenance for serialization."""

    axis_domega: np.ndarray
    axis_dj: np.ndarray
    infidelity: np.ndarray  # shape (len(axis_domega), len(axis_dj))
    model: str
    metadata: dict = field(default_factory=dict)

    def rows(self):
        """Long-format rows (domega, dj, infidelity), row-major."""
        for i, dw in enumerate(self.axis_domega):
            for j, dj in enumerate(self.axis_dj):
                yield float(dw), float(dj), float(self.infidelity[i, j])


def noise_sweep(system: SystemConfig, frame: FrameData, waveform: Waveform,
                domega_values, dj_values, model: str = MODEL_REDUCED,
                crosstalk_on: bool = True, gate_angle: float = np.pi,
                n_steps: int | None = None, metadata: dict | None = None) -> SweepResult:
    """Infidelity at every grid point; evaluations independent, deterministic."""
    domega_values = np.atleast_1d(np.asarray(domega_values, dtype=float))
    dj_values = np.atleast_1d(np.asarray(dj_values, dtype=float))
    if domega_values.size > 201 or dj_values.size > 201:
        raise ValueError("sweep grids are limited to 201 points per axis")
    _check_waveform(frame, waveform)
    target = logical_target(system, gate_angle)
    n_dw, n_dj = domega_values.size, dj_values.size
    infid = np.empty((n_dw, n_dj))
    if model == MODEL_REDUCED and not crosstalk_on:
        signs = _coupling_block_signs(system)
        betas = np.asarray(frame.betas)
        dw_grid, dj_grid = np.meshgrid(domega_values, dj_values, indexing="ij")
        n = n_steps or _default_steps(waveform, False, frame)
        rx = expm_hermitian(SIGMA_X, gate_angle / 2.0)
        trace_sum = np.zeros((n_dw, n_dj), dtype=complex)
        for b, beta in enumerate(betas):
            z_coefs = 0.5 * beta + dw_grid + dj_grid * signs[b]
            blocks = _block_unitaries(waveform, z_coefs, n)
            trace_sum += np.einsum("ijba,ba->ij", blocks.conj(), rx, optimize=True)
        dim = 2 * len(betas)
        infid = 1.0 - np.abs(trace_sum) ** 2 / dim**2
    else:
        for i, dw in enumerate(domega_values):
            for j, dj in enumerate(dj_values):
                noise = NoiseSetting(delta_omega=float(dw), delta_j=float(dj),
                                     crosstalk_on=crosstalk_on)
                _, infid[i, j] = simulate_gate(system, frame, waveform, noise,
                                               model=model, gate_angle=gate_angle,
                                               n_steps=n_steps)
    meta = {"gate_angle": gate_angle, "crosstalk_on": crosstalk_on,
            "beta_design": waveform.beta_design, "T": waveform.T}
    meta.update(metadata or {})
    return SweepResult(axis_domega=domega_values, axis_dj=dj_values,
                       infidelity=infid, model=model, metadata=meta)


def slope_fit(noise_values, infidelities, floor: float = 0.0,
              subtract_floor: bool = False, min_points: int = 6) -> float:
    """Least-squares log-log slope, excluding points within 10x of the floor.

    `floor` is the zero-noise infidelity; points with I <= 10 * floor sit on
    the plateau and carry no exponent information. With `subtract_floor` the
    plateau value is removed before fitting (useful when the floor is not
    tiny compared with the smallest retained points).
    """
    x = np.asarray(noise_values, dtype=float)
    y = np.asarray(infidelities, dtype=float)
    if np.any(x <= 0):
        raise ValueError("noise values must be positive for a log-log fit")
    mask = y > 10.0 * floor
    if subtract_floor:
        y = y - floor
        mask &= y > 0
    x, y = x[mask], y[mask]
    if x.size < min_points:
        raise ValueError(f"only {x.size} usable points above the floor plateau "
                         f"(need {min_points})")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def cosine_baseline(gate_angle: float, T: float, n_samples: int = 4096) -> Waveform:
    """Plain cosine pulse Omega(t) = (Phi/T)(1 - cos(2 pi t / T)).

    Its exact integral is Phi; the uniform sampling preserves that under the
    trapezoid rule because the cosine sums to zero over the full period.
    """
    if gate_angle <= 0 or T <= 0:
        raise ValueError("gate angle and duration must be positive")
    t = np.linspace(0.0, T, n_samples)
    samples = (gate_angle / T) * (1.0 - np.cos(2.0 * np.pi * t / T))
    return Waveform(T=T, dt=t[1] - t[0], samples=samples, beta_design=0.0)


def matched_cosine_baseline(gate_angle: float, reference: Waveform,
                            n_samples: int = 4097) -> Waveform:
    """Cosine pulse whose peak amplitude matches a reference pulse.

    An odd sample count puts a sample exactly on the peak at T/2.
    """
    T = 2.0 * gate_angle / reference.peak_amplitude
    return cosine_baseline(gate_angle, T, n_samples)
