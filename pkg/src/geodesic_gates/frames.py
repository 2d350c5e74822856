"""Lab-frame Hamiltonians, dressing transforms and reduced rotating-frame models.

Two-qubit model (qubit 2 driven):

    H0 = (w1 Z1 + w2 Z2)/2 + (g1 (XX + YY) + g2 ZZ)/4
    Hc = Omega(t)/2 (cos(wd t) X2 + sin(wd t) Y2)

Three-qubit chain (driven qubit in the chain middle, tensor index 3 so the
undriven Hamiltonian blocks cleanly):

    H0 = (w1 Z1 + w2 Z2 + w Z3)/2
         + g1 (X1 X3 + Y1 Y3 + X2 X3 + Y2 Y3)/4 + g2 (Z1 Z3 + Z2 Z3)/4

with equal neighbor spacing w - w1 = w2 - w = delta. Dressing with the
unitary S diagonalizes H0 (exactly for two qubits, to O(lambda^3) in
lambda = g1/delta for three), and unwinding the rotating frame
R(t) = exp(-i K t), K = sum_i rot_freq_i Z_i / 2, leaves the block model

    H_rot = (+) blocks (beta_i Z + Omega_eff(t) X)/2  +  V_cr(t),

where V_cr is the coherent control-crosstalk term oscillating at the
effective detuning delta_tilde. Basis ordering is |q1 q2 (q3)> with qubit 1
most significant and Z|0> = +|0>.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .curves import Waveform
from .linalg import embed_single, expm_hermitian, pauli_string
from .linalg import SIGMA_X, SIGMA_Y, SIGMA_Z

DRIVE_MIDPOINT = "midpoint"
DRIVE_RESONANT_LOWER = "resonant_lower"
DRIVE_CENTER = "center"


@dataclass(frozen=True)
class SystemConfig:
    """Physical parameters of the coupled-qubit model (units of g2 = J)."""

    n_qubits: int
    delta: float = 20.0
    g1: float = 1.0
    g2: float = 1.0
    omega_ref: float = 0.0
    drive_choice: str = DRIVE_MIDPOINT

    def __post_init__(self):
        if self.n_qubits not in (2, 3):
            raise ValueError("n_qubits must be 2 or 3")
        if self.delta == 0:
            raise ValueError("delta must be nonzero")
        if self.n_qubits == 2 and self.drive_choice not in (DRIVE_MIDPOINT, DRIVE_RESONANT_LOWER):
            raise ValueError(f"two-qubit drive_choice must be midpoint or resonant_lower, got {self.drive_choice!r}")
        if self.n_qubits == 3:
            if self.drive_choice != DRIVE_CENTER:
                raise ValueError("three-qubit drive_choice must be center")
            if abs(self.g1 / self.delta) >= 1.0:
                raise ValueError("three-qubit model needs |g1/delta| < 1")

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def target_qubit(self) -> int:
        return self.n_qubits  # driven qubit is indexed last

    @property
    def qubit_frequencies(self) -> tuple:
        """Lab frequencies; absolute values only matter through differences."""
        if self.n_qubits == 2:
            return (self.omega_ref + self.delta, self.omega_ref)
        w = self.omega_ref
        return (w - self.delta, w + self.delta, w)

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "delta": self.delta,
            "g1": self.g1,
            "g2": self.g2,
            "omega_ref": self.omega_ref,
            "drive_choice": self.drive_choice,
        }


@dataclass(frozen=True)
class FrameData:
    """Dressing transform plus the derived rotating-frame quantities."""

    S: np.ndarray = field(repr=False)
    betas: tuple
    delta_tilde: float
    drive_scale: float
    rotating_freqs: tuple
    omega_d: float
    epsilon: float          # crosstalk strength multiplying Omega(t) in V_cr
    n_qubits: int

    @property
    def design_beta(self) -> float:
        """The block detuning the waveform time scaling is built for."""
        return max(abs(b) for b in self.betas)


@lru_cache(maxsize=32)
def lab_static(config: SystemConfig) -> np.ndarray:
    """Undriven lab Hamiltonian H0."""
    w = config.qubit_frequencies
    n = config.n_qubits
    h = sum(0.5 * w[i] * embed_single(SIGMA_Z, i + 1, n) for i in range(n))
    if n == 2:
        h = h + 0.25 * config.g1 * (pauli_string("XX") + pauli_string("YY"))
        h = h + 0.25 * config.g2 * pauli_string("ZZ")
    else:
        h = h + 0.25 * config.g1 * (pauli_string("XIX") + pauli_string("YIY")
                                    + pauli_string("IXX") + pauli_string("IYY"))
        h = h + 0.25 * config.g2 * (pauli_string("ZIZ") + pauli_string("IZZ"))
    return h


@lru_cache(maxsize=32)
def _drive_quadratures(n_qubits: int, target: int):
    return (embed_single(SIGMA_X, target, n_qubits), embed_single(SIGMA_Y, target, n_qubits))


def lab_hamiltonian(config: SystemConfig, pulse: Waveform, t: float) -> np.ndarray:
    """Full lab Hamiltonian H0 + Hc(t); pulse interpolated linearly."""
    if t < -1e-12 or t > pulse.T + 1e-12:
        raise ValueError(f"t = {t} outside the pulse window [0, {pulse.T}]")
    frame = dressing(config)
    omega = float(pulse.envelope(t))
    xt, yt = _drive_quadratures(config.n_qubits, config.target_qubit)
    wd = frame.omega_d
    return lab_static(config) + 0.5 * omega * (np.cos(wd * t) * xt + np.sin(wd * t) * yt)


def lab_hamiltonian_samples(config: SystemConfig, pulse: Waveform,
                            times: np.ndarray) -> np.ndarray:
    """Vectorized lab Hamiltonian stack H(t_k), shape (N, d, d)."""
    frame = dressing(config)
    xt, yt = _drive_quadratures(config.n_qubits, config.target_qubit)
    omega = pulse.envelope(times)
    wd = frame.omega_d
    drive = (0.5 * omega * np.cos(wd * times))[:, None, None] * xt \
        + (0.5 * omega * np.sin(wd * times))[:, None, None] * yt
    return lab_static(config)[None, :, :] + drive


def two_qubit_dressing(config: SystemConfig) -> FrameData:
    """Exact diagonalizing transform for the two-qubit model.

    theta = -arctan(g1/delta)/2 rotates the single-excitation subspace;
    the dressed target frequency splits to w2_tilde +- g2/2 depending on the
    neighbor state, and the drive choice picks the block detunings.
    """
    if config.n_qubits != 2:
        raise ValueError("two_qubit_dressing needs a 2-qubit config")
    theta = -0.5 * np.arctan2(config.g1, config.delta)
    c, s = np.cos(theta), np.sin(theta)
    S = np.array([
        [1, 0, 0, 0],
        [0, c, -s, 0],
        [0, s, c, 0],
        [0, 0, 0, 1],
    ], dtype=complex)
    w1, w2 = config.qubit_frequencies
    root = np.sqrt(config.g1**2 + config.delta**2)
    shift = 0.5 * (config.delta - root)
    w2_t = w2 + shift
    w1_t = w1 - shift
    if config.drive_choice == DRIVE_MIDPOINT:
        omega_d = w2_t
        betas = (0.5 * config.g2, -0.5 * config.g2)
        delta_tilde = -root
    else:
        omega_d = w2_t - 0.5 * config.g2
        betas = (config.g2, 0.0)
        delta_tilde = -root - 0.5 * config.g2
    return FrameData(S=S, betas=betas, delta_tilde=delta_tilde, drive_scale=c,
                     rotating_freqs=(w1_t, omega_d), omega_d=omega_d,
                     epsilon=0.5 * np.tan(theta), n_qubits=2)


# Pauli-string generators of the three-qubit dressing rotations
_P1_TERMS = (("XZY", 1.0), ("YZX", -1.0), ("ZXY", 1.0), ("ZYX", -1.0))
_P2_TERMS = (("XIY", 1.0), ("YIX", -1.0), ("IXY", -1.0), ("IYX", 1.0))
_P3_TERMS = (("XYI", 1.0), ("YXI", -1.0))


def _pauli_sum(terms) -> np.ndarray:
    return sum(sign * pauli_string(spec) for spec, sign in terms)


def three_qubit_dressing(config: SystemConfig) -> FrameData:
    """Perturbative block-diagonalizing transform for the chain, O(lambda^3).

    S = S3 S2 S1 with S1 = exp(i alpha (P1+P2)/4), S2 = exp(i kappa (P1-P2)/4),
    S3 = exp(i gamma P3/2); alpha = lambda/2 - (g2/4g1) lambda^2,
    kappa = -lambda/2 - (g2/4g1) lambda^2, gamma = arctan(lambda^2/(4+lambda^2))/2.
    """
    if config.n_qubits != 3:
        raise ValueError("three_qubit_dressing needs a 3-qubit config")
    lam = config.g1 / config.delta
    if abs(lam) > 0.2:
        raise ValueError(f"lambda = g1/delta = {lam} outside the validity range |lambda| <= 0.2")
    alpha = 0.5 * lam - (config.g2 / (4.0 * config.g1)) * lam**2
    kappa = -0.5 * lam - (config.g2 / (4.0 * config.g1)) * lam**2
    gamma = 0.5 * np.arctan(lam**2 / (4.0 + lam**2))
    p1 = _pauli_sum(_P1_TERMS)
    p2 = _pauli_sum(_P2_TERMS)
    p3 = _pauli_sum(_P3_TERMS)
    # R(angle, P) = exp(i angle P) = expm_hermitian(P, -angle)
    s1 = expm_hermitian(p1 + p2, -alpha / 4.0)
    s2 = expm_hermitian(p1 - p2, -kappa / 4.0)
    s3 = expm_hermitian(p3, -gamma / 2.0)
    S = s3 @ s2 @ s1
    delta_tilde = config.delta * (1.0 + lam**2 / 4.0 + lam**4 / 32.0)
    w = config.omega_ref
    w1_t = w - delta_tilde
    w2_t = w + delta_tilde
    omega_d = w
    return FrameData(S=S, betas=(config.g2, 0.0, 0.0, -config.g2),
                     delta_tilde=delta_tilde, drive_scale=1.0 - lam**2 / 4.0,
                     rotating_freqs=(w1_t, w2_t, omega_d), omega_d=omega_d,
                     epsilon=lam / 4.0, n_qubits=3)


@lru_cache(maxsize=32)
def dressing(config: SystemConfig) -> FrameData:
    return two_qubit_dressing(config) if config.n_qubits == 2 else three_qubit_dressing(config)


def block_z_diag(frame: FrameData) -> np.ndarray:
    """Diagonal of the block part (+) beta_i Z / 2."""
    return np.concatenate([[0.5 * b, -0.5 * b] for b in frame.betas])


@lru_cache(maxsize=32)
def _crosstalk_templates(config: SystemConfig):
    """Constant matrices multiplying Omega(t) {cos, sin}(k dt~ t) in V_cr."""
    if config.n_qubits == 2:
        frame = dressing(config)
        # epsilon = tan(theta)/2; the effective envelope multiplies these
        return ((1.0, frame.epsilon * pauli_string("XZ"), frame.epsilon * pauli_string("YZ")),)
    lam = config.g1 / config.delta
    c2 = config.g2 / (8.0 * config.g1) * lam**2
    a1 = 0.25 * lam * (pauli_string("XIZ") - pauli_string("IXZ")) \
        - c2 * (pauli_string("XZZ") + pauli_string("ZXZ"))
    b1 = 0.25 * lam * (pauli_string("YIZ") + pauli_string("IYZ")) \
        - c2 * (pauli_string("YZZ") - pauli_string("ZYZ"))
    a2 = c2 * (pauli_string("XXX") + pauli_string("YYX"))
    b2 = c2 * (pauli_string("YXX") - pauli_string("XYX"))
    return ((1.0, a1, b1), (2.0, a2, b2))


def crosstalk_term(config: SystemConfig, frame: FrameData, omega_lab: float, t: float) -> np.ndarray:
    """Coherent control-crosstalk operator V_cr(t) in the rotating frame.

    Two qubits: (tan(theta)/2) Omega_eff(t) (cos(dt~ t) XZ + sin(dt~ t) YZ).
    Three qubits: the lambda and lambda^2 terms with lab envelope Omega(t):

        Omega(t) [ (V11 + V12) lambda / 4
                   + (g2 / 8 g1) lambda^2 (V21 + V22 + V212) ].
    """
    amp = omega_lab * (frame.drive_scale if config.n_qubits == 2 else 1.0)
    out = 0.0
    for mult, a_mat, b_mat in _crosstalk_templates(config):
        phase = mult * frame.delta_tilde * t
        out = out + amp * (np.cos(phase) * a_mat + np.sin(phase) * b_mat)
    return out


def reduced_hamiltonian(config: SystemConfig, frame: FrameData, envelope, t: float,
                        include_crosstalk: bool = True) -> np.ndarray:
    """Rotating-frame model: block-diagonal qubit blocks plus V_cr.

    `envelope` supplies the effective drive Omega_eff(t) seen by the target
    blocks (the synthesized waveform); the crosstalk term is built from the
    lab envelope Omega_eff/drive_scale.
    """
    omega_eff = float(envelope(t))
    dim = config.dim
    h = np.zeros((dim, dim), dtype=complex)
    np.fill_diagonal(h, block_z_diag(frame))
    h = h + 0.5 * omega_eff * embed_single(SIGMA_X, config.target_qubit, config.n_qubits)
    if include_crosstalk:
        h = h + crosstalk_term(config, frame, omega_eff / frame.drive_scale, t)
    return h


def reduced_hamiltonian_samples(config: SystemConfig, frame: FrameData,
                                omega_eff: np.ndarray, times: np.ndarray,
                                include_crosstalk: bool = True) -> np.ndarray:
    """Vectorized stack of reduced Hamiltonians, shape (N, d, d)."""
    n = len(times)
    dim = config.dim
    h = np.zeros((n, dim, dim), dtype=complex)
    idx = np.arange(dim)
    h[:, idx, idx] = block_z_diag(frame)[None, :]
    xt = embed_single(SIGMA_X, config.target_qubit, config.n_qubits)
    h += (0.5 * omega_eff)[:, None, None] * xt
    if include_crosstalk:
        amp = omega_eff / frame.drive_scale * (frame.drive_scale if config.n_qubits == 2 else 1.0)
        for mult, a_mat, b_mat in _crosstalk_templates(config):
            phase = mult * frame.delta_tilde * times
            h += (amp * np.cos(phase))[:, None, None] * a_mat
            h += (amp * np.sin(phase))[:, None, None] * b_mat
    return h


def logical_target(config: SystemConfig, gate_angle: float) -> np.ndarray:
    """Ideal gate: identity on the neighbors, R_X(gate_angle) on the target."""
    rx = expm_hermitian(SIGMA_X, gate_angle / 2.0)
    out = np.eye(2**(config.n_qubits - 1), dtype=complex)
    return np.kron(out, rx)


def frame_unwind_diag(frame: FrameData, t: float) -> np.ndarray:
    """Diagonal of R(t) = exp(-i K t), K = sum_i rot_freq_i Z_i / 2."""
    n = frame.n_qubits
    k = np.zeros(2**n)
    for i, freq in enumerate(frame.rotating_freqs):
        zdiag = np.array([1.0, -1.0])
        full = np.ones(1)
        for j in range(n):
            full = np.kron(full, zdiag if j == i else np.ones(2))
        k = k + 0.5 * freq * full
    return np.exp(-1.0j * k * t)


def logical_from_lab(u_lab: np.ndarray, config: SystemConfig, frame: FrameData,
                     T: float) -> np.ndarray:
    """Transform a lab propagator to the logical rotating frame.

    U_logical = R(T)^dag S U_lab S^dag R(0), with R(0) = identity.
    """
    r_T = frame_unwind_diag(frame, T)
    return (r_T.conj()[:, None] * (frame.S @ u_lab @ frame.S.conj().T))
