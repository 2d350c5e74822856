"""Dense complex linear algebra for 2-, 4- and 8-dimensional Hilbert spaces.

Operators are plain numpy arrays (complex128, row-major). Pauli strings,
Hermitian matrix exponentials, time-ordered propagation and gate fidelity
live here; everything above this layer builds on these primitives.

The time-ordered propagator uses a piecewise-constant midpoint rule,

    U(T) = exp(-i H(t_{N-1} + dt/2) dt) ... exp(-i H(t_0 + dt/2) dt),

which is unconditionally unitary per step. Batched variants (arrays of
small matrices) are provided because single-step Python loops dominate the
runtime otherwise; the batched product is reduced pairwise so the work is
done by vectorized matmul.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

PAULI = {"I": SIGMA_I, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


def pauli_string(spec: str) -> np.ndarray:
    """Kronecker product of single-qubit Paulis, qubit 1 leftmost.

    ``pauli_string("XZY")`` returns X_1 (x) Z_2 (x) Y_3 on the 8-dim space.
    """
    if not 1 <= len(spec) <= 3:
        raise ValueError(f"pauli spec must have 1..3 letters, got {spec!r}")
    out = None
    for letter in spec:
        try:
            op = PAULI[letter]
        except KeyError:
            raise ValueError(f"unknown pauli letter {letter!r} in {spec!r}") from None
        out = op if out is None else np.kron(out, op)
    return out


def embed_single(op: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    """Single-qubit operator at `site` (1-based), identity elsewhere."""
    mats = [SIGMA_I] * n_qubits
    mats[site - 1] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def max_abs(mat: np.ndarray) -> float:
    return float(np.max(np.abs(mat)))


def is_hermitian(mat: np.ndarray, tol: float = 1e-12) -> bool:
    return max_abs(mat - mat.conj().T) < tol


def is_unitary(mat: np.ndarray, tol: float = 1e-10) -> bool:
    d = mat.shape[0]
    return max_abs(mat.conj().T @ mat - np.eye(d)) < tol


def expm_hermitian(ham: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """exp(-i * scale * ham) for Hermitian `ham`, via eigendecomposition."""
    if not is_hermitian(ham, tol=1e-10):
        raise ValueError("expm_hermitian requires a Hermitian matrix")
    evals, evecs = np.linalg.eigh(ham)
    phases = np.exp(-1.0j * scale * evals)
    return (evecs * phases) @ evecs.conj().T


def expm_hermitian_batch(hams: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H_k dt) for a stack of Hermitian matrices, shape (N, d, d)."""
    evals, evecs = np.linalg.eigh(hams)
    phases = np.exp(-1.0j * dt * evals)
    return np.einsum("nij,nj,nkj->nik", evecs, phases, evecs.conj())


def su2_exp_batch(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """exp(-i (x X + y Y + z Z)) in closed form for arrays of coefficients.

    Returns shape x.shape + (2, 2). Exact for each element, so long block
    propagations avoid per-step eigensolves.
    """
    x = np.asarray(x, dtype=float)
    y = np.broadcast_to(np.asarray(y, dtype=float), x.shape)
    z = np.broadcast_to(np.asarray(z, dtype=float), x.shape)
    r = np.sqrt(x * x + y * y + z * z)
    cos_r = np.cos(r)
    # sin(r)/r with the r -> 0 limit handled explicitly
    small = r < 1e-30
    sinc = np.where(small, 1.0, np.sin(np.where(small, 1.0, r)) / np.where(small, 1.0, r))
    out = np.empty(x.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = cos_r - 1.0j * sinc * z
    out[..., 0, 1] = sinc * (-1.0j * x - y)
    out[..., 1, 0] = sinc * (-1.0j * x + y)
    out[..., 1, 1] = cos_r + 1.0j * sinc * z
    return out


def product_reduce(mats: np.ndarray) -> np.ndarray:
    """Ordered product M_{N-1} @ ... @ M_1 @ M_0 of a stack (..., N, d, d).

    Pairwise reduction: O(log N) batched matmul passes. Leading batch axes
    are preserved, the product runs over the second-to-last stack axis.
    """
    mats = np.asarray(mats)
    while mats.shape[-3] > 1:
        n = mats.shape[-3]
        if n % 2:
            tail = mats[..., -1:, :, :]
            body = mats[..., :-1, :, :]
        else:
            tail = None
            body = mats
        body = np.matmul(body[..., 1::2, :, :], body[..., 0::2, :, :])
        mats = body if tail is None else np.concatenate([body, tail], axis=-3)
    return mats[..., 0, :, :]


def propagate(hamiltonian_at: Callable[[float], np.ndarray], T: float, dt: float) -> np.ndarray:
    """Time-ordered propagator U(T) with the piecewise-constant midpoint rule.

    `dt` is a target step; the actual step is T/N with N = ceil(T/dt) so the
    final grid point lands exactly on T. Halving dt changes the result at
    O(dt^2).
    """
    if T <= 0 or dt <= 0:
        raise ValueError("propagate requires T > 0 and dt > 0")
    n_steps = max(1, int(np.ceil(T / dt - 1e-12)))
    step = T / n_steps
    mids = (np.arange(n_steps) + 0.5) * step
    hams = np.stack([np.asarray(hamiltonian_at(t), dtype=complex) for t in mids])
    return product_reduce(expm_hermitian_batch(hams, step))


def propagate_sampled(hams: np.ndarray, dt: float) -> np.ndarray:
    """Propagator from midpoint-sampled Hamiltonians, shape (N, d, d)."""
    return product_reduce(expm_hermitian_batch(hams, dt))


def propagate_converged(
    hamiltonian_at: Callable[[float], np.ndarray],
    T: float,
    n_start: int = 4000,
    tol: float = 1e-10,
    max_doublings: int = 10,
) -> np.ndarray:
    """Midpoint propagator with the step count doubled until converged.

    Doubling stops once the fidelity between successive refinements changes
    by less than `tol`.
    """
    u_prev = propagate(hamiltonian_at, T, T / n_start)
    n = n_start
    for _ in range(max_doublings):
        n *= 2
        u_next = propagate(hamiltonian_at, T, T / n)
        if 1.0 - gate_fidelity(u_prev, u_next) < tol:
            return u_next
        u_prev = u_next
    return u_prev


def gate_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Global-phase-invariant gate fidelity |Tr(U^dag V)|^2 / d^2."""
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    overlap = np.trace(u.conj().T @ v)
    return float(abs(overlap) ** 2 / d**2)
