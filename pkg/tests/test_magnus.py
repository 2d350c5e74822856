"""Susceptibility integrals against the brute-force Magnus oracle."""

import numpy as np
import pytest

from conftest import random_curve
from geodesic_gates.curves import CurveParams, curve_grid, synthesize_waveform
from geodesic_gates.frames import SystemConfig, dressing
from geodesic_gates.linalg import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    expm_hermitian,
    max_abs,
    su2_exp_batch,
)
from geodesic_gates.magnus import (
    CHANNEL_COUPLING,
    CHANNEL_CROSSTALK,
    CHANNEL_FREQ,
    ChannelWeights,
    channel_costs,
    crosstalk_amplitudes,
    crosstalk_block,
    magnus_oracle,
    robust_cost,
    susceptibility_beta,
    susceptibility_beta0,
)
from geodesic_gates.optimizer import preset_curve

RX90 = expm_hermitian(SIGMA_X, np.pi / 4.0)


_ORACLE_SAMPLES = 262144


def cumulative_propagators(wave, beta, n):
    """U0 at n+1 uniform grid points for the block (beta Z + Omega X)/2.

    Fourth-order Magnus steps on Gauss nodes, so the remaining oracle error
    is the trapezoid quadrature of the integrand plus the sampled-waveform
    representation, both far below the 1e-5 comparison tolerance.
    """
    dt = wave.T / n
    t0 = np.arange(n) * dt
    gauss = 0.5 * np.sqrt(3.0) / 3.0
    om1 = wave.envelope(t0 + (0.5 - gauss) * dt)
    om2 = wave.envelope(t0 + (0.5 + gauss) * dt)
    x = 0.25 * (om1 + om2) * dt
    y = -np.sqrt(3.0) / 24.0 * dt * dt * beta * (om2 - om1)
    steps = su2_exp_batch(x, y, np.full(n, 0.5 * beta * dt))
    out = np.empty((n + 1, 2, 2), dtype=complex)
    out[0] = np.eye(2)
    acc = np.eye(2, dtype=complex)
    for k in range(n):
        acc = steps[k] @ acc
        out[k + 1] = acc
    return out


def oracle_beta_components(params, beta, n=131072):
    """Brute-force (A_X, A_Y, A_Z) in the geometric frame, chi units."""
    wave = synthesize_waveform(params, beta, n_samples=_ORACLE_SAMPLES,
                               grid_points=_ORACLE_SAMPLES)
    us = cumulative_propagators(wave, beta, n)
    integrand = np.einsum("nji,jk,nkl->nil", us.conj(), SIGMA_Z, us)
    a_true = np.trapezoid(integrand, dx=wave.T / n, axis=0)
    a_geo = RX90.conj().T @ a_true @ RX90
    return np.array([np.trace(p @ a_geo).real / 2.0 for p in (SIGMA_X, SIGMA_Y, SIGMA_Z)]) * abs(beta)


def oracle_beta0_components(params, beta, n=131072):
    wave = synthesize_waveform(params, beta, n_samples=_ORACLE_SAMPLES,
                               grid_points=_ORACLE_SAMPLES)
    us = cumulative_propagators(wave, 0.0, n)
    integrand = np.einsum("nji,jk,nkl->nil", us.conj(), SIGMA_Z, us)
    a_true = np.trapezoid(integrand, dx=wave.T / n, axis=0)
    return (np.trace(SIGMA_Y @ a_true).real / 2.0 * abs(beta),
            np.trace(SIGMA_Z @ a_true).real / 2.0 * abs(beta))


def oracle_crosstalk_block(params, delta_tilde, beta, n=131072):
    """Upper-right block of int U0^dag dH U0 dt for the 2-block model."""
    wave = synthesize_waveform(params, beta, n_samples=_ORACLE_SAMPLES,
                               grid_points=_ORACLE_SAMPLES)
    us_beta = cumulative_propagators(wave, beta, n)
    us_zero = cumulative_propagators(wave, 0.0, n)
    times = np.arange(n + 1) * (wave.T / n)
    weight = wave.envelope(times) * np.exp(-1j * delta_tilde * times)
    integrand = weight[:, None, None] * np.einsum(
        "nji,jk,nkl->nil", us_beta.conj(), SIGMA_Z, us_zero)
    h = wave.T / n
    base = np.trapezoid(integrand, dx=h, axis=0)
    d_start = (-3.0 * integrand[0] + 4.0 * integrand[1] - integrand[2]) / (2.0 * h)
    d_end = (3.0 * integrand[-1] - 4.0 * integrand[-2] + integrand[-3]) / (2.0 * h)
    return base - h * h / 12.0 * (d_end - d_start)


def test_beta_susceptibility_flat_curve():
    p = CurveParams(a=0.0, phi_target=0.0)  # theta = pi/2, phi = 0 everywhere
    ax, ay, az = susceptibility_beta(p)
    assert abs(ax) < 1e-12
    assert abs(ay - 4.0 * np.pi) < 1e-10
    assert abs(az) < 1e-12


def test_beta0_susceptibility_offset_phase():
    p = CurveParams(a=0.0, phi_target=0.0)
    ay0, az0 = susceptibility_beta0(p, delta_theta=np.pi)
    assert abs(az0 + 4.0 * np.pi) < 1e-10
    assert abs(ay0) < 1e-10


def test_beta0_running_area_closes_with_zero_area():
    # at zero enclosed area S(4 pi) = 0, linking the beta = 0 and beta != 0 ends
    from geodesic_gates.curves import solve_b1_zero_area

    a = -1.0 / (32.0 * np.pi**2)
    p = CurveParams(a=a, b1=solve_b1_zero_area(a), phi_target=np.pi)
    grid = curve_grid(p)
    assert abs(grid.S[-1]) < 1e-10


def test_crosstalk_zero_drive_vanishes():
    p = CurveParams(a=0.0, phi_target=0.0)
    ct1, ct2 = crosstalk_amplitudes(p, delta_tilde=-20.0, beta=1.0)
    assert abs(ct1) < 1e-12
    assert abs(ct2) < 1e-12


def test_crosstalk_rotating_phase_averaging():
    p = preset_curve("xpi-2q-robust")
    small = crosstalk_amplitudes(p, delta_tilde=-20.0, beta=0.5)
    large = crosstalk_amplitudes(p, delta_tilde=-200.0, beta=0.5)
    assert abs(large[0]) < abs(small[0])
    assert abs(large[1]) < abs(small[1])
    with pytest.raises(ValueError):
        crosstalk_amplitudes(p, delta_tilde=-20.0, beta=0.0)


def test_magnus_oracle_trivial_cases():
    zero = magnus_oracle(lambda t: np.eye(2, dtype=complex),
                         lambda t: np.zeros((2, 2), dtype=complex), 3.0, 0.01)
    assert max_abs(zero) < 1e-14
    const = magnus_oracle(lambda t: np.eye(2, dtype=complex),
                          lambda t: SIGMA_Z.astype(complex), 3.0, 0.01)
    assert max_abs(const - 3.0 * SIGMA_Z) < 1e-12
    assert max_abs(const - const.conj().T) < 1e-12


def test_beta_block_matches_oracle():
    rng = np.random.default_rng(41)
    for _ in range(3):
        p = random_curve(rng)
        analytic = np.array(susceptibility_beta(p))
        oracle = oracle_beta_components(p, beta=0.7)
        assert np.max(np.abs(analytic - oracle)) / np.linalg.norm(oracle) < 1e-5


def test_beta0_block_matches_oracle():
    rng = np.random.default_rng(42)
    for _ in range(3):
        p = random_curve(rng)
        analytic = np.array(susceptibility_beta0(p))
        oracle = np.array(oracle_beta0_components(p, beta=0.7))
        assert np.max(np.abs(analytic - oracle)) / max(np.linalg.norm(oracle), 1.0) < 1e-5


def test_crosstalk_block_matches_oracle():
    rng = np.random.default_rng(43)
    for _ in range(2):
        p = random_curve(rng)
        delta_tilde = -np.sqrt(20.0**2 + 1.0)
        analytic = crosstalk_block(p, delta_tilde, beta=1.0)
        oracle = oracle_crosstalk_block(p, delta_tilde, beta=1.0)
        assert max_abs(analytic - oracle) / max(max_abs(oracle), 1e-6) < 1e-4


def test_crosstalk_amplitudes_recovered_from_oracle_block():
    # the frozen bookkeeping: O' = R_X(pi/2)^dag O, elementary integrals from
    # the [[p, q*], [q, -p*]] structure, then phases exp(+-i pi/4)
    p = preset_curve("xpi-2q-robust")
    delta_tilde = -np.sqrt(401.0)
    ct1, ct2 = crosstalk_amplitudes(p, delta_tilde, beta=0.5)
    oracle = oracle_crosstalk_block(p, delta_tilde, beta=0.5)
    o_geo = RX90.conj().T @ oracle
    i_p, j_q, i_q, j_p = o_geo[0, 0], o_geo[0, 1], o_geo[1, 0], -o_geo[1, 1]
    c1 = 0.5 * (i_p + j_p)
    s1 = (i_p - j_p) / 2j
    c2 = -0.5 * (i_q + j_q)
    s2 = (i_q - j_q) / 2j
    ct1_oracle = np.exp(1j * np.pi / 4.0) * (np.conj(c1) + 1j * np.conj(s2))
    ct2_oracle = np.exp(-1j * np.pi / 4.0) * (np.conj(c2) - 1j * np.conj(s1))
    assert abs(ct1 - ct1_oracle) < 1e-5
    assert abs(ct2 - ct2_oracle) < 1e-5


def test_robust_cost_zero_weights():
    cfg = SystemConfig(n_qubits=2, delta=20.0)
    frame = dressing(cfg)
    p = preset_curve("xpi-2q-robust")
    weights = ChannelWeights(freq=0.0, coupling=0.0, crosstalk=0.0)
    assert robust_cost(p, cfg, frame, weights) == 0.0


def test_case1_channel_equivalence():
    # midpoint drive: frequency and coupling noise share the same integral
    cfg = SystemConfig(n_qubits=2, delta=20.0)
    frame = dressing(cfg)
    rng = np.random.default_rng(44)
    for _ in range(5):
        costs = channel_costs(random_curve(rng), cfg, frame)
        assert abs(costs[CHANNEL_FREQ] - costs[CHANNEL_COUPLING]) < 1e-9


def test_case2_one_way_implication():
    # resonant drive: coupling noise lives on the detuned block only, so
    # killing the frequency channel kills it too; the converse fails
    cfg = SystemConfig(n_qubits=2, delta=20.0, drive_choice="resonant_lower")
    frame = dressing(cfg)
    rng = np.random.default_rng(45)
    for _ in range(5):
        p = random_curve(rng)
        costs = channel_costs(p, cfg, frame)
        beta_norm_sq = float(np.dot(susceptibility_beta(p), susceptibility_beta(p)))
        scale = 1.0 / frame.design_beta**2
        # structural identity: coupling = 4 * |A_beta|^2, freq = |A_beta|^2 + |A_0|^2
        assert abs(costs[CHANNEL_COUPLING] - 4.0 * beta_norm_sq * scale) < 1e-9
        assert costs[CHANNEL_FREQ] >= beta_norm_sq * scale - 1e-12
    # counterexample to the converse: a curve whose detuned-block integral is
    # (almost) zero while the resonant block stays noisy
    p = preset_curve("xpi-2q-robust")
    costs = channel_costs(p, cfg, frame)
    assert costs[CHANNEL_COUPLING] < 1e-5
    assert costs[CHANNEL_FREQ] > 0.1


def test_robust_cost_preset_ordering():
    cfg = SystemConfig(n_qubits=2, delta=20.0)
    frame = dressing(cfg)
    robust = robust_cost(preset_curve("xpi-2q-robust"), cfg, frame)
    plain = robust_cost(preset_curve("xpi-2q-nonrobust"), cfg, frame)
    assert robust < 1e-2 * plain


def test_robust_preset_susceptibility_collapse():
    # the published robust rows shrink |(A_X, A_Y, A_Z)| by >= 100x
    robust = np.linalg.norm(susceptibility_beta(preset_curve("xpi-2q-robust")))
    plain = np.linalg.norm(susceptibility_beta(preset_curve("xpi-2q-nonrobust")))
    assert robust * 100.0 < plain


def test_crosstalk_channel_ordering_two_qubit():
    # at the susceptibility level the robust row is also less sensitive to
    # control crosstalk (the full dynamic floor at Delta = 20 J is dominated
    # by higher-order terms instead; see the audit notes)
    cfg = SystemConfig(n_qubits=2, delta=20.0)
    frame = dressing(cfg)
    robust = channel_costs(preset_curve("xpi-2q-robust"), cfg, frame)[CHANNEL_CROSSTALK]
    plain = channel_costs(preset_curve("xpi-2q-nonrobust"), cfg, frame)[CHANNEL_CROSSTALK]
    assert robust < plain


def test_three_qubit_robust_cost_ordering():
    cfg = SystemConfig(n_qubits=3, delta=20.0, drive_choice="center")
    frame = dressing(cfg)
    robust = robust_cost(preset_curve("xpi-3q-robust"), cfg, frame)
    plain = robust_cost(preset_curve("xpi-3q-nonrobust"), cfg, frame)
    assert robust < plain


def test_full_susceptibility_record():
    from geodesic_gates.magnus import full_susceptibility

    cfg = SystemConfig(n_qubits=2, delta=20.0)
    frame = dressing(cfg)
    p = preset_curve("xpi-2q-robust")
    record = full_susceptibility(p, frame.delta_tilde, frame.design_beta)
    assert np.allclose((record.ax, record.ay, record.az), susceptibility_beta(p))
    assert np.isfinite([record.ay0, record.az0]).all()
    assert record.channel == "freq_noise"
