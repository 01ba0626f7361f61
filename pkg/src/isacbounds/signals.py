"""Noise-free received signal (mean vector) and its parameter Jacobian.

The observation model per frame is

    r[k] = mu[k](eta) + noise,      k = 0 .. n_slots * n_s - 1

where ``mu`` stacks the PRIs of one frame (plus, for differential frames, one
leading reference slot) and ``eta`` is the observation-domain parameter
vector laid out by :func:`isacbounds.model.eta_layout_for`: per-path arrival
times, one carrier phase per PRI and path, and per-path amplitudes.

Within a PRI the Doppler of a path only rotates the carrier; the envelope
distortion over a single PRI is negligible at the bandwidths considered, so
the path contribution in PRI ``kappa`` is

    amp_l * exp(j phi_l^kappa) * w(t - tau_l^kappa),
    phi_l^kappa = 2 pi (f_dl kappa t_f - f_c tau_l0)   [- xi_bpsk q_kappa].

PPM moves the data-PRI pulse by ``xi_ppm * q_kappa``; BPSK rotates it by
``xi_bpsk * q_kappa``.  Pilot PRIs are never modulated.  All bound-level
computations use the all-ones data word, which is also the default here.
"""

from __future__ import annotations

import numpy as np

from .model import (
    Decoupling,
    ModulationConfig,
    ParamLayout,
    ScenarioConfig,
    Scheme,
    ConfigError,
    eta_layout_for,
    pulse_time_derivative,
    sample_pulse,
    validate_modulation,
)

TWO_PI = 2.0 * np.pi


# =========================================================================
# Bits and phases
# =========================================================================


def bound_bits(scenario: ScenarioConfig, modulation: ModulationConfig) -> np.ndarray:
    """Default data word for bound evaluation: 1 on data PRIs, 0 elsewhere."""
    bits = np.zeros(scenario.n_f, dtype=np.int64)
    if modulation.scheme == Scheme.SENSING:
        return bits
    if modulation.decoupling == Decoupling.PILOT:
        bits[modulation.p_pilots:] = 1
    else:
        bits[:] = 1
    return bits


def _check_bits(scenario: ScenarioConfig, modulation: ModulationConfig,
                bits: np.ndarray | None) -> np.ndarray:
    if bits is None:
        return bound_bits(scenario, modulation)
    bits = np.asarray(bits)
    if bits.shape != (scenario.n_f,):
        raise ConfigError(
            f"bits must have one entry per PRI (n_f = {scenario.n_f}), "
            f"got shape {bits.shape}"
        )
    if np.any((bits != 0) & (bits != 1)):
        raise ConfigError("bits must be binary")
    bits = bits.astype(np.int64)
    if modulation.scheme == Scheme.SENSING and np.any(bits != 0):
        raise ConfigError("sensing-only frames carry no data bits")
    if modulation.decoupling == Decoupling.PILOT and np.any(bits[:modulation.p_pilots] != 0):
        raise ConfigError("pilot PRIs are unmodulated; their bits must be 0")
    return bits


def phase_values(scenario: ScenarioConfig, modulation: ModulationConfig,
                 bits: np.ndarray | None = None) -> np.ndarray:
    """Carrier phase phi_l^kappa in radians, shape (n_f, L).

    phi_l^kappa = 2 pi (f_dl * kappa * t_f - f_c * tau_l0), with the BPSK data
    rotation -xi_bpsk * q_kappa added on data PRIs.
    """
    bits = _check_bits(scenario, modulation, bits)
    kappa = np.arange(scenario.n_f)[:, None]
    f_d = np.array([p.f_dl for p in scenario.paths])[None, :]
    tau0 = np.array([p.tau_l0 for p in scenario.paths])[None, :]
    phi = TWO_PI * (f_d * kappa * scenario.t_f - scenario.f_c * tau0)
    if modulation.scheme == Scheme.BPSK:
        phi = phi - modulation.xi_bpsk * bits[:, None]
    return phi


def phase_sequence(scenario: ScenarioConfig, modulation: ModulationConfig,
                   bits: np.ndarray | None = None) -> np.ndarray:
    """Complex carrier rotations exp(j phi_l^kappa), shape (n_f, L)."""
    return np.exp(1j * phase_values(scenario, modulation, bits))


def pri_delays(scenario: ScenarioConfig, modulation: ModulationConfig,
               bits: np.ndarray | None = None) -> np.ndarray:
    """Pulse position of each path in each PRI, shape (n_f, L).

    tau_l^kappa = tau_l0 + xi_ppm * q_kappa for PPM data PRIs, tau_l0 otherwise.
    """
    bits = _check_bits(scenario, modulation, bits)
    tau0 = np.array([p.tau_l0 for p in scenario.paths])[None, :]
    tau = np.broadcast_to(tau0, (scenario.n_f, scenario.n_paths)).copy()
    if modulation.scheme == Scheme.PPM:
        tau = tau + modulation.xi_ppm * bits[:, None].astype(float)
    return tau


def _ref_phases(scenario: ScenarioConfig) -> np.ndarray:
    """Carrier phase of the differential reference (start-frame) pulse."""
    return -TWO_PI * scenario.f_c * np.array([p.tau_l0 for p in scenario.paths])


def n_slots(scenario: ScenarioConfig, modulation: ModulationConfig) -> int:
    """PRI slots in the stacked frame (n_f, +1 for the differential reference)."""
    if modulation.decoupling == Decoupling.DIFFERENTIAL:
        return scenario.n_f + 1
    return scenario.n_f


# =========================================================================
# Mean vector
# =========================================================================


def mean_vector(scenario: ScenarioConfig, modulation: ModulationConfig,
                bits: np.ndarray | None = None) -> np.ndarray:
    """Noise-free stacked frame mean, complex ndarray of length n_slots * n_s.

    Slot ``kappa`` (or ``kappa + 1`` for differential frames, whose slot 0 is
    the unmodulated reference pulse) holds the sum over paths of the carrier-
    rotated, amplitude-scaled pulse at that PRI's path positions.
    """
    validate_modulation(scenario, modulation)
    bits = _check_bits(scenario, modulation, bits)
    phi = phase_values(scenario, modulation, bits)
    tau = pri_delays(scenario, modulation, bits)
    amps = np.array([p.amp for p in scenario.paths])

    slots = n_slots(scenario, modulation)
    ns = scenario.n_s
    mu = np.zeros(slots * ns, dtype=complex)
    offset = 0
    if modulation.decoupling == Decoupling.DIFFERENTIAL:
        rot = np.exp(1j * _ref_phases(scenario))
        for l, p in enumerate(scenario.paths):
            mu[:ns] += amps[l] * rot[l] * sample_pulse(scenario.pulse, p.tau_l0, scenario)
        offset = 1
    for k in range(scenario.n_f):
        seg = slice((k + offset) * ns, (k + offset + 1) * ns)
        for l in range(scenario.n_paths):
            w = sample_pulse(scenario.pulse, tau[k, l], scenario)
            mu[seg] += amps[l] * np.exp(1j * phi[k, l]) * w
    return mu


# =========================================================================
# Observation-domain parameterization (operating point and mean model)
# =========================================================================


def eta_point(scenario: ScenarioConfig, modulation: ModulationConfig) -> np.ndarray:
    """Operating value of eta at the all-ones data word, matching eta_layout_for.

    For the unsplit schemes the per-path arrival time absorbs the (common)
    PPM data shift; for the pilot split the pilot and data arrival times are
    separate entries; for differential frames the reference time and each
    data-PRI arrival time are separate entries.
    """
    layout = eta_layout_for(scenario, modulation)
    bits = bound_bits(scenario, modulation)
    phi = phase_values(scenario, modulation, bits)
    tau = pri_delays(scenario, modulation, bits)
    tau0 = np.array([p.tau_l0 for p in scenario.paths])
    amps = np.array([p.amp for p in scenario.paths])

    eta = np.zeros(layout.size)
    if modulation.decoupling == Decoupling.PILOT and modulation.scheme != Scheme.SENSING:
        eta[layout.block_slice("tau_p")] = tau0
        # data arrival time (same for every data PRI at the all-ones word)
        shift = modulation.xi_ppm if modulation.scheme == Scheme.PPM else 0.0
        eta[layout.block_slice("tau_d")] = tau0 + shift
        eta[layout.block_slice("amp_p")] = amps
        eta[layout.block_slice("amp_d")] = amps
    elif modulation.decoupling == Decoupling.DIFFERENTIAL:
        eta[layout.block_slice("t_ref")] = tau0
        for k in range(scenario.n_f):
            eta[layout.block_slice(f"t_{k}")] = tau[k]
        eta[layout.block_slice("amp")] = amps
    else:
        eta[layout.block_slice("tau")] = tau[0]
        eta[layout.block_slice("amp")] = amps
    for k in range(scenario.n_f):
        eta[layout.block_slice(f"phi_{k}")] = phi[k]
    return eta


def mean_from_eta(scenario: ScenarioConfig, modulation: ModulationConfig,
                  eta: np.ndarray, layout: ParamLayout | None = None) -> np.ndarray:
    """Mean vector as a function of eta (used by the finite-difference probe).

    ``mean_from_eta(scenario, modulation, eta_point(...))`` equals
    ``mean_vector(scenario, modulation)`` at the all-ones data word.
    """
    if layout is None:
        layout = eta_layout_for(scenario, modulation)
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (layout.size,):
        raise ConfigError(f"eta must have shape ({layout.size},), got {eta.shape}")

    L = scenario.n_paths
    ns = scenario.n_s
    slots = n_slots(scenario, modulation)
    mu = np.zeros(slots * ns, dtype=complex)

    def add(slot: int, tau_l: float, phi_l: float, amp_l: float) -> None:
        w = sample_pulse(scenario.pulse, tau_l, scenario)
        mu[slot * ns:(slot + 1) * ns] += amp_l * np.exp(1j * phi_l) * w

    if modulation.decoupling == Decoupling.PILOT and modulation.scheme != Scheme.SENSING:
        tau_p = eta[layout.block_slice("tau_p")]
        tau_d = eta[layout.block_slice("tau_d")]
        amp_p = eta[layout.block_slice("amp_p")]
        amp_d = eta[layout.block_slice("amp_d")]
        for k in range(scenario.n_f):
            phi = eta[layout.block_slice(f"phi_{k}")]
            pilot = k < modulation.p_pilots
            for l in range(L):
                add(k, (tau_p if pilot else tau_d)[l], phi[l],
                    (amp_p if pilot else amp_d)[l])
    elif modulation.decoupling == Decoupling.DIFFERENTIAL:
        t_ref = eta[layout.block_slice("t_ref")]
        amps = eta[layout.block_slice("amp")]
        ref_phi = _ref_phases(scenario)
        ref_amp = np.array([p.amp for p in scenario.paths])  # known, not in eta
        for l in range(L):
            add(0, t_ref[l], ref_phi[l], ref_amp[l])
        for k in range(scenario.n_f):
            t_k = eta[layout.block_slice(f"t_{k}")]
            phi = eta[layout.block_slice(f"phi_{k}")]
            for l in range(L):
                add(k + 1, t_k[l], phi[l], amps[l])
    else:
        tau = eta[layout.block_slice("tau")]
        amps = eta[layout.block_slice("amp")]
        for k in range(scenario.n_f):
            phi = eta[layout.block_slice(f"phi_{k}")]
            for l in range(L):
                add(k, tau[l], phi[l], amps[l])
    return mu


# =========================================================================
# Analytic mean Jacobian
# =========================================================================


def mean_jacobian(scenario: ScenarioConfig, modulation: ModulationConfig) -> np.ndarray:
    """Analytic d mu / d eta at the all-ones operating point.

    Returns
    -------
    ndarray, shape (n_slots * n_s, layout.size), complex
        Column ``i`` is the derivative of the stacked mean with respect to
        eta entry ``i`` of :func:`isacbounds.model.eta_layout_for`.  Phase
        columns are ``j *`` (the slot's path contribution); arrival-time
        columns use the analytic pulse derivative.
    """
    layout = eta_layout_for(scenario, modulation)
    bits = bound_bits(scenario, modulation)
    phi = phase_values(scenario, modulation, bits)
    tau = pri_delays(scenario, modulation, bits)
    amps = np.array([p.amp for p in scenario.paths])

    L = scenario.n_paths
    ns = scenario.n_s
    slots = n_slots(scenario, modulation)
    J = np.zeros((slots * ns, layout.size), dtype=complex)
    diff = modulation.decoupling == Decoupling.DIFFERENTIAL
    offset = 1 if diff else 0

    # per-PRI contributions (phase / amplitude / arrival-time columns)
    for k in range(scenario.n_f):
        seg = slice((k + offset) * ns, (k + offset + 1) * ns)
        phi_lo = layout.block(f"phi_{k}")[0]
        for l in range(L):
            rot = amps[l] * np.exp(1j * phi[k, l])
            w = sample_pulse(scenario.pulse, tau[k, l], scenario)
            dw = pulse_time_derivative(scenario.pulse, tau[k, l], scenario)
            J[seg, phi_lo + l] = 1j * rot * w
            if modulation.decoupling == Decoupling.PILOT and modulation.scheme != Scheme.SENSING:
                pilot = k < modulation.p_pilots
                tau_blk = "tau_p" if pilot else "tau_d"
                amp_blk = "amp_p" if pilot else "amp_d"
                J[seg, layout.block(tau_blk)[0] + l] = rot * dw
                J[seg, layout.block(amp_blk)[0] + l] = np.exp(1j * phi[k, l]) * w
            elif diff:
                J[seg, layout.block(f"t_{k}")[0] + l] = rot * dw
                J[seg, layout.block("amp")[0] + l] = np.exp(1j * phi[k, l]) * w
            else:
                J[seg, layout.block("tau")[0] + l] = rot * dw
                J[seg, layout.block("amp")[0] + l] = np.exp(1j * phi[k, l]) * w

    # differential reference slot: arrival-time column only (amplitude known)
    if diff:
        ref_phi = _ref_phases(scenario)
        for l, p in enumerate(scenario.paths):
            dw = pulse_time_derivative(scenario.pulse, p.tau_l0, scenario)
            J[:ns, layout.block("t_ref")[0] + l] = amps[l] * np.exp(1j * ref_phi[l]) * dw
    return J
