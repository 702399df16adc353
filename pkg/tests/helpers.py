"""Independent oracles for the test suite.

Both routes here deliberately avoid the machinery used by the package:
the classical cycle is integrated with an adaptive Runge-Kutta stepper
instead of elliptic functions, and the quantum period is built from a
split-operator scheme on the angle grid instead of the tridiagonal
eigenbasis.  Keep them dumb and slow; their only job is to disagree
loudly when the fast implementations drift.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

TWO_PI = 2.0 * np.pi

# sub-steps per pulse segment for the split-operator route; the Strang
# error at this resolution sits near 2e-9 for K up to 280, well under
# the 1e-8 comparison tolerance
SPLIT_SUBSTEPS = 8000


def circular_distance(a, b):
    """Shortest angular distance between a and b."""
    d = np.mod(np.asarray(a) - np.asarray(b) + np.pi, TWO_PI) - np.pi
    return np.abs(d)


def classical_cycle_oracle(phi, p, cfg, rtol=1e-12, atol=1e-12):
    """One kick cycle by direct integration of the pendulum segments.

    All states are stacked into a single ODE system, so the adaptive
    step is controlled by the worst-behaved member of the batch.
    """
    phi = np.atleast_1d(np.asarray(phi, dtype=float)).copy()
    p = np.atleast_1d(np.asarray(p, dtype=float)).copy()
    n = phi.size
    K = cfg.K

    def rhs(t, y):
        return np.concatenate((y[n:], -K * np.sin(y[:n])))

    def pulse(w):
        nonlocal phi, p
        sol = solve_ivp(rhs, (0.0, w), np.concatenate((phi, p)),
                        method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise RuntimeError(f"oracle integration failed: {sol.message}")
        phi = sol.y[:n, -1].copy()
        p = sol.y[n:, -1].copy()

    def drift(w):
        nonlocal phi
        phi = phi + p * w

    half = cfg.alpha / 2.0
    pulse(half)
    drift(cfg.delta - half)
    pulse(half)
    drift(1.0 - cfg.delta - half)
    return np.mod(phi, TWO_PI), p


def split_operator_period(psi, cfg, basis, substeps=SPLIT_SUBSTEPS):
    """One kick cycle of a ladder-order state via Strang splitting.

    Works on the periodic angle grid, which matches the truncated-ladder
    propagator only when the state carries no weight near the edge
    indices; callers must use packets narrow enough for that.  Only the
    q = 0 ladder is supported.
    """
    if basis.q != 0.0:
        raise ValueError("oracle only handles q = 0")
    N = basis.size
    hbar = basis.hbar
    n_fft = np.fft.ifftshift(np.arange(N) - N // 2)
    kin = 0.5 * hbar * n_fft.astype(float)**2
    phi_grid = TWO_PI * np.arange(N) / N
    cosphi = np.cos(phi_grid)

    c = np.fft.ifftshift(np.asarray(psi, dtype=complex))

    def free(w):
        nonlocal c
        c = np.exp(-1j * kin * w) * c

    def pulse(w):
        nonlocal c
        dt = w / substeps
        kick_full = np.exp(1j * cfg.K * cosphi * dt / hbar)
        free(0.5 * dt)
        for step in range(substeps):
            c = np.fft.fft(kick_full * np.fft.ifft(c))
            if step < substeps - 1:
                free(dt)
        free(0.5 * dt)

    half = cfg.alpha / 2.0
    pulse(half)
    free(cfg.delta - half)
    pulse(half)
    free(1.0 - cfg.delta - half)
    return np.fft.fftshift(c)


def narrow_packet(basis, center, width, seed):
    """Normalized ladder packet with random phases, for oracle runs.

    width 5 keeps the edge amplitude near exp(-41), far below the
    tolerance at which the periodic grid and the truncated ladder
    disagree.
    """
    rng = np.random.default_rng(seed)
    n = basis.indices
    amp = np.exp(-(n - center)**2 / (4.0 * width**2))
    psi = amp * np.exp(2j * np.pi * rng.random(basis.size))
    return psi / np.linalg.norm(psi)
