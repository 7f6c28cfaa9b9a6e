"""Observables of the Gaussian state.

A MomentState fully determines the phase-space quasi-distribution

    W(x) = (2 pi)^{-N} det(sigma)^{-1/2}
           exp(-(x - mean)^T sigma^{-1} (x - mean) / 2)

on the 2N-dimensional interleaved vector x = (q1, p1, ..., qN, pN).
Mode k occupies components (2k, 2k+1), zero-based. Coordinate
marginals are Gaussians over the selected q sub-block; no quadrature
is ever performed here. hbar = k_B = 1 throughout.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import NumericalError
from .dynamics import MomentState
from .model import DissipationParams, SystemParams
from .units import coth

__all__ = [
    "GaussianState",
    "q_index",
    "p_index",
    "wigner_eval",
    "position_density",
    "penetration_probability",
    "uncertainty_products",
    "correlation_coefficient",
    "gibbs_targets",
    "asymptotic_energy",
    "mean_energy",
]

# The state type consumed here is exactly the dynamics moment state.
GaussianState = MomentState


def q_index(k: int) -> int:
    """Index of coordinate q_k in the interleaved state vector (k zero-based)."""
    return 2 * k


def p_index(k: int) -> int:
    """Index of momentum p_k in the interleaved state vector (k zero-based)."""
    return 2 * k + 1


def wigner_eval(state: GaussianState, points: np.ndarray) -> np.ndarray:
    """Evaluate the phase-space distribution at points of shape (..., 2N)."""
    pts = np.asarray(points, dtype=float)
    n2 = state.mean.size
    if pts.shape[-1] != n2:
        raise ValueError(f"points must have last dimension {n2}")
    sign, logdet = np.linalg.slogdet(state.cov)
    if sign <= 0.0:
        raise NumericalError("covariance matrix is not positive definite")
    diff = pts - state.mean
    flat = diff.reshape(-1, n2)
    solved = np.linalg.solve(state.cov, flat.T).T
    quad = np.einsum("ij,ij->i", flat, solved)
    norm = math.exp(-0.5 * logdet) / (2.0 * math.pi) ** (n2 // 2)
    return (norm * np.exp(-0.5 * quad)).reshape(pts.shape[:-1])


def position_density(
    state: GaussianState, modes: Sequence[int], points: np.ndarray
) -> np.ndarray:
    """Joint coordinate density of the selected modes at points (..., s).

    The marginal over any coordinate subset is again Gaussian, with
    mean and covariance read off the corresponding q sub-block, so the
    density is evaluated analytically.
    """
    idx = [q_index(k) for k in modes]
    s = len(idx)
    if s == 0:
        raise ValueError("modes must select at least one coordinate")
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != s:
        raise ValueError(f"points must have last dimension {s}")
    mu = state.mean[idx]
    sub = state.cov[np.ix_(idx, idx)]
    sign, logdet = np.linalg.slogdet(sub)
    if sign <= 0.0:
        raise NumericalError("coordinate covariance block is not positive definite")
    diff = pts.reshape(-1, s) - mu
    solved = np.linalg.solve(sub, diff.T).T
    quad = np.einsum("ij,ij->i", diff, solved)
    norm = math.exp(-0.5 * logdet) / (2.0 * math.pi) ** (s / 2.0)
    return (norm * np.exp(-0.5 * quad)).reshape(pts.shape[:-1])


def penetration_probability(state: GaussianState, mode: int) -> float:
    """Probability that coordinate q_mode lies past the barrier top at 0.

    P = erfc(-mean_q / sqrt(2 sigma_qq)) / 2. The complementary error
    function underflows to exactly 0 beyond its double range (tail
    mass below 1e-300), which is the documented clamping behavior.
    """
    q = q_index(mode)
    var = state.cov[q, q]
    if var <= 0.0:
        raise NumericalError("coordinate variance must be positive")
    return 0.5 * math.erfc(-state.mean[q] / math.sqrt(2.0 * var))


def uncertainty_products(state: GaussianState) -> np.ndarray:
    """Per-mode invariant sigma_qq sigma_pp - sigma_qp^2 (units hbar^2)."""
    n = state.n_modes
    out = np.empty(n)
    for k in range(n):
        q, p = q_index(k), p_index(k)
        out[k] = state.cov[q, q] * state.cov[p, p] - state.cov[q, p] ** 2
    return out


def correlation_coefficient(state: GaussianState, i: int, j: int) -> float:
    """Coordinate correlation chi_ij = sigma_qiqj / sqrt(sigma_qiqi sigma_qjqj)."""
    qi, qj = q_index(i), q_index(j)
    denom = math.sqrt(state.cov[qi, qi] * state.cov[qj, qj])
    if denom == 0.0:
        raise NumericalError("coordinate variances must be positive")
    return float(state.cov[qi, qj] / denom)


def gibbs_targets(params: SystemParams, d: DissipationParams) -> tuple[np.ndarray, np.ndarray]:
    """Thermal-state variances of the equilibrium oscillator system.

    Returns (sigma_qq, sigma_pp) per mode:
        sigma_qq = coth(w_k / 2T) / (2 m_k w_k)
        sigma_pp = (m_k w_k / 2) coth(w_k / 2T)
    """
    m = params.eq_mass
    w = params.eq_frequency
    c = np.array([coth(w[k] / (2.0 * d.temperature)) for k in range(params.n_modes)])
    return c / (2.0 * m * w), 0.5 * m * w * c


def asymptotic_energy(params: SystemParams, d: DissipationParams) -> float:
    """Mean energy of the thermal asymptote, sum_k (w_k/2) coth(w_k/2T).

    Only defined when every mode is an oscillator; a barrier mode has
    no thermal asymptote and raises ValueError.
    """
    if params.barrier_modes:
        raise ValueError(
            f"asymptotic energy undefined: modes {list(params.barrier_modes)} "
            "are inverted barriers")
    t = d.temperature
    return float(sum(0.5 * w * coth(w / (2.0 * t)) for w in params.eq_frequency))


def mean_energy(params: SystemParams, state: GaussianState) -> float:
    """Expectation of the system Hamiltonian in the Gaussian state.

    Quadratic expectations split into covariance plus mean products;
    the mixed p q terms use the symmetrized covariance entry, matching
    the Weyl-ordered operator (p q + q p) / 2.
    """
    if state.n_modes != params.n_modes:
        raise ValueError("state and system mode counts differ")
    n = params.n_modes
    mean, cov = state.mean, state.cov
    signs = params.curvature_signs()
    total = 0.0
    for k in range(n):
        q, p = q_index(k), p_index(k)
        q2 = cov[q, q] + mean[q] ** 2
        p2 = cov[p, p] + mean[p] ** 2
        total += p2 / (2.0 * params.mass[k])
        total += signs[k] * 0.5 * params.mass[k] * params.frequency[k] ** 2 * q2
    for k in range(n):
        for j in range(n):
            pq = cov[q_index(j), p_index(k)] + mean[p_index(k)] * mean[q_index(j)]
            total += params.mu[k, j] * pq
            if j == k:
                continue
            qq = cov[q_index(k), q_index(j)] + mean[q_index(k)] * mean[q_index(j)]
            pp = cov[p_index(k), p_index(j)] + mean[p_index(k)] * mean[p_index(j)]
            total += 0.5 * (params.nu[k, j] * qq + params.kappa[k, j] * pp)
    return float(total)
