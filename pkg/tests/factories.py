"""Random valid parameter sets for property tests.

Draws are rejection-sampled through the package's own validation gate,
so every returned set is one the CLI would accept. Coupling scales are
chosen conservatively so acceptance is near total, and temperatures
keep w / 2T below 8 so thermal factors stay far from the double range;
tests that probe extreme regimes construct those cases explicitly.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from qudiff import DissipationParams, MomentState, SystemParams
from qudiff.model import require_valid


def random_system_dissipation(
    rng: np.random.Generator,
    n: Optional[int] = None,
    *,
    distinct_eq: bool = False,
    with_mu: bool = True,
    max_tries: int = 200,
) -> tuple[SystemParams, DissipationParams]:
    """Draw one (SystemParams, DissipationParams) pair passing validation."""
    for _ in range(max_tries):
        nn = int(rng.integers(1, 4)) if n is None else n
        mass = rng.uniform(0.5, 500.0, nn)
        freq = rng.uniform(0.5, 5.0, nn)
        eq_mass = mass * rng.uniform(0.7, 1.4, nn) if distinct_eq else None
        eq_freq = freq * rng.uniform(0.7, 1.4, nn) if distinct_eq else None
        emass = mass if eq_mass is None else eq_mass
        efreq = freq if eq_freq is None else eq_freq
        mw = emass * efreq

        lam_diag = rng.uniform(0.3, 4.0, nn)
        lam = np.diag(lam_diag).copy()
        mu = np.zeros((nn, nn))
        if with_mu:
            for k in range(nn):
                # D_qq and D_pp need |mu_kk| < lam_kk to stay non-negative.
                mu[k, k] = rng.uniform(-0.9, 0.9) * lam_diag[k]
        nu = np.zeros((nn, nn))
        kap = np.zeros((nn, nn))
        alpha = np.zeros((nn, nn))
        eta = np.zeros((nn, nn))
        for k in range(nn):
            for j in range(k + 1, nn):
                s = float(np.sqrt(mw[k] * mw[j]))
                g = float(np.sqrt(lam_diag[k] * lam_diag[j]))
                lam[k, j] = lam[j, k] = (
                    0.2 * g * min(1.0, float(np.sqrt(mw[j] / mw[k])))
                    * rng.uniform(-1.0, 1.0))
                nu[k, j] = nu[j, k] = (
                    0.05 * s * min(g, float(np.sqrt(freq[k] * freq[j])))
                    * rng.uniform(-1.0, 1.0))
                # kappa must also keep the kinetic form definite.
                kscale = 0.05 * min(g / s, 1.0 / float(np.sqrt(mass[k] * mass[j])))
                kap[k, j] = kap[j, k] = kscale * rng.uniform(-1.0, 1.0)
                a = 0.05 * g / s * rng.uniform(-1.0, 1.0)
                alpha[k, j], alpha[j, k] = a, -a
                e = 0.05 * g * s * rng.uniform(-1.0, 1.0)
                eta[k, j], eta[j, k] = e, -e
        half_bw = rng.uniform(0.5, 8.0)  # w / 2T at the stiffest mode
        temperature = float(np.max(efreq)) / (2.0 * half_bw)

        try:
            system = SystemParams(
                n_modes=nn, mass=mass, frequency=freq,
                eq_mass=eq_mass, eq_frequency=eq_freq,
                mu=mu, nu=nu, kappa=kap)
            dissipation = DissipationParams(
                lam=lam, alpha=alpha, eta=eta, temperature=temperature)
            require_valid(system, dissipation)
        except Exception:
            continue
        return system, dissipation
    raise AssertionError("factory failed to draw a valid parameter set")


def random_state(rng: np.random.Generator, n: int) -> MomentState:
    """A moment state with a full (all-entry) positive definite covariance."""
    a = 0.5 * rng.normal(size=(2 * n, 2 * n))
    cov = a @ a.T + 0.2 * np.eye(2 * n)
    mean = rng.uniform(-3.0, 3.0, 2 * n)
    return MomentState(mean=mean, cov=cov)
