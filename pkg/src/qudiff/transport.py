"""Diffusion coefficients and the checks tied to them.

The second moments obey d sigma/dt = M sigma + sigma M^T + 2 D with a
constant symmetric diffusion matrix D. Its entries are closed-form
functions of the relaxation coefficients and the bath temperature,
written against the equilibrium oscillator parameters m_k, omega_k.
With c_k = coth(omega_k / (2 T)) (hbar = k_B = 1):

  diagonal blocks
    D_qk qk = (lam_kk - mu_kk) c_k / (2 m_k w_k)
    D_pk pk = (m_k w_k / 2) (lam_kk + mu_kk) c_k
    D_qk pk = (1/4) (M_k W_k^2 / (m_k w_k) - m_k w_k / M_k) c_k

  cross blocks (k != j), arithmetic means of the two mode factors
    D_qk qj = (1/4) [ (lam_jk - mu_jk) c_k / (m_k w_k)
                    + (lam_kj - mu_kj) c_j / (m_j w_j) ]
    D_pk pj = (1/4) [ (lam_jk + mu_jk) m_j w_j c_j
                    + (lam_kj + mu_kj) m_k w_k c_k ]
    D_qk pj = (1/4) [ (eta_kj + nu_kj) c_k / (m_k w_k)
                    + (alpha_kj - kappa_kj) m_j w_j c_j ]

M_k, W_k are the dynamical mass and frequency magnitudes; barrier
modes enter D through their real frequency magnitude, never through
the flipped curvature sign. Setting j = k in the cross forms with the
diagonal identifications (lam, mu) -> (lam_kk, mu_kk), nu_kk -> M_k
W_k^2, kappa_kk -> 1/M_k, alpha_kk = eta_kk = 0 collapses them onto
the diagonal forms; tests rely on that reduction.

The stationarity residuals evaluated by `algebraic_residuals` are the
ten algebraic identities coupling D to the relaxation coefficients.
They vanish identically for the closed forms above, so their scaled
residuals measure implementation and floating-point error only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericalError
from .model import CheckResult, DissipationParams, SystemParams, ValidationReport
from .units import coth

__all__ = [
    "DiffusionMatrix",
    "diffusion_matrix",
    "fundamental_constraints",
    "EinsteinReport",
    "einstein_deviation",
    "ResidualReport",
    "algebraic_residuals",
]


@dataclass(frozen=True, eq=False)
class DiffusionMatrix:
    """Symmetric 2N x 2N diffusion matrix in interleaved (q1, p1, ...) order."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 != 0:
            raise ValueError("diffusion matrix must be square with even size")
        if not np.all(np.isfinite(m)):
            raise ValueError("diffusion matrix must be finite")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > 1e-12 * scale:
            raise ValueError("diffusion matrix must be symmetric")
        if np.any(np.diag(m) < 0.0):
            raise ValueError("diffusion matrix must have a non-negative diagonal")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2


# Entry-level closed forms. Split out so the reduction property
# (cross form at j = k equals the diagonal form) is testable directly.

def _d_qq_diag(lam_kk, mu_kk, mw, c):
    return (lam_kk - mu_kk) * c / (2.0 * mw)


def _d_pp_diag(lam_kk, mu_kk, mw, c):
    return 0.5 * mw * (lam_kk + mu_kk) * c


def _d_qp_diag(big_mw, big_m, mw, c):
    # big_mw = M_k W_k, big_m = M_k. Difference-of-squares form of
    # (M W^2 / (m w) - m w / M): exactly zero when the dynamical and
    # equilibrium parameters coincide as floats, which the delta
    # stationarity identity requires.
    return 0.25 * ((big_mw - mw) * (big_mw + mw) / (big_m * mw)) * c


def _d_qq_cross(lam_jk, mu_jk, lam_kj, mu_kj, mwk, mwj, ck, cj):
    return 0.25 * ((lam_jk - mu_jk) * ck / mwk + (lam_kj - mu_kj) * cj / mwj)


def _d_pp_cross(lam_jk, mu_jk, lam_kj, mu_kj, mwk, mwj, ck, cj):
    return 0.25 * ((lam_jk + mu_jk) * mwj * cj + (lam_kj + mu_kj) * mwk * ck)


def _d_qp_cross(eta_kj, nu_kj, alpha_kj, kappa_kj, mwk, mwj, ck, cj):
    return 0.25 * ((eta_kj + nu_kj) * ck / mwk + (alpha_kj - kappa_kj) * mwj * cj)


def diffusion_matrix(params: SystemParams, d: DissipationParams) -> DiffusionMatrix:
    """Assemble the 2N x 2N diffusion matrix from the closed forms."""
    if d.n_modes != params.n_modes:
        raise ValueError("dissipation and system mode counts differ")
    n = params.n_modes
    m = params.eq_mass
    w = params.eq_frequency
    t = d.temperature
    c = np.array([coth(w[k] / (2.0 * t)) for k in range(n)])
    mw = m * w

    out = np.zeros((2 * n, 2 * n))
    for k in range(n):
        out[2 * k, 2 * k] = _d_qq_diag(d.lam[k, k], params.mu[k, k], mw[k], c[k])
        out[2 * k + 1, 2 * k + 1] = _d_pp_diag(d.lam[k, k], params.mu[k, k], mw[k], c[k])
        qp = _d_qp_diag(params.mass[k] * params.frequency[k],
                        params.mass[k], mw[k], c[k])
        out[2 * k, 2 * k + 1] = qp
        out[2 * k + 1, 2 * k] = qp
    for k in range(n):
        for j in range(n):
            if j == k:
                continue
            out[2 * k, 2 * j] = _d_qq_cross(
                d.lam[j, k], params.mu[j, k], d.lam[k, j], params.mu[k, j],
                mw[k], mw[j], c[k], c[j])
            out[2 * k + 1, 2 * j + 1] = _d_pp_cross(
                d.lam[j, k], params.mu[j, k], d.lam[k, j], params.mu[k, j],
                mw[k], mw[j], c[k], c[j])
            qp = _d_qp_cross(
                d.eta[k, j], params.nu[k, j], d.alpha[k, j], params.kappa[k, j],
                mw[k], mw[j], c[k], c[j])
            out[2 * k, 2 * j + 1] = qp
            out[2 * j + 1, 2 * k] = qp
    return DiffusionMatrix(out)


def fundamental_constraints(diff: DiffusionMatrix, d: DissipationParams) -> ValidationReport:
    """Cauchy-Schwarz constraints linking D to the relaxation coefficients.

    For every ordered pair (k, j), including k = j:

        D_qkqk D_pjpj - D_qkpj^2 >= lam_kj^2 / 4
        D_qkqk D_qjqj - D_qkqj^2 >= alpha_kj^2 / 4
        D_pkpk D_pjpj - D_pkpj^2 >= eta_kj^2 / 4

    (hbar = 1), plus the structural requirement alpha_kk = eta_kk = 0.
    Violations mark the coefficient set as classical. Each row reports
    the margin (left side minus right side).
    """
    n = diff.n_modes
    if d.n_modes != n:
        raise ValueError("dissipation and diffusion mode counts differ")
    dm = diff.matrix
    checks: list[CheckResult] = []
    # Tiny negative slack absorbs roundoff in margins that are exactly zero.
    slack = 1e-15 * max(1.0, float(np.max(np.abs(dm))) ** 2)
    for k in range(n):
        for j in range(n):
            qq_k = dm[2 * k, 2 * k]
            qq_j = dm[2 * j, 2 * j]
            pp_k = dm[2 * k + 1, 2 * k + 1]
            pp_j = dm[2 * j + 1, 2 * j + 1]
            margin = qq_k * pp_j - dm[2 * k, 2 * j + 1] ** 2 - 0.25 * d.lam[k, j] ** 2
            checks.append(CheckResult(
                f"qp_constraint[{k},{j}]", margin >= -slack, float(margin), 0.0))
            margin = qq_k * qq_j - dm[2 * k, 2 * j] ** 2 - 0.25 * d.alpha[k, j] ** 2
            checks.append(CheckResult(
                f"qq_constraint[{k},{j}]", margin >= -slack, float(margin), 0.0))
            margin = pp_k * pp_j - dm[2 * k + 1, 2 * j + 1] ** 2 - 0.25 * d.eta[k, j] ** 2
            checks.append(CheckResult(
                f"pp_constraint[{k},{j}]", margin >= -slack, float(margin), 0.0))
    for k in range(n):
        checks.append(CheckResult(
            f"alpha_diag_zero[{k}]", d.alpha[k, k] == 0.0, float(d.alpha[k, k]), 0.0))
        checks.append(CheckResult(
            f"eta_diag_zero[{k}]", d.eta[k, k] == 0.0, float(d.eta[k, k]), 0.0))
    return ValidationReport(tuple(checks))


@dataclass(frozen=True)
class EinsteinReport:
    """High-temperature fluctuation-dissipation deviations.

    mode[k]:    |D_pkpk / ((lam_kk + mu_kk) m_k T) - 1|, None when the
                friction combination vanishes (relation undefined).
    pair[k][j]: |D_pkpj / (Lambda_kj (m_k + m_j) T / 2) - 1| with
                Lambda_kj = [(lam_jk + mu_jk) m_k + (lam_kj + mu_kj) m_j]
                / (m_k + m_j); None on the diagonal and when Lambda
                vanishes.
    """

    mode: tuple[Optional[float], ...]
    pair: tuple[tuple[Optional[float], ...], ...]

    @property
    def max_defined(self) -> Optional[float]:
        vals = [v for v in self.mode if v is not None]
        vals += [v for row in self.pair for v in row if v is not None]
        return max(vals) if vals else None

    @property
    def any_undefined(self) -> bool:
        if any(v is None for v in self.mode):
            return True
        return any(self.pair[k][j] is None
                   for k in range(len(self.pair))
                   for j in range(len(self.pair)) if j != k)


def einstein_deviation(params: SystemParams, d: DissipationParams) -> EinsteinReport:
    """Measure how far D sits from its classical high-temperature form."""
    n = params.n_modes
    dm = diffusion_matrix(params, d).matrix
    t = d.temperature
    m = params.eq_mass
    mode: list[Optional[float]] = []
    for k in range(n):
        denom = (d.lam[k, k] + params.mu[k, k]) * m[k] * t
        if denom == 0.0:
            mode.append(None)
        else:
            mode.append(abs(dm[2 * k + 1, 2 * k + 1] / denom - 1.0))
    pair: list[list[Optional[float]]] = [[None] * n for _ in range(n)]
    for k in range(n):
        for j in range(n):
            if j == k:
                continue
            big_lambda = ((d.lam[j, k] + params.mu[j, k]) * m[k]
                          + (d.lam[k, j] + params.mu[k, j]) * m[j]) / (m[k] + m[j])
            denom = big_lambda * 0.5 * (m[k] + m[j]) * t
            if denom == 0.0:
                pair[k][j] = None
            else:
                pair[k][j] = abs(dm[2 * k + 1, 2 * j + 1] / denom - 1.0)
    return EinsteinReport(tuple(mode), tuple(tuple(row) for row in pair))


@dataclass(frozen=True)
class ResidualReport:
    """Scaled residuals of the stationarity identities.

    Each equation's residual is |sum of terms| divided by the largest
    term magnitude (zero when every term vanishes). per_equation holds
    the worst case per equation family; max_scaled is the global worst.
    """

    per_equation: dict[str, float]

    @property
    def max_scaled(self) -> float:
        return max(self.per_equation.values()) if self.per_equation else 0.0

    def satisfied(self, tol: float = 1e-10) -> bool:
        return self.max_scaled <= tol


def _scaled_residual(terms: list[float]) -> float:
    for t in terms:
        if not math.isfinite(t):
            raise NumericalError(
                "stationarity residual evaluation overflowed; the thermal "
                "factors exceed the double range at this temperature")
    scale = max(abs(t) for t in terms)
    if scale == 0.0:
        return 0.0
    return abs(math.fsum(terms)) / scale


def algebraic_residuals(
    params: SystemParams,
    d: DissipationParams,
    diff: Optional[DiffusionMatrix] = None,
    beta: Optional[float] = None,
) -> ResidualReport:
    """Evaluate the ten stationarity identities tying D to lam, mu, nu, ....

    The identities come in three families: four per single mode, three
    per unordered pair on the (qq, pp) side, and three per ordered pair
    on the qp side. All are exact for the closed-form D, so the scaled
    residual floor is set by floating-point cancellation. beta defaults
    to 1/temperature.

    Each equation is expanded into monomial terms before summation.
    Bracketed combinations like (D_qq m w - D_pp / (m w)) cancel almost
    completely at large beta*w while the hyperbolic weight grows like
    exp(2 beta w); kept grouped, the scaled residual floor would grow
    the same way and no double-precision D could meet a fixed bound.
    Expanded, every term carries only relative rounding error and the
    floor stays near machine epsilon at any temperature.
    """
    n = params.n_modes
    if diff is None:
        diff = diffusion_matrix(params, d)
    dm = diff.matrix
    if beta is None:
        beta = 1.0 / d.temperature
    m = params.eq_mass
    w = params.eq_frequency
    lam, mu, nu, kap = d.lam, params.mu, params.nu, params.kappa
    alpha, eta = d.alpha, d.eta
    # Overflow to inf at extreme beta*w is expected; _scaled_residual
    # turns the resulting non-finite terms into NumericalError.
    with np.errstate(over="ignore", invalid="ignore"):
        a = beta * w
        ch = [float(v) for v in np.cosh(a)]
        sh = [float(v) for v in np.sinh(a)]
        ch2 = [float(v) for v in np.cosh(2.0 * a)]
        sh2 = [float(v) for v in np.sinh(2.0 * a)]
        shh2 = [float(v) for v in np.sinh(0.5 * a) ** 2]
    mw = [float(v) for v in m * w]

    worst: dict[str, float] = {}

    def update(key: str, terms: list[float]) -> None:
        r = _scaled_residual([float(t) for t in terms])
        # Record the family even when its worst residual is exactly zero.
        if key not in worst or r > worst[key]:
            worst[key] = r

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            dq = dm[2 * k, 2 * k]
            dp = dm[2 * k + 1, 2 * k + 1]
            dqp = dm[2 * k, 2 * k + 1]
            update("diag_eq1", [
                0.5 * mu[k, k] * (ch2[k] - 1.0),
                dq * mw[k] * sh[k] * ch[k],
                -(dp / mw[k]) * sh[k] * ch[k],
                (dp / mw[k]) * sh[k],
                -0.5 * (lam[k, k] - mu[k, k]) * (ch[k] + 1.0),
            ])
            update("diag_eq2", [
                (mu[k, k] / (2.0 * mw[k])) * sh2[k],
                dq * (ch[k] - 1.0) ** 2,
                (lam[k, k] / mw[k]) * sh[k],
                -(dp / mw[k] ** 2) * sh[k] ** 2,
            ])
            update("diag_eq3", [
                0.5 * mu[k, k] * mw[k] * sh2[k],
                -dp * (ch[k] - 1.0) ** 2,
                -lam[k, k] * mw[k] * sh[k],
                dq * mw[k] ** 2 * sh[k] ** 2,
            ])
            # Same difference-of-squares factor as _d_qp_diag, so delta
            # and the stored D_qp vanish together (exactly, when M = m
            # and W = w as floats) instead of leaving amplified noise.
            big_mw = params.mass[k] * params.frequency[k]
            delta = (-(big_mw - mw[k]) * (big_mw + mw[k])
                     / (2.0 * params.mass[k] * mw[k] * w[k]))
            update("diag_eq4", [
                0.25 * delta * (ch2[k] - 1.0),
                -(dqp / w[k]) * (1.0 - ch[k]) * sh[k],
            ])

        for k in range(n):
            for j in range(n):
                if j == k:
                    continue
                dqq = dm[2 * k, 2 * j]
                dpp = dm[2 * k + 1, 2 * j + 1]
                dqp_kj = dm[2 * k, 2 * j + 1]
                dqp_jk = dm[2 * j, 2 * k + 1]
                update("cross_eq1", [
                    2.0 * mw[j] * mw[k] * dqq * (ch[k] - 1.0) * (ch[j] - 1.0),
                    mw[j] * (lam[j, k] + mu[j, k] * ch[j]) * sh[k],
                    lam[k, j] * mw[k] * sh[j],
                    mu[k, j] * mw[k] * ch[k] * sh[j],
                    -2.0 * dpp * sh[k] * sh[j],
                ])
                update("cross_eq2", [
                    8.0 * dpp * shh2[k] * shh2[j],
                    mw[j] * (lam[j, k] - mu[j, k] * ch[k]) * sh[j],
                    mw[k] * (lam[k, j] - mu[k, j] * ch[j]) * sh[k],
                    -2.0 * mw[k] * mw[j] * dqq * sh[k] * sh[j],
                ])
                update("cross_eq3", [
                    (2.0 * dpp / mw[k]) * (ch[j] - 1.0) * sh[k],
                    -2.0 * mw[j] * dqq * (ch[k] - 1.0) * sh[j],
                    mu[k, j],
                    -lam[k, j] * ch[j],
                    ch[k] * lam[k, j],
                    -ch[k] * mu[k, j] * ch[j],
                    -mu[j, k] * (mw[j] / mw[k]) * sh[j] * sh[k],
                ])
                update("mixed_eq1", [
                    -2.0 * dqp_kj * (ch[k] - 1.0) * (ch[j] - 1.0),
                    ((-eta[k, j] + nu[k, j] * ch[j]) / mw[k]) * sh[k],
                    -mw[j] * (alpha[k, j] + kap[k, j] * ch[k]) * sh[j],
                    -2.0 * (mw[j] / mw[k]) * dqp_jk * sh[k] * sh[j],
                ])
                update("mixed_eq2", [
                    -2.0 * dqp_jk * (ch[k] - 1.0) * (ch[j] - 1.0),
                    -mw[k] * (-alpha[k, j] + kap[k, j] * ch[j]) * sh[k],
                    (eta[k, j] / mw[j]) * sh[j],
                    (nu[k, j] * ch[k] / mw[j]) * sh[j],
                    -(2.0 * mw[k] * dqp_kj / mw[j]) * sh[k] * sh[j],
                ])
                update("mixed_eq3", [
                    nu[k, j],
                    -eta[k, j] * ch[j],
                    -2.0 * mw[j] * dqp_jk * sh[j],
                    kap[k, j] * mw[k] * mw[j] * sh[k] * sh[j],
                    eta[k, j] * ch[k],
                    -nu[k, j] * ch[k] * ch[j],
                    2.0 * ch[k] * dqp_jk * mw[j] * sh[j],
                    2.0 * dqp_kj * mw[k] * (ch[j] - 1.0) * sh[k],
                ])

    return ResidualReport(worst)
