"""Parameter sets for the coupled-mode model and their validity checks.

The system is N collective modes with dimensionless coordinates q_k and
conjugate momenta p_k (units of hbar). The Hamiltonian part is

    H = sum_k [ p_k^2 / (2 M_k) + s_k M_k Omega_k^2 q_k^2 / 2 ]
        + (1/2) sum_{k != j} [ nu_kj q_k q_j + kappa_kj p_k p_j ]
        + sum_{k,j} mu_kj p_k q_j

with s_k = +1 for an oscillator mode and s_k = -1 for an inverted
barrier mode (curvature sign flipped, frequency kept as the real
magnitude). The Markovian dissipator is parameterized by a relaxation
matrix lambda, antisymmetric cross couplings alpha (momentum side) and
eta (coordinate side), and a bath temperature T. The bath statistics
are referenced to an equilibrium oscillator system with parameters
(eq_mass, eq_frequency), which default to the dynamical ones.

Everything here is in internal units (hbar = k_B = 1, energy MeV).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationFailure
from .units import unit_convert  # re-exported: part of this module's API

__all__ = [
    "SystemParams",
    "DissipationParams",
    "CheckResult",
    "ValidationReport",
    "validate_hamiltonian",
    "validate_dissipation",
    "unit_convert",
    "OSCILLATOR",
    "INVERTED_BARRIER",
]

OSCILLATOR = "oscillator"
INVERTED_BARRIER = "inverted_barrier"

_SYM_TOL = 1e-12


def _as_vector(x, n: int, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    return a


def _as_matrix(x, n: int, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.shape != (n, n):
        raise ValueError(f"{name} must have shape ({n}, {n}), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    return a


def _check_symmetric_hollow(a: np.ndarray, name: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > _SYM_TOL * scale:
        raise ValueError(f"{name} must be symmetric")
    if np.max(np.abs(np.diag(a))) > _SYM_TOL * scale:
        raise ValueError(f"{name} must have zero diagonal")
    out = 0.5 * (a + a.T)
    np.fill_diagonal(out, 0.0)
    return out


def _check_antisymmetric(a: np.ndarray, name: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a + a.T)) > _SYM_TOL * scale:
        raise ValueError(f"{name} must be antisymmetric")
    out = 0.5 * (a - a.T)
    np.fill_diagonal(out, 0.0)
    return out


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SystemParams:
    """Hamiltonian-side parameters of the N-mode system.

    mass, frequency:        dynamical M_k (hbar^2/MeV) and Omega_k (MeV).
    eq_mass, eq_frequency:  equilibrium oscillator parameters m_k, omega_k
                            entering the bath statistics; default to the
                            dynamical values.
    mu:                     p-q coupling matrix (MeV), no symmetry imposed.
    nu, kappa:              q-q and p-p coupling matrices, symmetric with
                            zero diagonal.
    mode_kind:              per-mode "oscillator" or "inverted_barrier".
    """

    n_modes: int
    mass: np.ndarray
    frequency: np.ndarray
    eq_mass: Optional[np.ndarray] = None
    eq_frequency: Optional[np.ndarray] = None
    mu: Optional[np.ndarray] = None
    nu: Optional[np.ndarray] = None
    kappa: Optional[np.ndarray] = None
    mode_kind: Optional[Sequence[str]] = None

    def __post_init__(self):
        n = self.n_modes
        if not isinstance(n, int) or n < 1:
            raise ValueError("n_modes must be a positive integer")
        mass = _as_vector(self.mass, n, "mass")
        freq = _as_vector(self.frequency, n, "frequency")
        if np.any(mass <= 0.0):
            raise ValueError("mass entries must be positive")
        if np.any(freq <= 0.0):
            raise ValueError("frequency entries must be positive")
        eqm = mass.copy() if self.eq_mass is None else _as_vector(self.eq_mass, n, "eq_mass")
        eqf = freq.copy() if self.eq_frequency is None else _as_vector(
            self.eq_frequency, n, "eq_frequency")
        if np.any(eqm <= 0.0):
            raise ValueError("eq_mass entries must be positive")
        if np.any(eqf <= 0.0):
            raise ValueError("eq_frequency entries must be positive")
        mu = np.zeros((n, n)) if self.mu is None else _as_matrix(self.mu, n, "mu")
        nu = np.zeros((n, n)) if self.nu is None else _check_symmetric_hollow(
            _as_matrix(self.nu, n, "nu"), "nu")
        kap = np.zeros((n, n)) if self.kappa is None else _check_symmetric_hollow(
            _as_matrix(self.kappa, n, "kappa"), "kappa")
        kinds = tuple(self.mode_kind) if self.mode_kind is not None else (OSCILLATOR,) * n
        if len(kinds) != n:
            raise ValueError(f"mode_kind must list {n} entries")
        for k in kinds:
            if k not in (OSCILLATOR, INVERTED_BARRIER):
                raise ValueError(f"unknown mode kind {k!r}")
        object.__setattr__(self, "mass", _freeze(mass))
        object.__setattr__(self, "frequency", _freeze(freq))
        object.__setattr__(self, "eq_mass", _freeze(eqm))
        object.__setattr__(self, "eq_frequency", _freeze(eqf))
        object.__setattr__(self, "mu", _freeze(mu))
        object.__setattr__(self, "nu", _freeze(nu))
        object.__setattr__(self, "kappa", _freeze(kap))
        object.__setattr__(self, "mode_kind", kinds)

    @property
    def barrier_modes(self) -> tuple[int, ...]:
        return tuple(k for k, kind in enumerate(self.mode_kind) if kind == INVERTED_BARRIER)

    def curvature_signs(self) -> np.ndarray:
        """+1 for oscillator modes, -1 for inverted barrier modes."""
        return np.array([1.0 if k == OSCILLATOR else -1.0 for k in self.mode_kind])

    def permuted(self, perm: Sequence[int]) -> "SystemParams":
        """Relabel modes by the permutation perm (new index -> old index)."""
        p = list(perm)
        idx = np.asarray(p)
        return SystemParams(
            n_modes=self.n_modes,
            mass=self.mass[idx],
            frequency=self.frequency[idx],
            eq_mass=self.eq_mass[idx],
            eq_frequency=self.eq_frequency[idx],
            mu=self.mu[np.ix_(idx, idx)],
            nu=self.nu[np.ix_(idx, idx)],
            kappa=self.kappa[np.ix_(idx, idx)],
            mode_kind=[self.mode_kind[i] for i in p],
        )


@dataclass(frozen=True, eq=False)
class DissipationParams:
    """Dissipator-side parameters.

    lam:          relaxation matrix (MeV); diagonal entries are the
                  per-mode friction coefficients, off-diagonal entries
                  couple modes dissipatively. No symmetry is imposed.
    alpha, eta:   antisymmetric cross-dissipation matrices.
    temperature:  bath temperature in MeV, strictly positive. Values
                  at or below 1e-6 MeV behave as the zero-temperature
                  limit (all thermal factors saturate exactly).
    """

    lam: np.ndarray
    alpha: np.ndarray
    eta: np.ndarray
    temperature: float

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
            raise ValueError("lam must be a square matrix")
        n = lam.shape[0]
        lam = _as_matrix(lam, n, "lam")
        alpha = _check_antisymmetric(_as_matrix(self.alpha, n, "alpha"), "alpha")
        eta = _check_antisymmetric(_as_matrix(self.eta, n, "eta"), "eta")
        t = float(self.temperature)
        if not np.isfinite(t) or t <= 0.0:
            raise ValueError("temperature must be positive and finite")
        object.__setattr__(self, "lam", _freeze(lam))
        object.__setattr__(self, "alpha", _freeze(alpha))
        object.__setattr__(self, "eta", _freeze(eta))
        object.__setattr__(self, "temperature", t)

    @property
    def n_modes(self) -> int:
        return self.lam.shape[0]

    def permuted(self, perm: Sequence[int]) -> "DissipationParams":
        idx = np.asarray(list(perm))
        return DissipationParams(
            lam=self.lam[np.ix_(idx, idx)],
            alpha=self.alpha[np.ix_(idx, idx)],
            eta=self.eta[np.ix_(idx, idx)],
            temperature=self.temperature,
        )


@dataclass(frozen=True)
class CheckResult:
    """One validation check: a measured value against its bound."""

    name: str
    passed: bool
    measured: float
    bound: float
    note: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        s = f"{tag} {self.name}: measured={self.measured:.6g} bound={self.bound:.6g}"
        if self.note:
            s += f" ({self.note})"
        return s


@dataclass(frozen=True)
class ValidationReport:
    """A list of check rows plus free-text notes.

    The verdict is the conjunction of all rows; notes never affect it.
    """

    checks: tuple[CheckResult, ...]
    notes: tuple[str, ...] = ()

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [c.line() for c in self.checks]
        out.extend(f"NOTE {n}" for n in self.notes)
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines())

    def merged(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.checks + other.checks, self.notes + other.notes)


def _min_eig_check(mat: np.ndarray, name: str, note: str = "") -> CheckResult:
    # Definiteness is judged against a scaled eigenvalue floor so that
    # near-degenerate but physical systems are not rejected on roundoff.
    evals = np.linalg.eigvalsh(mat)
    scale = float(np.max(np.abs(evals))) if evals.size else 0.0
    tol = 1e-12 * scale
    min_eig = float(evals[0]) if evals.size else 0.0
    return CheckResult(name, min_eig > tol, min_eig, tol, note)


def validate_hamiltonian(params: SystemParams) -> ValidationReport:
    """Check definiteness of the kinetic and potential quadratic forms.

    The kinetic form (1/M_k on the diagonal, kappa off it) must be
    positive definite for all modes. The potential form (M_k Omega_k^2
    diagonal, nu off it) must be positive definite on the oscillator
    sector only; inverted barrier modes are excluded from that check
    since their curvature is negative by construction.
    """
    n = params.n_modes
    checks: list[CheckResult] = []
    notes: list[str] = []

    kin = params.kappa.copy()
    np.fill_diagonal(kin, 1.0 / params.mass)
    checks.append(_min_eig_check(kin, "kinetic_form_positive_definite"))

    osc = [k for k in range(n) if params.mode_kind[k] == OSCILLATOR]
    if osc:
        pot = params.nu[np.ix_(osc, osc)].copy()
        np.fill_diagonal(pot, params.mass[osc] * params.frequency[osc] ** 2)
        note = ""
        if len(osc) < n:
            excluded = [k for k in range(n) if k not in osc]
            note = f"barrier modes {excluded} excluded"
        checks.append(_min_eig_check(pot, "potential_form_positive_definite", note))
    else:
        checks.append(CheckResult(
            "potential_form_positive_definite", True, 0.0, 0.0,
            "no oscillator sector; all modes are barriers"))
    if params.barrier_modes:
        notes.append(
            f"modes {list(params.barrier_modes)} are inverted barriers; their "
            "potential curvature is negative by construction and not checked")
    return ValidationReport(tuple(checks), tuple(notes))


def _xi(params: SystemParams, d: DissipationParams, k: int, j: int) -> float:
    # Cross-coupling strength entering the friction bound, evaluated
    # with the geometric pairing sqrt(m_k omega_k m_j omega_j).
    s = float(np.sqrt(params.eq_mass[k] * params.eq_frequency[k]
                      * params.eq_mass[j] * params.eq_frequency[j]))
    return 0.5 * abs((d.eta[k, j] + params.nu[k, j]) / s
                     + (d.alpha[k, j] - params.kappa[k, j]) * s)


def validate_dissipation(params: SystemParams, d: DissipationParams) -> ValidationReport:
    """Check the dissipative coefficients against their positivity bounds.

    Per mode, the relaxation diagonal must be non-negative. Per pair,
    the friction strength must dominate the cross couplings:

        sqrt(lam_kk lam_jj - (m_k w_k / (m_j w_j)) lam_kj^2) >= xi

    with xi = max over both orientations of
    (1/2) |(eta_kj + nu_kj)/sqrt(m_k w_k m_j w_j)
           + (alpha_kj - kappa_kj) sqrt(m_k w_k m_j w_j)|.

    The bound is derived for mu = 0; pairs touched by a nonzero mu are
    reported as unchecked. m, w are the equilibrium parameters.
    """
    if d.n_modes != params.n_modes:
        raise ValueError("dissipation and system mode counts differ")
    n = params.n_modes
    checks: list[CheckResult] = []
    notes: list[str] = []

    checks.append(CheckResult(
        "temperature_positive", d.temperature > 0.0, d.temperature, 0.0))
    for k in range(n):
        checks.append(CheckResult(
            f"relaxation_nonnegative[{k}]", d.lam[k, k] >= 0.0, float(d.lam[k, k]), 0.0))

    any_cross = False
    for k in range(n):
        for j in range(k + 1, n):
            mu_touched = any(params.mu[a, b] != 0.0
                             for a in (k, j) for b in (k, j))
            if mu_touched:
                notes.append(
                    f"pair ({k},{j}): friction bound is derived for mu = 0 "
                    "and was not evaluated")
                continue
            if (params.nu[k, j] != 0.0 or params.kappa[k, j] != 0.0
                    or d.alpha[k, j] != 0.0 or d.eta[k, j] != 0.0
                    or d.lam[k, j] != 0.0 or d.lam[j, k] != 0.0):
                any_cross = True
            mkwk = params.eq_mass[k] * params.eq_frequency[k]
            mjwj = params.eq_mass[j] * params.eq_frequency[j]
            if d.lam[k, j] != d.lam[j, k]:
                notes.append(
                    f"pair ({k},{j}): lam is asymmetric; the bound uses "
                    f"lam[{k},{j}]^2")
            disc = (d.lam[k, k] * d.lam[j, j]
                    - (mkwk / mjwj) * d.lam[k, j] ** 2)
            xi = max(_xi(params, d, k, j), _xi(params, d, j, k))
            if disc < 0.0:
                checks.append(CheckResult(
                    f"cross_coupling_bound[{k},{j}]", False, disc, 0.0,
                    "friction discriminant negative"))
            else:
                checks.append(CheckResult(
                    f"cross_coupling_bound[{k},{j}]",
                    bool(np.sqrt(disc) >= xi), float(np.sqrt(disc)), xi))
    if any_cross:
        notes.append(
            "cross-coupling bound evaluated with the geometric frequency "
            "pairing sqrt(m_k w_k m_j w_j); the mode-local pairing "
            "sqrt(m_k m_j) w_k is inconsistent with the zero-temperature "
            "Cauchy-Schwarz limit and is not used")
    return ValidationReport(tuple(checks), tuple(notes))


def require_valid(params: SystemParams, d: DissipationParams) -> None:
    """Raise ValidationFailure if either validation report fails."""
    report = validate_hamiltonian(params).merged(validate_dissipation(params, d))
    if not report.verdict:
        failed = [c.name for c in report.checks if not c.passed]
        raise ValidationFailure("validation failed: " + ", ".join(failed))
