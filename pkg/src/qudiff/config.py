"""Scenario configuration: the TOML schema and sweep handling.

A scenario file is flat TOML with explicit unit tags in every key
name. Physical quantities are converted to internal units on load;
nothing downstream ever sees a tagged unit again.

    name = "demo"

    [system]
    n_modes = 2
    mass_hbar2_per_MeV = [461.6344, 461.6344]
    hbar_omega_MeV = [2.9468, 2.9288]
    mode_kind = ["oscillator", "oscillator"]   # optional
    nu_MeV = [[0.0, -1869.0], [-1869.0, 0.0]]  # optional, symmetric
    kappa_per_MeV_s2 = [[0.0, 0.0], [0.0, 0.0]]  # optional, symmetric
    mu_MeV = [[0.0, 0.0], [0.0, 0.0]]          # optional
    # eq_mass_hbar2_per_MeV, hbar_eq_omega_MeV optional, default dynamical

    [dissipation]
    hbar_lambda_MeV = [[2.0, 0.0], [0.0, 2.0]]
    alpha_per_MeV_s2 = [[0.0, 0.0], [0.0, 0.0]]  # optional, antisymmetric
    hbar_eta_MeV = [[0.0, 0.0], [0.0, 0.0]]      # optional, antisymmetric
    temperature_MeV = 5.0

    [initial]
    mean_q = [0.0, 0.0]
    mean_p_hbar = [0.0, 0.0]
    sigma_qq = [1e-4, 1e-3]
    sigma_pp_hbar2 = [2500.0, 250.0]
    sigma_qp_hbar = [0.0, 0.0]                 # optional

    [run]
    t_end_seconds = 2e-22
    grid_points = 2000                         # optional
    density_times_seconds = [0.0]              # optional (tunnel frames)
    density_points = 101                       # optional

    [sweep]                                    # optional
    param = "nu_12"
    values = [3000.0, -1869.0, -3000.0]

Sweep parameters are named field_KJ with one-based mode indices
(nu_12, kappa_12, alpha_12, eta_12, lambda_11, lambda_12, mu_12),
plus lambda_diag (every diagonal entry) and temperature. Values are
given in the same physical units as the corresponding config key.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .dynamics import MomentState
from .errors import ConfigError, ValidationFailure
from .model import DissipationParams, SystemParams
from .units import unit_convert

__all__ = ["ScenarioConfig", "load_config", "apply_parameter", "sweep_members"]

_SWEEP_RE = re.compile(r"^(nu|kappa|alpha|eta|lambda|mu)_([1-9])([1-9])$")


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully resolved run description, all values internal units."""

    name: str
    system: SystemParams
    dissipation: DissipationParams
    initial: MomentState
    t_end_seconds: float
    grid_points: int = 2000
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] = ()
    density_times_seconds: tuple[float, ...] = ()
    density_points: int = 101
    description: str = ""

    def __post_init__(self):
        if not np.isfinite(self.t_end_seconds) or self.t_end_seconds <= 0.0:
            raise ConfigError("t_end_seconds must be positive")
        if self.grid_points < 2:
            raise ConfigError("grid_points must be at least 2")
        if self.density_points < 2:
            raise ConfigError("density_points must be at least 2")
        if self.sweep_param is not None:
            _check_sweep_param(self.sweep_param, self.system.n_modes)
            if not self.sweep_values:
                raise ConfigError("sweep values must be non-empty")
        # Below-minimum uncertainty is physically suspect but not fatal:
        # warn and continue.
        for k in range(self.initial.n_modes):
            qq = self.initial.cov[2 * k, 2 * k]
            pp = self.initial.cov[2 * k + 1, 2 * k + 1]
            qp = self.initial.cov[2 * k, 2 * k + 1]
            u = qq * pp - qp * qp
            if u < 0.25 - 1e-12:
                warnings.warn(
                    f"initial uncertainty product of mode {k} is {u:.6g}, "
                    "below the minimum 1/4 (hbar^2 units)",
                    stacklevel=2)

    def time_grid_internal(self) -> np.ndarray:
        """Uniform grid 0 .. t_end in internal units (MeV^-1)."""
        t_end = unit_convert(self.t_end_seconds, "seconds")
        return np.linspace(0.0, t_end, self.grid_points)


def _check_sweep_param(name: str, n: int) -> None:
    if name in ("temperature", "lambda_diag"):
        return
    m = _SWEEP_RE.match(name)
    if m is None:
        raise ConfigError(
            f"unknown sweep parameter {name!r}; expected temperature, "
            "lambda_diag, or field_KJ like nu_12")
    k, j = int(m.group(2)), int(m.group(3))
    if k > n or j > n:
        raise ConfigError(f"sweep parameter {name!r} indexes mode beyond n_modes={n}")
    field = m.group(1)
    if field in ("nu", "kappa", "alpha", "eta") and k == j:
        raise ConfigError(f"sweep parameter {name!r} must couple two distinct modes")


def apply_parameter(
    system: SystemParams,
    dissipation: DissipationParams,
    name: str,
    value: float,
) -> tuple[SystemParams, DissipationParams]:
    """Return copies with one named parameter replaced.

    The value is in the physical units of the matching config key
    (kappa and alpha in 1/(MeV s^2), everything else MeV). Symmetry is
    preserved: nu/kappa set both (k,j) entries, alpha/eta set (k,j)
    and -(j,k), lambda_kj with k != j sets both entries.
    """
    n = system.n_modes
    _check_sweep_param(name, n)
    if name == "temperature":
        if value <= 0.0:
            raise ValidationFailure("swept temperature must be positive")
        return system, DissipationParams(
            lam=dissipation.lam, alpha=dissipation.alpha, eta=dissipation.eta,
            temperature=float(value))
    if name == "lambda_diag":
        lam = np.array(dissipation.lam)
        np.fill_diagonal(lam, float(value))
        return system, DissipationParams(
            lam=lam, alpha=dissipation.alpha, eta=dissipation.eta,
            temperature=dissipation.temperature)
    m = _SWEEP_RE.match(name)
    assert m is not None
    field, k, j = m.group(1), int(m.group(2)) - 1, int(m.group(3)) - 1
    if field == "nu":
        nu = np.array(system.nu)
        nu[k, j] = nu[j, k] = float(value)
        return _replace_system(system, nu=nu), dissipation
    if field == "kappa":
        kap = np.array(system.kappa)
        kap[k, j] = kap[j, k] = unit_convert(float(value), "1/(MeV s^2)")
        return _replace_system(system, kappa=kap), dissipation
    if field == "mu":
        mu = np.array(system.mu)
        mu[k, j] = float(value)
        return _replace_system(system, mu=mu), dissipation
    if field == "alpha":
        a = np.array(dissipation.alpha)
        v = unit_convert(float(value), "1/(MeV s^2)")
        a[k, j], a[j, k] = v, -v
        return system, DissipationParams(
            lam=dissipation.lam, alpha=a, eta=dissipation.eta,
            temperature=dissipation.temperature)
    if field == "eta":
        e = np.array(dissipation.eta)
        e[k, j], e[j, k] = float(value), -float(value)
        return system, DissipationParams(
            lam=dissipation.lam, alpha=dissipation.alpha, eta=e,
            temperature=dissipation.temperature)
    # field == "lambda"
    lam = np.array(dissipation.lam)
    lam[k, j] = float(value)
    if k != j:
        lam[j, k] = float(value)
    return system, DissipationParams(
        lam=lam, alpha=dissipation.alpha, eta=dissipation.eta,
        temperature=dissipation.temperature)


def _replace_system(system: SystemParams, **kw) -> SystemParams:
    base = dict(
        n_modes=system.n_modes, mass=system.mass, frequency=system.frequency,
        eq_mass=system.eq_mass, eq_frequency=system.eq_frequency,
        mu=system.mu, nu=system.nu, kappa=system.kappa, mode_kind=system.mode_kind)
    base.update(kw)
    return SystemParams(**base)


def sweep_members(cfg: ScenarioConfig):
    """Yield (tag, system, dissipation) for each run the config describes.

    A config without a sweep yields a single member with tag None.
    """
    if cfg.sweep_param is None:
        yield None, cfg.system, cfg.dissipation
        return
    for value in cfg.sweep_values:
        system, dissipation = apply_parameter(
            cfg.system, cfg.dissipation, cfg.sweep_param, value)
        yield f"{cfg.sweep_param}_{_format_value(value)}", system, dissipation


def _format_value(v: float) -> str:
    s = repr(float(v))
    return (s.replace("-", "m").replace("+", "").replace(".", "p"))


# --- TOML loading ---

_SYSTEM_KEYS = {
    "n_modes", "mass_hbar2_per_MeV", "hbar_omega_MeV", "eq_mass_hbar2_per_MeV",
    "hbar_eq_omega_MeV", "mode_kind", "nu_MeV", "kappa_per_MeV_s2", "mu_MeV",
}
_DISSIPATION_KEYS = {
    "hbar_lambda_MeV", "alpha_per_MeV_s2", "hbar_eta_MeV", "temperature_MeV",
}
_INITIAL_KEYS = {
    "mean_q", "mean_p_hbar", "sigma_qq", "sigma_pp_hbar2", "sigma_qp_hbar",
    "covariance",
}
_RUN_KEYS = {"t_end_seconds", "grid_points", "density_times_seconds", "density_points"}
_SWEEP_KEYS = {"param", "values"}


def _require(table: dict, section: str, key: str):
    if key not in table:
        raise ConfigError(f"[{section}] is missing required key {key!r}")
    return table[key]


def _reject_unknown(table: dict, section: str, allowed: set) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"[{section}] has unknown key {key!r}")


def _vector(x, n: int, section: str, key: str) -> np.ndarray:
    if (not isinstance(x, list) or len(x) != n
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
        raise ConfigError(f"[{section}].{key} must be an array of {n} numbers")
    return np.array([float(v) for v in x])


def _matrix_cfg(x, n: int, section: str, key: str) -> np.ndarray:
    if not isinstance(x, list) or len(x) != n:
        raise ConfigError(f"[{section}].{key} must be a {n}x{n} nested array")
    return np.vstack([_vector(row, n, section, key) for row in x])


def _scalar(x, section: str, key: str) -> float:
    if not isinstance(x, (int, float)) or isinstance(x, bool):
        raise ConfigError(f"[{section}].{key} must be a number")
    return float(x)


def load_config(path: str) -> ScenarioConfig:
    """Parse a TOML scenario file into a ScenarioConfig (internal units)."""
    try:
        with open(path, "rb") as fh:
            try:
                raw = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    try:
        return _build_config(raw, path)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _build_config(raw: dict, path: str) -> ScenarioConfig:
    for section in raw:
        if section not in ("name", "description", "system", "dissipation",
                           "initial", "run", "sweep"):
            raise ConfigError(f"unknown section [{section}]")
    sys_t = raw.get("system")
    if not isinstance(sys_t, dict):
        raise ConfigError("missing [system] section")
    dis_t = raw.get("dissipation")
    if not isinstance(dis_t, dict):
        raise ConfigError("missing [dissipation] section")
    ini_t = raw.get("initial")
    if not isinstance(ini_t, dict):
        raise ConfigError("missing [initial] section")
    run_t = raw.get("run")
    if not isinstance(run_t, dict):
        raise ConfigError("missing [run] section")
    _reject_unknown(sys_t, "system", _SYSTEM_KEYS)
    _reject_unknown(dis_t, "dissipation", _DISSIPATION_KEYS)
    _reject_unknown(ini_t, "initial", _INITIAL_KEYS)
    _reject_unknown(run_t, "run", _RUN_KEYS)

    n = sys_t.get("n_modes")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError("[system].n_modes must be a positive integer")

    mass = _vector(_require(sys_t, "system", "mass_hbar2_per_MeV"), n, "system",
                   "mass_hbar2_per_MeV")
    freq = _vector(_require(sys_t, "system", "hbar_omega_MeV"), n, "system",
                   "hbar_omega_MeV")
    eq_mass = (None if "eq_mass_hbar2_per_MeV" not in sys_t else
               _vector(sys_t["eq_mass_hbar2_per_MeV"], n, "system", "eq_mass_hbar2_per_MeV"))
    eq_freq = (None if "hbar_eq_omega_MeV" not in sys_t else
               _vector(sys_t["hbar_eq_omega_MeV"], n, "system", "hbar_eq_omega_MeV"))
    mode_kind = sys_t.get("mode_kind")
    if mode_kind is not None:
        if (not isinstance(mode_kind, list) or len(mode_kind) != n
                or not all(isinstance(s, str) for s in mode_kind)):
            raise ConfigError(f"[system].mode_kind must be an array of {n} strings")
    nu = (None if "nu_MeV" not in sys_t else
          _matrix_cfg(sys_t["nu_MeV"], n, "system", "nu_MeV"))
    kappa = (None if "kappa_per_MeV_s2" not in sys_t else
             unit_convert(1.0, "1/(MeV s^2)")
             * _matrix_cfg(sys_t["kappa_per_MeV_s2"], n, "system", "kappa_per_MeV_s2"))
    mu = (None if "mu_MeV" not in sys_t else
          _matrix_cfg(sys_t["mu_MeV"], n, "system", "mu_MeV"))

    lam = _matrix_cfg(_require(dis_t, "dissipation", "hbar_lambda_MeV"), n,
                      "dissipation", "hbar_lambda_MeV")
    alpha = (np.zeros((n, n)) if "alpha_per_MeV_s2" not in dis_t else
             unit_convert(1.0, "1/(MeV s^2)")
             * _matrix_cfg(dis_t["alpha_per_MeV_s2"], n, "dissipation", "alpha_per_MeV_s2"))
    eta = (np.zeros((n, n)) if "hbar_eta_MeV" not in dis_t else
           _matrix_cfg(dis_t["hbar_eta_MeV"], n, "dissipation", "hbar_eta_MeV"))
    temperature = _scalar(_require(dis_t, "dissipation", "temperature_MeV"),
                          "dissipation", "temperature_MeV")

    try:
        system = SystemParams(n_modes=n, mass=mass, frequency=freq, eq_mass=eq_mass,
                              eq_frequency=eq_freq, mu=mu, nu=nu, kappa=kappa,
                              mode_kind=mode_kind)
        dissipation = DissipationParams(lam=lam, alpha=alpha, eta=eta,
                                        temperature=temperature)
    except ValueError as exc:
        raise ValidationFailure(f"{path}: {exc}") from exc

    mean_q = _vector(_require(ini_t, "initial", "mean_q"), n, "initial", "mean_q")
    mean_p = _vector(_require(ini_t, "initial", "mean_p_hbar"), n, "initial", "mean_p_hbar")
    mean = np.empty(2 * n)
    mean[0::2] = mean_q
    mean[1::2] = mean_p
    if "covariance" in ini_t:
        for key in ("sigma_qq", "sigma_pp_hbar2", "sigma_qp_hbar"):
            if key in ini_t:
                raise ConfigError(
                    "initial covariance given twice: use either the full "
                    f"covariance matrix or the per-mode keys, not {key!r} too")
        cov = _matrix_cfg(ini_t["covariance"], 2 * n, "initial", "covariance")
    else:
        sqq = _vector(_require(ini_t, "initial", "sigma_qq"), n, "initial", "sigma_qq")
        spp = _vector(_require(ini_t, "initial", "sigma_pp_hbar2"), n, "initial",
                      "sigma_pp_hbar2")
        sqp = (np.zeros(n) if "sigma_qp_hbar" not in ini_t else
               _vector(ini_t["sigma_qp_hbar"], n, "initial", "sigma_qp_hbar"))
        cov = np.zeros((2 * n, 2 * n))
        for k in range(n):
            cov[2 * k, 2 * k] = sqq[k]
            cov[2 * k + 1, 2 * k + 1] = spp[k]
            cov[2 * k, 2 * k + 1] = cov[2 * k + 1, 2 * k] = sqp[k]
    try:
        initial = MomentState(mean=mean, cov=cov)
    except ValueError as exc:
        raise ValidationFailure(f"{path}: [initial]: {exc}") from exc

    t_end = _scalar(_require(run_t, "run", "t_end_seconds"), "run", "t_end_seconds")
    grid_points = run_t.get("grid_points", 2000)
    if not isinstance(grid_points, int) or isinstance(grid_points, bool):
        raise ConfigError("[run].grid_points must be an integer")
    density_times = run_t.get("density_times_seconds", [])
    if (not isinstance(density_times, list)
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                       for v in density_times)):
        raise ConfigError("[run].density_times_seconds must be an array of numbers")
    density_points = run_t.get("density_points", 101)
    if not isinstance(density_points, int) or isinstance(density_points, bool):
        raise ConfigError("[run].density_points must be an integer")

    sweep_param = None
    sweep_values: tuple[float, ...] = ()
    if "sweep" in raw:
        sweep_t = raw["sweep"]
        if not isinstance(sweep_t, dict):
            raise ConfigError("[sweep] must be a table")
        _reject_unknown(sweep_t, "sweep", _SWEEP_KEYS)
        sweep_param = _require(sweep_t, "sweep", "param")
        if not isinstance(sweep_param, str):
            raise ConfigError("[sweep].param must be a string")
        values = _require(sweep_t, "sweep", "values")
        if (not isinstance(values, list) or not values
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                           for v in values)):
            raise ConfigError("[sweep].values must be a non-empty array of numbers")
        sweep_values = tuple(float(v) for v in values)

    name = raw.get("name", "run")
    if not isinstance(name, str) or not name:
        raise ConfigError("name must be a non-empty string")
    description = raw.get("description", "")
    if not isinstance(description, str):
        raise ConfigError("description must be a string")

    return ScenarioConfig(
        name=name, system=system, dissipation=dissipation, initial=initial,
        t_end_seconds=t_end, grid_points=grid_points,
        sweep_param=sweep_param, sweep_values=sweep_values,
        density_times_seconds=tuple(float(v) for v in density_times),
        density_points=density_points, description=description)
