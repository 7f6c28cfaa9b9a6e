"""Built-in scenarios.

Ten ready-to-run parameter sets covering the regimes the engine is
designed for: thermal relaxation of a two-mode oscillator pair (fig1),
mean decay and cross-covariance buildup under coupling sweeps
(fig2..fig7), near-maximal cross dissipation at low temperature
(fig8), and dissipative spreading over a two-dimensional inverted
barrier with a friction sweep of the penetration probability
(fig9, fig10).

The oscillator pair models charge and neutron asymmetry coordinates
of a dinuclear system: equal masses 461.6344 hbar^2/MeV, frequencies
hbar omega = 2.9468 and 2.9288 MeV, coordinate coupling nu = -1869
MeV. The barrier pair is lighter and inverted in both modes (masses
2.5 and 60 hbar^2/MeV, frequency magnitudes 1.7 and 0.6 MeV, nu = 7
MeV) and starts displaced at q1 = -6 moving toward the top.
"""

from __future__ import annotations

import numpy as np

from .config import ScenarioConfig
from .dynamics import MomentState
from .errors import ConfigError
from .model import DissipationParams, SystemParams
from .units import unit_convert

__all__ = ["list_scenarios", "get_scenario", "SCENARIO_NAMES"]

_KAPPA_UNIT = "1/(MeV s^2)"


def _pair_system(nu12: float = -1869.0, kappa12: float = 0.0) -> SystemParams:
    """The asymmetry-coordinate oscillator pair (kappa12 in 1/(MeV s^2))."""
    kap = unit_convert(kappa12, _KAPPA_UNIT)
    return SystemParams(
        n_modes=2,
        mass=[461.6344, 461.6344],
        frequency=[2.9468, 2.9288],
        nu=[[0.0, nu12], [nu12, 0.0]],
        kappa=[[0.0, kap], [kap, 0.0]],
    )


def _pair_dissipation(lam_diag: float, temperature: float,
                      alpha12: float = 0.0) -> DissipationParams:
    a = unit_convert(alpha12, _KAPPA_UNIT)
    return DissipationParams(
        lam=[[lam_diag, 0.0], [0.0, lam_diag]],
        alpha=[[0.0, a], [-a, 0.0]],
        eta=np.zeros((2, 2)),
        temperature=temperature,
    )


def _pair_initial(mean_q=(0.0, 0.0)) -> MomentState:
    # Minimum-uncertainty squeezed start: sigma_pp = 1 / (4 sigma_qq).
    sqq = (1e-4, 1e-3)
    mean = np.zeros(4)
    mean[0], mean[2] = mean_q
    cov = np.zeros((4, 4))
    for k in range(2):
        cov[2 * k, 2 * k] = sqq[k]
        cov[2 * k + 1, 2 * k + 1] = 1.0 / (4.0 * sqq[k])
    return MomentState(mean=mean, cov=cov)


def _barrier_system() -> SystemParams:
    return SystemParams(
        n_modes=2,
        mass=[2.5, 60.0],
        frequency=[1.7, 0.6],
        nu=[[0.0, 7.0], [7.0, 0.0]],
        mode_kind=["inverted_barrier", "inverted_barrier"],
    )


def _barrier_dissipation(lam22: float = 0.6) -> DissipationParams:
    return DissipationParams(
        lam=[[2.5, 0.0], [0.0, lam22]],
        alpha=np.zeros((2, 2)),
        eta=np.zeros((2, 2)),
        temperature=0.1,
    )


def _barrier_initial() -> MomentState:
    mean = np.array([-6.0, 9.0, 0.0, 0.0])
    cov = np.zeros((4, 4))
    cov[0, 0] = 0.4
    cov[1, 1] = 1.0 / 1.6
    cov[2, 2] = 0.07
    cov[3, 3] = 1.0 / 0.28
    return MomentState(mean=mean, cov=cov)


_DECAY_MEANS = (0.0385, 0.0067)


def _fig1() -> ScenarioConfig:
    return ScenarioConfig(
        name="fig1", system=_pair_system(), dissipation=_pair_dissipation(2.0, 5.0),
        initial=_pair_initial(), t_end_seconds=2e-21,
        description="variance relaxation of the oscillator pair onto the "
                    "thermal asymptote")


def _fig2() -> ScenarioConfig:
    return ScenarioConfig(
        name="fig2", system=_pair_system(), dissipation=_pair_dissipation(2.0, 2.0),
        initial=_pair_initial(_DECAY_MEANS), t_end_seconds=5e-22,
        sweep_param="nu_12", sweep_values=(3000.0, -1869.0, -3000.0),
        description="mean decay of displaced asymmetry coordinates for three "
                    "coordinate couplings")


def _fig3() -> ScenarioConfig:
    cfg = _fig2()
    return ScenarioConfig(
        name="fig3", system=cfg.system, dissipation=cfg.dissipation,
        initial=cfg.initial, t_end_seconds=cfg.t_end_seconds,
        sweep_param=cfg.sweep_param, sweep_values=cfg.sweep_values,
        description="cross covariance sigma_q1q2 under the same coordinate "
                    "coupling sweep")


def _fig4() -> ScenarioConfig:
    return ScenarioConfig(
        name="fig4", system=_pair_system(), dissipation=_pair_dissipation(2.0, 2.0),
        initial=_pair_initial(_DECAY_MEANS), t_end_seconds=5e-22,
        sweep_param="lambda_diag", sweep_values=(3.0, 2.0, 1.6),
        description="mean decay for three friction strengths")


def _fig5() -> ScenarioConfig:
    cfg = _fig4()
    return ScenarioConfig(
        name="fig5", system=cfg.system, dissipation=cfg.dissipation,
        initial=cfg.initial, t_end_seconds=cfg.t_end_seconds,
        sweep_param=cfg.sweep_param, sweep_values=cfg.sweep_values,
        description="variances and cross covariance under the friction sweep")


def _fig6() -> ScenarioConfig:
    return ScenarioConfig(
        name="fig6", system=_pair_system(), dissipation=_pair_dissipation(2.0, 2.0),
        initial=_pair_initial(_DECAY_MEANS), t_end_seconds=5e-22,
        sweep_param="kappa_12", sweep_values=(33e38, 20e38, 0.0),
        description="mean decay for three momentum couplings (values in "
                    "1/(MeV s^2))")


def _fig7() -> ScenarioConfig:
    cfg = _fig6()
    return ScenarioConfig(
        name="fig7", system=cfg.system, dissipation=cfg.dissipation,
        initial=cfg.initial, t_end_seconds=cfg.t_end_seconds,
        sweep_param=cfg.sweep_param, sweep_values=cfg.sweep_values,
        description="cross covariance under the momentum coupling sweep")


def _fig8() -> ScenarioConfig:
    return ScenarioConfig(
        name="fig8",
        system=_pair_system(),
        dissipation=_pair_dissipation(2.0, 0.02, alpha12=33e38),
        initial=_pair_initial(), t_end_seconds=5e-22,
        description="low-temperature correlation buildup near the maximal "
                    "cross dissipation allowed by the constraints")


def _fig9() -> ScenarioConfig:
    return ScenarioConfig(
        name="fig9", system=_barrier_system(), dissipation=_barrier_dissipation(),
        initial=_barrier_initial(), t_end_seconds=2e-22,
        density_times_seconds=(0.0, 0.5e-22, 1.0e-22, 2.0e-22),
        description="coordinate density spreading over the two-dimensional "
                    "inverted barrier")


def _fig10() -> ScenarioConfig:
    return ScenarioConfig(
        name="fig10", system=_barrier_system(), dissipation=_barrier_dissipation(),
        initial=_barrier_initial(), t_end_seconds=1e-20,
        sweep_param="lambda_22", sweep_values=(0.6, 1.2, 2.5, 5.0),
        density_times_seconds=(0.0,),
        description="barrier penetration probability versus friction on the "
                    "slow mode")


_BUILDERS = {
    "fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5,
    "fig6": _fig6, "fig7": _fig7, "fig8": _fig8, "fig9": _fig9, "fig10": _fig10,
}

SCENARIO_NAMES = tuple(_BUILDERS)


def list_scenarios() -> list[tuple[str, str]]:
    return [(name, _BUILDERS[name]().description) for name in SCENARIO_NAMES]


def get_scenario(name: str) -> ScenarioConfig:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ConfigError(
            f"unknown scenario {name!r}; available: {', '.join(SCENARIO_NAMES)}"
        ) from None
    return builder()
