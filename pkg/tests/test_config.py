import numpy as np
import pytest

from qudiff import ConfigError, HBAR_MEV_S, ValidationFailure
from qudiff.config import apply_parameter, load_config, sweep_members
from qudiff.scenarios import get_scenario

VALID = """\
name = "demo"
description = "two coupled modes"

[system]
n_modes = 2
mass_hbar2_per_MeV = [461.6344, 461.6344]
hbar_omega_MeV = [2.9468, 2.9288]
nu_MeV = [[0.0, -1869.0], [-1869.0, 0.0]]
kappa_per_MeV_s2 = [[0.0, 20e38], [20e38, 0.0]]

[dissipation]
hbar_lambda_MeV = [[2.0, 0.0], [0.0, 2.0]]
temperature_MeV = 5.0

[initial]
mean_q = [0.1, 0.0]
mean_p_hbar = [0.0, -0.3]
sigma_qq = [1e-4, 1e-3]
sigma_pp_hbar2 = [2500.0, 250.0]

[run]
t_end_seconds = 2e-22
grid_points = 400
"""


def _write(tmp_path, text, name="scenario.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _replace(text, old, new):
    assert old in text
    return text.replace(old, new)


class TestLoad:
    def test_valid_file(self, tmp_path):
        cfg = load_config(_write(tmp_path, VALID))
        assert cfg.name == "demo"
        assert cfg.description == "two coupled modes"
        assert cfg.system.n_modes == 2
        assert cfg.system.nu[0, 1] == -1869.0
        # kappa arrives in 1/(MeV s^2) and is stored internal.
        assert cfg.system.kappa[0, 1] == pytest.approx(
            20e38 * HBAR_MEV_S**2, rel=1e-15)
        assert cfg.dissipation.temperature == 5.0
        assert np.array_equal(cfg.initial.mean, [0.1, 0.0, 0.0, -0.3])
        assert cfg.initial.cov[1, 1] == 2500.0
        assert cfg.initial.cov[0, 1] == 0.0
        assert cfg.t_end_seconds == 2e-22
        assert cfg.grid_points == 400
        assert cfg.sweep_param is None

    def test_time_grid(self, tmp_path):
        cfg = load_config(_write(tmp_path, VALID))
        grid = cfg.time_grid_internal()
        assert grid.shape == (400,)
        assert grid[0] == 0.0
        assert grid[-1] == pytest.approx(2e-22 / HBAR_MEV_S, rel=1e-15)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="nope.toml"):
            load_config(str(tmp_path / "nope.toml"))

    def test_unparseable_toml(self, tmp_path):
        path = _write(tmp_path, "name = [unclosed")
        with pytest.raises(ConfigError, match="scenario.toml"):
            load_config(path)

    def test_unknown_section(self, tmp_path):
        path = _write(tmp_path, VALID + "\n[extra]\nx = 1\n")
        with pytest.raises(ConfigError, match=r"unknown section \[extra\]"):
            load_config(path)

    def test_unknown_key(self, tmp_path):
        path = _write(tmp_path, _replace(VALID, "grid_points = 400",
                                         "grid_points = 400\nstride = 2"))
        with pytest.raises(ConfigError, match="unknown key 'stride'"):
            load_config(path)

    def test_missing_required_key(self, tmp_path):
        path = _write(tmp_path, _replace(
            VALID, "temperature_MeV = 5.0", ""))
        with pytest.raises(ConfigError, match="temperature_MeV"):
            load_config(path)

    def test_missing_section(self, tmp_path):
        text = VALID.split("[initial]")[0]
        with pytest.raises(ConfigError, match=r"missing \[initial\]"):
            load_config(_write(tmp_path, text))

    def test_wrong_vector_length(self, tmp_path):
        path = _write(tmp_path, _replace(
            VALID, "mean_q = [0.1, 0.0]", "mean_q = [0.1]"))
        with pytest.raises(ConfigError, match="mean_q"):
            load_config(path)

    def test_full_covariance_matrix(self, tmp_path):
        text = _replace(VALID, """sigma_qq = [1e-4, 1e-3]
sigma_pp_hbar2 = [2500.0, 250.0]""", """covariance = [
  [1e-4, 0.0, 0.0, 0.0],
  [0.0, 2500.0, 0.0, 0.0],
  [0.0, 0.0, 1e-3, 0.0],
  [0.0, 0.0, 0.0, 250.0],
]""")
        cfg = load_config(_write(tmp_path, text))
        assert cfg.initial.cov[3, 3] == 250.0

    def test_covariance_given_twice(self, tmp_path):
        text = _replace(VALID, "sigma_qq = [1e-4, 1e-3]", """sigma_qq = [1e-4, 1e-3]
covariance = [
  [1e-4, 0.0, 0.0, 0.0],
  [0.0, 2500.0, 0.0, 0.0],
  [0.0, 0.0, 1e-3, 0.0],
  [0.0, 0.0, 0.0, 250.0],
]""")
        with pytest.raises(ConfigError, match="twice"):
            load_config(_write(tmp_path, text))

    def test_invalid_physics_is_validation_failure(self, tmp_path):
        path = _write(tmp_path, _replace(
            VALID, "mass_hbar2_per_MeV = [461.6344, 461.6344]",
            "mass_hbar2_per_MeV = [-1.0, 461.6344]"))
        with pytest.raises(ValidationFailure, match="mass"):
            load_config(path)

    def test_bad_initial_block_is_validation_failure(self, tmp_path):
        path = _write(tmp_path, _replace(
            VALID, "sigma_qq = [1e-4, 1e-3]", "sigma_qq = [-1e-4, 1e-3]"))
        with pytest.raises(ValidationFailure, match=r"\[initial\]"):
            load_config(path)

    def test_below_minimum_uncertainty_warns(self, tmp_path):
        path = _write(tmp_path, _replace(
            VALID, "sigma_pp_hbar2 = [2500.0, 250.0]",
            "sigma_pp_hbar2 = [100.0, 250.0]"))
        with pytest.warns(UserWarning, match="below the minimum"):
            load_config(path)

    def test_mode_kind_and_eq_overrides(self, tmp_path):
        text = _replace(VALID, 'hbar_omega_MeV = [2.9468, 2.9288]',
                        """hbar_omega_MeV = [2.9468, 2.9288]
eq_mass_hbar2_per_MeV = [400.0, 400.0]
hbar_eq_omega_MeV = [3.0, 3.0]
mode_kind = ["oscillator", "oscillator"]""")
        cfg = load_config(_write(tmp_path, text))
        assert cfg.system.eq_mass[0] == 400.0
        assert cfg.system.eq_frequency[1] == 3.0

    def test_grid_points_must_be_integer(self, tmp_path):
        path = _write(tmp_path, _replace(
            VALID, "grid_points = 400", "grid_points = 400.5"))
        with pytest.raises(ConfigError, match="grid_points"):
            load_config(path)

    def test_nonpositive_t_end(self, tmp_path):
        path = _write(tmp_path, _replace(
            VALID, "t_end_seconds = 2e-22", "t_end_seconds = 0.0"))
        with pytest.raises(ConfigError, match="t_end_seconds"):
            load_config(path)

    def test_sweep_section(self, tmp_path):
        text = VALID + """
[sweep]
param = "nu_12"
values = [3000.0, -1869.0]
"""
        cfg = load_config(_write(tmp_path, text))
        assert cfg.sweep_param == "nu_12"
        assert cfg.sweep_values == (3000.0, -1869.0)

    def test_sweep_values_must_be_nonempty(self, tmp_path):
        text = VALID + """
[sweep]
param = "nu_12"
values = []
"""
        with pytest.raises(ConfigError, match="values"):
            load_config(_write(tmp_path, text))


class TestSweepGrammar:
    def test_unknown_parameter(self, tmp_path):
        text = VALID + """
[sweep]
param = "banana"
values = [1.0]
"""
        with pytest.raises(ConfigError, match="unknown sweep parameter"):
            load_config(_write(tmp_path, text))

    def test_coupling_must_join_distinct_modes(self, fig1):
        with pytest.raises(ConfigError, match="distinct"):
            apply_parameter(fig1.system, fig1.dissipation, "nu_11", 1.0)

    def test_index_out_of_range(self, fig1):
        with pytest.raises(ConfigError, match="beyond n_modes"):
            apply_parameter(fig1.system, fig1.dissipation, "nu_13", 1.0)

    def test_lambda_diagonal_entry_allowed(self, fig1):
        _, d = apply_parameter(fig1.system, fig1.dissipation, "lambda_11", 3.0)
        assert d.lam[0, 0] == 3.0
        assert d.lam[1, 1] == 2.0


class TestApplyParameter:
    def test_nu_symmetric(self, fig1):
        system, _ = apply_parameter(fig1.system, fig1.dissipation,
                                    "nu_12", 3000.0)
        assert system.nu[0, 1] == 3000.0
        assert system.nu[1, 0] == 3000.0

    def test_kappa_converted(self, fig1):
        system, _ = apply_parameter(fig1.system, fig1.dissipation,
                                    "kappa_12", 33e38)
        assert system.kappa[0, 1] == pytest.approx(
            33e38 * HBAR_MEV_S**2, rel=1e-15)

    def test_alpha_antisymmetric_and_converted(self, fig1):
        _, d = apply_parameter(fig1.system, fig1.dissipation,
                               "alpha_12", 10e38)
        assert d.alpha[0, 1] == pytest.approx(10e38 * HBAR_MEV_S**2, rel=1e-15)
        assert d.alpha[1, 0] == -d.alpha[0, 1]

    def test_eta_antisymmetric(self, fig1):
        _, d = apply_parameter(fig1.system, fig1.dissipation, "eta_12", 0.5)
        assert d.eta[0, 1] == 0.5
        assert d.eta[1, 0] == -0.5

    def test_lambda_cross_sets_both(self, fig1):
        _, d = apply_parameter(fig1.system, fig1.dissipation, "lambda_12", 0.4)
        assert d.lam[0, 1] == 0.4
        assert d.lam[1, 0] == 0.4

    def test_lambda_diag_fills_diagonal(self, fig1):
        _, d = apply_parameter(fig1.system, fig1.dissipation,
                               "lambda_diag", 1.6)
        assert np.array_equal(np.diag(d.lam), [1.6, 1.6])

    def test_mu_sets_single_entry(self, fig1):
        system, _ = apply_parameter(fig1.system, fig1.dissipation,
                                    "mu_12", 0.3)
        assert system.mu[0, 1] == 0.3
        assert system.mu[1, 0] == 0.0

    def test_temperature(self, fig1):
        _, d = apply_parameter(fig1.system, fig1.dissipation,
                               "temperature", 2.0)
        assert d.temperature == 2.0

    def test_nonpositive_temperature_rejected(self, fig1):
        with pytest.raises(ValidationFailure, match="temperature"):
            apply_parameter(fig1.system, fig1.dissipation, "temperature", 0.0)

    def test_originals_untouched(self, fig1):
        apply_parameter(fig1.system, fig1.dissipation, "nu_12", 99.0)
        assert fig1.system.nu[0, 1] == -1869.0


class TestSweepMembers:
    def test_no_sweep_single_member(self, fig1):
        members = list(sweep_members(fig1))
        assert len(members) == 1
        tag, system, dissipation = members[0]
        assert tag is None
        assert system is fig1.system

    def test_coupling_sweep_tags(self):
        cfg = get_scenario("fig2")
        tags = [tag for tag, _, _ in sweep_members(cfg)]
        assert tags == ["nu_12_3000p0", "nu_12_m1869p0", "nu_12_m3000p0"]

    def test_scientific_notation_tags(self):
        cfg = get_scenario("fig6")
        tags = [tag for tag, _, _ in sweep_members(cfg)]
        assert tags == ["kappa_12_3p3e39", "kappa_12_2e39", "kappa_12_0p0"]

    def test_members_carry_applied_values(self):
        cfg = get_scenario("fig10")
        members = list(sweep_members(cfg))
        assert [d.lam[1, 1] for _, _, d in members] == [0.6, 1.2, 2.5, 5.0]
        # Everything else stays at the base configuration.
        for _, system, d in members:
            assert d.lam[0, 0] == 2.5
            assert system.mode_kind == ("inverted_barrier", "inverted_barrier")
