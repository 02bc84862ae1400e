import pytest

from barfi.config import ExperimentConfig, dump_config, load_config, make_config, parse_config
from barfi.errors import ConfigError

GW = """
# gridworld with the misleading center bonus
env = gridworld
aux_variant = GW_centerBonus
method = barfi
"""


def test_gridworld_defaults_round_trip(tmp_path):
    path = tmp_path / "gw.cfg"
    path.write_text(GW)
    cfg = load_config(path)
    assert (cfg.alpha_theta, cfg.alpha_phi, cfg.lambda_theta, cfg.lambda_gamma) == (1e-3, 5e-3, 0.25, 4.0)
    assert (cfg.buffer_capacity, cfg.eta, cfg.delta, cfg.n, cfg.N0, cfg.Ni) == (1000, 5e-4, 3, 5, 150, 15)
    assert cfg.optimizer == "rmsprop" and cfg.varphi_init == 4.6
    assert parse_config(dump_config(cfg)) == cfg


def test_table_values_for_other_envs():
    mc = make_config("mountaincar", "MC_energyPump", "barfi")
    assert (mc.alpha_theta, mc.alpha_phi, mc.buffer_capacity, mc.eta, mc.N0, mc.lambda_gamma) == (
        0.015625, 0.002, 50, 1e-3, 50, 0.25)
    naive = make_config("mountaincar", "MC_energyPump", "naive")
    assert (naive.alpha_theta, naive.outer_gamma) == (0.125, 0.9)
    cp = make_config("cartpole", "CP_antiPD", "barfi")
    assert (cp.lambda_theta, cp.buffer_capacity, cp.alpha_phi) == (1.0, 10000, 1e-3)


def test_delta_zero_names_the_field():
    with pytest.raises(ConfigError, match="delta"):
        parse_config(GW + "delta = 0\n")


def test_unknown_and_duplicate_keys():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(GW + "learning_rate = 0.1\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(GW + "seed = 1\nseed = 2\n")


def test_missing_required_keys_listed_together():
    with pytest.raises(ConfigError) as err:
        parse_config("seed = 3\n")
    assert all(k in str(err.value) for k in ("env", "aux_variant", "method"))


def test_type_and_value_errors():
    with pytest.raises(ConfigError, match="seed"):
        parse_config(GW + "seed = abc\n")
    with pytest.raises(ConfigError, match="aux_variant"):
        parse_config(GW.replace("GW_centerBonus", "CP_matchPD"))
    with pytest.raises(ConfigError, match="alpha_phi"):
        parse_config(GW + "alpha_phi = 0\n")
    with pytest.raises(ConfigError, match="bad line|expected"):
        parse_config(GW + "just words\n")


def test_baselines_do_not_need_outer_step_sizes():
    cfg = make_config("gridworld", "GW_centerBonus", "naive", alpha_phi=0.0, alpha_varphi=0.0)
    assert isinstance(cfg, ExperimentConfig)


def test_bool_parsing():
    assert parse_config(GW + "record_wallclock = false\n").record_wallclock is False
