import pytest
import yaml

from uavfpg import ConfigError
from uavfpg.config import apply_overrides, default_config, dump_config, from_dict, load_config, replace


def test_defaults_mirror_parameter_tables(cfg):
    assert (cfg.costs.H, cfg.costs.M, cfg.costs.E, cfg.costs.alpha) == (2, 8, 1, 0.5)
    assert (cfg.radio.P_base, cfg.radio.P_opponent, cfg.radio.bw_narrow, cfg.radio.bw_spread) == (45, 20, 5, 2400)
    m = cfg.agents.maddpg
    assert (m.gamma, m.batch_size, m.lr, m.buffer_capacity, m.sigma_start, m.sigma_end) == (0.99, 32, 0.001, 1_000_000, 0.1, 0.01)
    assert m.total_steps == 100_000


def test_round_trip_fixed_point(tmp_path, cfg):
    text = dump_config(cfg)
    p = tmp_path / "c.yaml"
    p.write_text(text)
    again = load_config(p)
    assert again == cfg and dump_config(again) == text and again.digest() == cfg.digest()


def test_paper_table_values_accepted_verbatim(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text(yaml.safe_dump({"agents": {"maddpg": {"gamma": 0.99, "total_steps": 10_000_000,
                                                       "batch_size": 32, "lr": 0.001}}}))
    c = load_config(p)
    assert c.agents.maddpg.gamma == 0.99 and c.agents.maddpg.total_steps == 10_000_000


def test_unknown_key_rejected_with_path():
    with pytest.raises(ConfigError, match=r"radio\.bogus"):
        from_dict({"radio": {"bogus": 1}})
    with pytest.raises(ConfigError, match="nope"):
        from_dict({"nope": {}})


def test_type_errors_are_field_precise():
    with pytest.raises(ConfigError, match=r"costs\.M"):
        from_dict({"costs": {"M": "high"}})
    with pytest.raises(ConfigError, match="planner.mode"):
        from_dict({"planner": {"mode": "oracle"}})
    with pytest.raises(ConfigError, match="world.episode_steps"):
        from_dict({"world": {"episode_steps": 0}})


def test_overrides():
    d = apply_overrides(default_config().to_dict(), ["radio.P_base=40", "radio.jam_types=[comb]",
                                                     "radio.P_opponent=-.inf"])
    c = from_dict(d)
    assert c.radio.P_base == 40 and c.radio.jam_types == ["comb"] and c.radio.P_opponent == float("-inf")
    with pytest.raises(ConfigError):
        apply_overrides({}, ["radio.P_base"])


def test_replace_changes_digest(cfg):
    other = replace(cfg, **{"kb.enabled": False})
    assert other.kb.enabled is False and cfg.kb.enabled is True
    assert other.digest() != cfg.digest()
