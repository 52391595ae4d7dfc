import math

import pytest
import yaml
from hypothesis import given
from hypothesis import strategies as st

from risbeam import config as C
from risbeam.errors import ConfigError


def test_default_snapshot_has_table_values():
    d = yaml.safe_load(C.dumps(C.ExperimentConfig()))
    s = d["scenario"]
    assert s["n_antennas"] == 50 and s["ris_side"] == 4
    assert s["carrier_freq_hz"] == 28e9 and s["bandwidth_hz"] == 400e6
    assert s["sat_aoa_rad"] == pytest.approx(math.pi / 4)
    assert s["p_t_dbm"] == 30.0
    assert d["users"]["density_per_km2"] == 150.0
    a = d["agent"]
    assert (a["discount"], a["learning_rate"], a["weight_decay"]) == (0.99, 0.01, 1e-5)
    assert (a["batch_size"], a["buffer_capacity"], a["warmup_steps"]) == (16, 1000, 50)
    assert (a["steps_per_episode"], a["max_episodes"], a["seed"]) == (4000, 10, 42)


def test_roundtrip_default():
    cfg = C.ExperimentConfig()
    assert C.loads(C.dumps(cfg)) == cfg
    assert C.dumps(C.loads(C.dumps(cfg))) == C.dumps(cfg)


@given(p=st.floats(-10, 60), lr=st.floats(1e-6, 1.0), seed=st.integers(0, 2**64 - 1),
       hidden=st.lists(st.integers(1, 512), min_size=1, max_size=3),
       scheme=st.sampled_from(C.SCHEMES), count=st.one_of(st.none(), st.integers(1, 10)))
def test_roundtrip_property(p, lr, seed, hidden, scheme, count):
    base = C.ExperimentConfig()
    cfg = base.replace(scenario=base.scenario.replace(p_t_dbm=p),
                       agent=C.AgentConfig(learning_rate=lr, hidden=tuple(hidden)),
                       users=C.UsersConfig(count=count), scheme=scheme, seed=seed)
    assert C.loads(C.dumps(cfg)) == cfg


def test_unknown_keys_named():
    with pytest.raises(ConfigError, match="agent.lr"):
        C.loads("agent: {lr: 0.1}")
    with pytest.raises(ConfigError, match="colour"):
        C.loads("colour: red")


def test_invalid_values_named():
    with pytest.raises(ConfigError, match="scenario.n_antennas"):
        C.loads("scenario: {n_antennas: many}")
    with pytest.raises(ConfigError, match="scheme"):
        C.loads("scheme: mmse")
    with pytest.raises(ConfigError, match="users"):
        C.loads("users: {distribution: cauchy}")
    with pytest.raises(ConfigError):
        C.loads("agent: [1, 2]")
    with pytest.raises(ConfigError):
        C.loads(": : :")


def test_yaml11_exponent_strings_coerced():
    cfg = C.loads("agent: {weight_decay: 1e-5, learning_rate: 1e-2}")
    assert cfg.agent.weight_decay == 1e-5
    assert cfg.agent.learning_rate == 0.01


def test_top_level_seed_drives_agent():
    cfg = C.loads("seed: 7\nagent: {seed: 3}")
    assert cfg.agent.seed == 7


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("")
    assert C.load(path) == C.ExperimentConfig()
    with pytest.raises(ConfigError):
        C.load(tmp_path / "missing.yaml")


def test_save_and_load(tmp_path):
    cfg = C.ExperimentConfig(seed=5, scheme="zf")
    C.save(cfg, tmp_path / "x.yaml")
    assert C.load(tmp_path / "x.yaml") == cfg
