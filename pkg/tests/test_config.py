import pytest

from synbuild.config import ConfigError, PipelineConfig, from_mapping, load


def test_defaults(monkeypatch):
    monkeypatch.delenv("SYNBUILD_OUT", raising=False)
    cfg = load(overrides={"output_root": "/tmp/x"})
    assert (cfg.permutation_cap, cfg.candidates_per_floor, cfg.exterior_count) == (8, 3, 25)
    assert cfg.roof.density == 50.0


def test_env_fallback_and_precedence(monkeypatch):
    monkeypatch.setenv("SYNBUILD_OUT", "/env/root")
    assert load().output_root == "/env/root"
    assert load(overrides={"output_root": "/flag"}).output_root == "/flag"


def test_missing_root(monkeypatch):
    monkeypatch.delenv("SYNBUILD_OUT", raising=False)
    with pytest.raises(ConfigError, match="output root"):
        load()


def test_toml_sections(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text(
        'global_seed = 7\noutput_root = "out"\n'
        "[exterior]\nstories_range = [2, 3]\nroof_kinds_enabled = ['flat', 'gabled']\n"
        "[floorplan]\nroom_weights = { '3' = 2, '4' = 1 }\n"
        "[roof]\ndensity = 20\n"
    )
    cfg = load(p, {"global_seed": 9, "worker_count": None})
    assert cfg.global_seed == 9 and cfg.worker_count == 1
    assert cfg.exterior.stories_range == (2, 3)
    assert cfg.floorplan.room_weights == {3: 2.0, 4: 1.0}
    assert cfg.roof.density == 20.0 and isinstance(cfg.roof.density, float)


@pytest.mark.parametrize("data,match", [
    ({"nope": 1}, "unknown key"),
    ({"exterior": {"colour": "red"}}, r"unknown key.*\[exterior\]"),
    ({"exterior": 3}, "must be a table"),
])
def test_mapping_errors(data, match):
    with pytest.raises(ConfigError, match=match):
        from_mapping(data)


@pytest.mark.parametrize("kw", [
    {"permutation_cap": 0},
    {"worker_count": True},
    {"global_seed": -1},
    {"exterior_count": 2.5},
])
def test_validation_errors(kw):
    with pytest.raises(ConfigError):
        PipelineConfig(output_root="x", **kw).validate()


def test_section_errors_are_wrapped(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('output_root = "o"\n[align]\nscale_bounds = [1.1, 1.3]\n')
    with pytest.raises(ConfigError, match=r"\[align\]"):
        load(p)
    p.write_text("not = [valid")
    with pytest.raises(ConfigError, match="bad config"):
        load(p)
