import json
import math

import numpy as np
import pytest

from reduced_measures.config import ConfigError, ExperimentConfig, grid_from_spec


def _base(**overrides):
    raw = {
        "grid": {"kind": "radialN", "h": 2.0**-6, "dim": 2, "radius": 1.0},
        "nonlinearity": {"kind": "exp"},
        "measure": {"atoms": [{"at": 0.0, "weight": 6.0}]},
        "scheme": "truncation",
    }
    raw.update(overrides)
    return raw


def test_round_trip_builds_matching_objects():
    cfg = ExperimentConfig.from_dict(_base())
    grid = cfg.build_grid()
    assert grid.kind == "radialN" and grid.dim == 2
    mu = cfg.build_measure(grid)
    assert mu.atoms == ((0, 6.0),)
    g = cfg.build_nonlinearity()
    assert g(1.0) == pytest.approx(math.e - 1.0)


def test_grid_from_spec_covers_every_kind():
    g1 = grid_from_spec({"kind": "interval1d", "h": 0.125, "length": 2.0})
    assert g1.kind == "interval1d" and g1.length == 2.0
    g2 = grid_from_spec({"kind": "rect2d", "h": 0.25, "extents": [2.0, 1.0]})
    assert g2.kind == "rect2d" and g2.extents == (2.0, 1.0)
    with pytest.raises(ConfigError):
        grid_from_spec({"kind": "hex", "h": 0.1})
    with pytest.raises(ConfigError):
        grid_from_spec({"kind": "interval1d", "h": "wide"})


def test_density_measures():
    cfg = ExperimentConfig.from_dict(
        _base(
            grid={"kind": "interval1d", "h": 2.0**-5, "length": 1.0},
            measure={"density": {"kind": "constant", "value": 2.5}},
        )
    )
    grid = cfg.build_grid()
    mu = cfg.build_measure(grid)
    assert np.allclose(mu.density, 2.5)
    assert mu.atoms == ()

    cfg2 = ExperimentConfig.from_dict(
        _base(
            grid={"kind": "interval1d", "h": 2.0**-5, "length": 1.0},
            measure={"density": {"kind": "sin1d", "amplitude": 1.0, "frequency": 2}},
        )
    )
    mu2 = cfg2.build_measure(cfg2.build_grid())
    assert mu2.density.max() > 0.9


def test_malformed_atom_entries_are_config_errors():
    grid_spec = {"kind": "interval1d", "h": 2.0**-5, "length": 1.0}
    for atoms in (
        [[[0.5], 3.0]],  # list entry instead of {"at": ..., "weight": ...}
        [{"at": [0.5]}],
        [{"at": [0.5], "weight": "heavy"}],
    ):
        cfg = ExperimentConfig.from_dict(
            _base(grid=grid_spec, measure={"atoms": atoms})
        )
        with pytest.raises(ConfigError):
            cfg.build_measure(cfg.build_grid())


def test_unknown_keys_and_schemes_fail_eagerly():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(_base(scheme="annealing"))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(_base(tolerances={"tol": 1e-9, "warp": 1.0}))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(_base(nonlinearity={"kind": "tanh"}))


def test_tolerances_resolve_with_env_override(monkeypatch):
    cfg = ExperimentConfig.from_dict(_base(tolerances={"tol": 1e-7}))
    tols = cfg.resolve_tolerances()
    assert tols["tol"] == 1e-7
    assert tols["good_tol"] == 1e-6

    monkeypatch.setenv("RMLAB_TOL", "1e-5")
    assert cfg.resolve_tolerances()["tol"] == 1e-5

    monkeypatch.setenv("RMLAB_TOL", "tiny")
    with pytest.raises(ConfigError):
        cfg.resolve_tolerances()


def test_from_file_reports_config_errors(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(_base()))
    cfg = ExperimentConfig.from_file(str(good))
    assert cfg.scheme == "truncation"

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(str(bad))

    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(str(tmp_path / "missing.json"))
