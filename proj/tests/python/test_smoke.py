import math

import numpy as np
import pytest

import fracwave


def small_config(**overrides):
    cfg = fracwave.parse_config(
        "[discretization]\nn_modes = 8\nn_x = 64\nn_steps = 256\n"
        "[reconstruction]\nn_basis = 8\nmax_iter = 5\n"
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


def test_caputo_is_exact_on_linears():
    t = np.linspace(0.0, 1.0, 201)
    d = np.asarray(fracwave.caputo_derivative(t, 1.0, 0.5))
    assert np.max(np.abs(d - np.sqrt(t) / math.gamma(1.5))) <= 1e-10


def test_alikhanov_holds_on_random_input():
    rng = np.random.default_rng(3)
    r = fracwave.verify_alikhanov(rng.uniform(-1, 1, 16), 1.0, 0.4)
    assert r["holds"] and r["lhs"] >= r["rhs"]


def test_undamped_poles_sit_on_the_imaginary_axis():
    poles = fracwave.cwch_poles(math.pi**2, c=2.0, b=0.0)
    assert sorted(p["s"].imag for p in poles) == pytest.approx([-2 * math.pi, 2 * math.pi], abs=1e-10)
    assert all(abs(p["s"].real) <= 1e-12 for p in poles)


def test_damped_poles_are_conjugate_and_stable():
    poles = fracwave.cwch_poles(9 * math.pi**2, b=0.1, alpha=0.5)
    assert len(poles) == 2
    assert poles[0]["s"] == pytest.approx(poles[1]["s"].conjugate())
    assert all(p["s"].real < 0 for p in poles)


def test_simulate_reproduces_excitation_at_zero_kappa():
    out = fracwave.simulate(small_config())
    t = np.asarray(out["t"])
    assert np.max(np.abs(np.asarray(out["trace"]) - t)) <= 1e-4


def test_zero_truth_reconstruction_stays_at_zero():
    out = fracwave.reconstruct(small_config(truth="zero"), noise_level=0.0)
    assert out["linf"] <= 1e-6
    assert out["stop_reason"] in {"discrepancy", "stagnation", "max_iter"}


def test_singular_values_descend():
    s = np.asarray(fracwave.singular_values(small_config()))
    assert s.shape == (8,)
    assert np.all(np.diff(s) <= 0)


def test_config_hash_ignores_spelling_of_numbers():
    a = fracwave.parse_config("[model]\nalpha = 0.5\n")
    b = fracwave.parse_config("[model]\nalpha = 5e-1\n")
    assert a.hash() == b.hash()
    b.alpha = 0.6
    assert a.hash() != b.hash()


def test_errors_map_to_python_exceptions():
    with pytest.raises(fracwave.ValidationError, match=r"\(0, 1\]"):
        fracwave.simulate(small_config(alpha=1.5))
    with pytest.raises(fracwave.ValidationError):
        fracwave.parse_config("[model]\nunknown = 1\n")


def test_cli_exit_codes(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[model]\nalpha = 1.5\n")
    assert fracwave.run_cli(["simulate", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 2
