import numpy as np
import pytest

from uplink_isac import linalg as la
from uplink_isac.errors import CapacityError
from uplink_isac.receivers import (Method, Strategy, detect_projected,
                                   detect_sic, exhaustive_joint_ml,
                                   ls_target_estimate, run_genie_receiver,
                                   run_projection_receiver, run_sic_receiver)
from uplink_isac.scene import (SystemConfig, gen_scene, gen_symbols,
                               stack_model, synthesize_block)

TINY = SystemConfig(M_t=1, M_r=2, N_t=2, L=4)


def _model(rng, cfg, noiseless=False):
    scene = gen_scene(rng, cfg)
    X_c = gen_symbols(rng, cfg)
    Y = synthesize_block(scene, X_c, None if noiseless else rng,
                         0.0 if noiseless else cfg.sigma2)
    return stack_model(scene, Y), la.vec(X_c), la.vec(scene.H_r)


def test_noiseless_projection_recovers_everything(rng):
    model, x, h = _model(rng, TINY, noiseless=True)
    res = run_projection_receiver(model, TINY, Strategy.EXHAUSTIVE)
    assert np.array_equal(res.x_hat, x)
    assert np.allclose(res.h_hat, h)
    assert res.objective < 1e-20 and res.method is Method.PROJECTION


def test_joint_ml_equals_projection(rng):
    for _ in range(10):
        model, _, _ = _model(rng, TINY)
        joint = exhaustive_joint_ml(model, TINY)
        x = detect_projected(model.y_tilde, model.G, TINY, Strategy.EXHAUSTIVE)
        assert np.array_equal(x, joint.x_hat)
        assert np.linalg.norm(ls_target_estimate(model, x) - joint.h_hat) < 1e-9


def test_zero_channel_is_unidentifiable():
    y = np.ones(4, dtype=complex)
    G = np.zeros((4, 2), dtype=complex)
    info = {}
    x = detect_projected(y, G, TINY, Strategy.EXHAUSTIVE, info=info)
    assert info["identifiable"] is False
    assert np.all(x == TINY.alphabet.points[0])


def test_tie_break_picks_lexicographically_first():
    # Columns identical: only x_0 + x_1 matters, so ties abound.
    G = np.ones((2, 2), dtype=complex)
    a = TINY.alphabet
    y = G @ np.array([a.points[1], a.points[2]])
    x = detect_projected(y, G, TINY, Strategy.EXHAUSTIVE)
    assert np.array_equal(a.indices(x), [0, 3])


def test_enumeration_budget():
    cfg = SystemConfig(M_t=1, M_r=2, N_t=11, L=2)
    G = np.ones((4, 11), dtype=complex)
    with pytest.raises(CapacityError):
        detect_projected(np.ones(4, dtype=complex), G, cfg, Strategy.EXHAUSTIVE)


def test_sic_per_snapshot_matches_brute_force(rng):
    cfg = SystemConfig(M_t=1, M_r=2, N_t=2, L=3, P_r=1.0)
    model, _, _ = _model(rng, cfg)
    x = detect_sic(model, cfg)
    from uplink_isac.scene import candidate_table
    T = candidate_table(cfg.alphabet, cfg.N_t * cfg.L)
    costs = np.sum(np.abs(model.y[:, None] - model.A_c @ T) ** 2, axis=0)
    assert np.array_equal(x, T[:, np.argmin(costs)])


def test_sdr_strategy_on_default_point(rng):
    cfg = SystemConfig(L=12)
    model, x, _ = _model(rng, cfg)
    res = run_projection_receiver(model, cfg, Strategy.SDR, rng)
    assert np.mean(res.x_hat != x) < 0.05
    assert res.diagnostics["sweeps"] > 0


def test_genie_and_sic_receivers(rng):
    cfg = SystemConfig(P_r=1e-3)
    model, x, h = _model(rng, cfg)
    g = run_genie_receiver(model, x)
    s = run_sic_receiver(model, cfg)
    assert np.array_equal(s.x_hat, x)  # radar echo is negligible here
    assert np.allclose(s.h_hat, g.h_hat)
    assert g.method is Method.GENIE
