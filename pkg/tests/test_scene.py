import numpy as np
import pytest

from uplink_isac import linalg as la
from uplink_isac.errors import InvalidArgumentError, ModelConstructionError
from uplink_isac.scene import (Scene, SystemConfig, TargetScene,
                               build_target_response, candidate_table,
                               gen_orthogonal_waveform, gen_scene, gen_symbols,
                               qpsk, radar_operators, stack_model, steering,
                               synthesize_block)


def test_qpsk_power_and_gray_labels():
    a = qpsk(1.0, 8)
    assert np.isclose(a.mean_power, 1.0 / 8)
    # neighbours along either axis differ in exactly one bit
    for i in range(4):
        for j in range(4):
            d = abs(a.points[i] - a.points[j])
            if np.isclose(d, 2 * a.scale):
                assert np.sum(a.bits[i] != a.bits[j]) == 1
    assert np.array_equal(a.to_bits(a.points), a.bits)


def test_indices_rejects_off_grid():
    a = qpsk(1.0, 2)
    with pytest.raises(InvalidArgumentError):
        a.indices([0.1 + 0.0j])
    assert a.quantize(np.array([0.3 - 0.2j]))[0] == a.points[1]


def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        SystemConfig(L=4, M_t=4)
    with pytest.raises(InvalidArgumentError):
        SystemConfig(sigma2=0.0)
    with pytest.raises(InvalidArgumentError):
        SystemConfig(constellation="16qam")
    assert SystemConfig().snr == pytest.approx(100.0)


def test_candidate_table_lexicographic():
    a = qpsk(1.0, 2)
    T = candidate_table(a, 2)
    assert T.shape == (2, 16)
    assert np.array_equal(T[:, 0], [a.points[0]] * 2)
    assert np.array_equal(T[:, 1], [a.points[0], a.points[1]])
    assert np.array_equal(T[:, 4], [a.points[1], a.points[0]])


def test_steering_unit_norm_and_broadside():
    v = steering(8, 0.3)
    assert np.isclose(np.linalg.norm(v), 1.0)
    assert np.allclose(steering(4, 0.0), 0.5)


def test_target_response_rank():
    t = TargetScene(((0.1, -0.2, 1.0), (0.5, 0.4, 0.5j)))
    H = build_target_response(t, 8, 4)
    assert H.shape == (8, 4) and la.numerical_rank(H) == 2
    with pytest.raises(InvalidArgumentError):
        TargetScene(((2.0, 0.0, 1.0),))


@pytest.mark.parametrize("chirp", [True, False])
def test_orthogonal_waveform(chirp):
    X = gen_orthogonal_waveform(4, 20, 0.2, chirp)
    assert np.allclose(X @ X.conj().T, 0.2 * 20 / 4 * np.eye(4))
    with pytest.raises(InvalidArgumentError):
        gen_orthogonal_waveform(4, 3, 0.2)


def test_stacked_model_matches_matrix_form(rng):
    cfg = SystemConfig(M_r=3, N_t=2, M_t=2, L=5)
    scene = gen_scene(rng, cfg)
    X_c = gen_symbols(rng, cfg)
    Y = synthesize_block(scene, X_c, None, 0.0)
    m = stack_model(scene, Y)
    y = m.A_r @ la.vec(scene.H_r) + m.A_c @ la.vec(X_c)
    assert np.allclose(m.y, y)
    assert np.allclose(m.G, m.Gamma @ m.A_c)
    assert np.allclose(m.Gamma, la.kron(m.P_perp, np.eye(cfg.M_r)))
    assert (m.M_r, m.N_t, m.L, m.M_t) == (3, 2, 5, 2)


def test_rank_deficient_waveform_rejected(rng):
    X = np.ones((2, 6), dtype=complex)
    with pytest.raises(ModelConstructionError):
        radar_operators(X, 3)


def test_shape_mismatch_rejected(rng):
    cfg = SystemConfig(M_r=3, N_t=2, M_t=2, L=5)
    scene = gen_scene(rng, cfg)
    with pytest.raises(InvalidArgumentError):
        synthesize_block(scene, np.zeros((2, 4)), None, 0.0)
    with pytest.raises(InvalidArgumentError):
        stack_model(scene, np.zeros((3, 4)))


def test_scene_R_orthogonal(rng):
    cfg = SystemConfig()
    s = gen_scene(rng, cfg)
    assert isinstance(s, Scene)
    assert np.allclose(s.R, cfg.P_r / cfg.M_t * np.eye(cfg.M_t))
