import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uplink_isac import analysis as an
from uplink_isac.errors import InvalidArgumentError
from uplink_isac.scene import (SystemConfig, apply_block_diagonal,
                               gen_comm_channel, gen_orthogonal_waveform,
                               radar_operators)

CFG = SystemConfig()


def test_crb_closed_form_value():
    # sigma2 M_r M_t^2 / (L P_r) at the default point
    assert an.crb_orthogonal(CFG) == pytest.approx(0.01 * 8 * 16 / (20 * 10 ** -0.8))
    assert an.crb_orthogonal(CFG) == pytest.approx(0.40381, abs=1e-5)
    X = gen_orthogonal_waveform(CFG.M_t, CFG.L, CFG.P_r)
    R = X @ X.conj().T / CFG.L
    assert an.crb_target_response(R, CFG.sigma2, CFG.M_r, CFG.L) == pytest.approx(
        an.crb_orthogonal(CFG))


def test_crb_orthogonal_is_minimal(rng):
    # any other covariance with the same trace costs more
    B = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    R = B @ B.conj().T
    R *= CFG.P_r / np.trace(R).real
    assert an.crb_target_response(R, CFG.sigma2, 8, 20) > an.crb_orthogonal(CFG)
    with pytest.raises(InvalidArgumentError):
        an.crb_target_response(np.diag([1.0, 0.0]), 1.0, 2, 4)


@settings(max_examples=50, deadline=None)
@given(lam=st.lists(st.one_of(st.just(0.0), st.floats(1e-9, 50.0)),
                   min_size=1, max_size=8),
       snr=st.floats(0.1, 1e3), P=st.floats(0.01, 10.0))
def test_waterfill_properties(lam, snr, P):
    lam = np.array(lam)
    if not np.any(lam > 0):
        with pytest.raises(InvalidArgumentError):
            an.waterfill(lam, snr, P)
        return
    p = an.waterfill(lam, snr, P)
    assert np.all(p >= 0)
    assert np.isclose(p.sum(), P)
    assert an.waterfill_kkt_residual(lam, snr, p) < 1e-8


def test_rates_ordering(rng):
    H = gen_comm_channel(rng, 8, 8)
    snr = an.snr_projected_theory(CFG)
    rep = an.ergodic_rates(H, CFG, 0.5 * snr)
    assert rep.rate_projection == pytest.approx(0.8 * rep.rate_comm_only, rel=1e-12)
    assert rep.rate_sic < rep.rate_comm_only
    with pytest.raises(InvalidArgumentError):
        an.ergodic_rates(H, CFG, 2 * snr)


def test_projection_rate_from_G(rng):
    H = gen_comm_channel(rng, CFG.M_r, CFG.N_t)
    X = gen_orthogonal_waveform(CFG.M_t, CFG.L, CFG.P_r)
    G = apply_block_diagonal(radar_operators(X, CFG.M_r).Gamma, H, CFG.L)
    rep = an.ergodic_rates(H, CFG, 1.0)
    assert an.projection_rate_from_G(G, CFG) == pytest.approx(rep.rate_projection,
                                                              rel=1e-6)


def test_sinr_conditional_bounded(rng):
    X = gen_orthogonal_waveform(CFG.M_t, CFG.L, CFG.P_r)
    H_c = gen_comm_channel(rng, 8, 8) * 3.0
    H_r = gen_comm_channel(rng, 8, 4)
    assert an.sinr_sic_conditional(H_c, H_r, X, CFG) < an.snr_projected_theory(CFG)


def test_link_metrics():
    a = CFG.alphabet
    x = np.full(8, a.points[0])
    y = x.copy()
    y[0] = a.points[3]  # both bits wrong
    assert an.ber(x, y, CFG) == pytest.approx(2 / 16)
    assert an.bler(x, y, 4) == pytest.approx(0.5)
    assert an.nmse(np.ones(4), np.zeros(4)) == 1.0
    with pytest.raises(InvalidArgumentError):
        an.bler(x, y, 3)
    with pytest.raises(InvalidArgumentError):
        an.nmse(np.zeros(2), np.ones(2))


def test_accumulators_merge_order_free(rng):
    v = rng.standard_normal(50)
    w = rng.uniform(1, 2, 50)
    a, b, c = an.MeanAccumulator(), an.MeanAccumulator(), an.MeanAccumulator()
    r1, r2 = an.RatioAccumulator(), an.RatioAccumulator()
    for i, (x, d) in enumerate(zip(v, w)):
        c.add(x)
        (a if i % 2 else b).add(x)
        (r1 if i < 20 else r2).add(x, d)
    m = a.merge(b)
    assert m.mean == pytest.approx(c.mean) and m.std_err == pytest.approx(c.std_err)
    assert c.std_err == pytest.approx(np.std(v, ddof=1) / np.sqrt(50))
    assert r1.merge(r2).mean == pytest.approx(v.sum() / w.sum())


def test_metrics_record_validation():
    kw = dict(sweep_var="L", sweep_value=20, scheme="sic", bler=0.1, nmse=0.1,
              crb=0.1, rate=1.0, snr_proj_empirical=100.0,
              sinr_sic_empirical=50.0, trials=1, seed=0)
    an.MetricsRecord(ber=0.05, **kw)
    with pytest.raises(InvalidArgumentError):
        an.MetricsRecord(ber=0.5, **kw)
    with pytest.raises(InvalidArgumentError):
        an.MetricsRecord(ber=float("nan"), **kw)


def test_sinr_theory_matches_simulation(rng):
    sim = an.sinr_sic_empirical(CFG, 2000, rng)
    assert sim == pytest.approx(an.sinr_sic_theory(CFG), rel=0.05)
