import numpy as np
import pytest

from uplink_isac.errors import InvalidArgumentError, SolverError
from uplink_isac.sdr import SDROptions, lifted_cost, sdr_relax_and_round


def test_lifted_cost_reproduces_objective(rng):
    H, b = rng.standard_normal((6, 4)), rng.standard_normal(6)
    s = np.sign(rng.standard_normal(4))
    z = np.r_[s, 1.0]
    assert np.isclose(z @ lifted_cost(H, b) @ z, np.sum((b - H @ s) ** 2))


def test_recovers_signs_in_easy_problem(rng):
    H = rng.standard_normal((20, 8))
    s = np.sign(rng.standard_normal(8))
    info = {}
    b = H @ s + 0.01 * rng.standard_normal(20)
    out = sdr_relax_and_round(H, b, rng, info=info)
    assert np.array_equal(out, s)
    assert np.isclose(info["rounded_objective"], np.sum((b - H @ out) ** 2))


def test_cold_start_also_works(rng):
    H = rng.standard_normal((12, 5))
    s = np.sign(rng.standard_normal(5))
    out = sdr_relax_and_round(H, H @ s, rng,
                              SDROptions(warm_start=False, tol=1e-6))
    assert np.array_equal(out, s)


def test_non_convergence_raises_with_diagnostics(rng):
    H = rng.standard_normal((30, 20))
    b = rng.standard_normal(30)
    with pytest.raises(SolverError) as exc:
        sdr_relax_and_round(H, b, rng, SDROptions(max_sweeps=1, tol=0.0,
                                                  warm_start=False))
    assert exc.value.diagnostics["sweeps"] == 1


def test_shape_validation(rng):
    with pytest.raises(InvalidArgumentError):
        sdr_relax_and_round(np.ones((3, 2)), np.ones(2), rng)


def test_local_search_never_worse(rng):
    for _ in range(20):
        H, b = rng.standard_normal((10, 12)), rng.standard_normal(10)
        plain, polished = {}, {}
        sdr_relax_and_round(H, b, np.random.default_rng(1),
                            SDROptions(local_search=False), info=plain)
        sdr_relax_and_round(H, b, np.random.default_rng(1), info=polished)
        assert polished["objective"] <= plain["rounded_objective"] + 1e-12
        assert polished["rounded_objective"] == plain["rounded_objective"]
