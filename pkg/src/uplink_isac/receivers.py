"""Receiver chains for the uplink DFRC block.

* SIC: detect the uplink symbols treating the radar echo as noise, subtract,
  then least-squares estimate the target response.
* Projection: annihilate the radar echo with ``Gamma``, detect on the
  projected problem, then estimate the target response from the residual.
* Joint ML: brute-force oracle over the alphabet with the target response
  profiled out by least squares.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg as la
from .errors import CapacityError, InvalidArgumentError
from .scene import Constellation, StackedModel, SystemConfig, candidate_table
from .sdr import SDROptions, sdr_relax_and_round

#: Largest number of candidate vectors an exhaustive search may visit.
ENUMERATION_BUDGET = 2 ** 20
#: Per-snapshot SIC uses enumeration up to this many candidates, SDR above.
SIC_ENUMERATION_LIMIT = 2 ** 16
TIE_TOL = 1e-12
_CHUNK = 2 ** 15


class Method(str, enum.Enum):
    SIC = "sic"
    PROJECTION = "projection"
    JOINT_ML = "joint_ml"
    GENIE = "genie"


class Strategy(str, enum.Enum):
    EXHAUSTIVE = "exhaustive"
    SDR = "sdr"


@dataclass
class DetectionResult:
    x_hat: np.ndarray
    h_hat: np.ndarray
    objective: float
    method: Method
    identifiable: bool = True
    diagnostics: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# helpers


def _first_within(costs: np.ndarray, tol: float = TIE_TOL) -> int:
    """Index of the first entry within ``tol`` of the minimum."""
    return int(np.flatnonzero(costs <= costs.min() + tol)[0])


def _candidate_chunks(alphabet: Constellation, n: int):
    """Yield ``(start, X)`` with candidate vectors as columns of ``X``.

    Candidates are visited in lexicographic order of their index vectors.
    """
    q = alphabet.size
    total = q ** n
    if total > ENUMERATION_BUDGET:
        raise CapacityError(f"{q}^{n} = {total} candidates exceed the "
                            f"enumeration budget of {ENUMERATION_BUDGET}")
    if total <= _CHUNK:
        yield 0, candidate_table(alphabet, n)
        return
    powers = q ** np.arange(n - 1, -1, -1)
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total))
        idx = (codes[None, :] // powers[:, None]) % q
        yield start, alphabet.points[idx]


def _exhaustive(cost_fn, alphabet: Constellation, n: int):
    """Global minimiser of ``cost_fn`` (vectorised over columns)."""
    best_cost, best_x = np.inf, None
    for _, X in _candidate_chunks(alphabet, n):
        costs = cost_fn(X)
        k = _first_within(costs)
        # Strict improvement beyond the tie tolerance keeps the earliest
        # (lexicographically smallest) minimiser.
        if costs[k] < best_cost - TIE_TOL:
            best_cost, best_x = float(costs[k]), X[:, k].copy()
    return best_x, best_cost


def _require_qpsk(alphabet: Constellation):
    if alphabet.name != "qpsk":
        raise InvalidArgumentError(
            "the SDR detector supports QPSK only, got " + alphabet.name)


def real_decomposition(G: np.ndarray, y: np.ndarray, scale: float):
    """Map ``||y - G x||`` with ``x = scale (s_re + j s_im)`` to real form."""
    H = scale * np.block([[G.real, -G.imag], [G.imag, G.real]])
    return H, np.concatenate([y.real, y.imag])


def _sdr_detect(G, y, alphabet, rng, options, ridge, info=None):
    _require_qpsk(alphabet)
    H, b = real_decomposition(G, y, alphabet.scale)
    if options.ridge is None and ridge is not None:
        options = replace(options, ridge=ridge)
    s = sdr_relax_and_round(H, b, rng, options, info)
    n = G.shape[1]
    return alphabet.scale * (s[:n] + 1j * s[n:])


# --------------------------------------------------------------------------
# building blocks


def ls_target_estimate(model: StackedModel, x_hat) -> np.ndarray:
    """Target response ``Xi A_r^H (y - A_c x)`` given the symbols ``x``."""
    r = model.y - model.A_c @ np.asarray(x_hat)
    return model.Xi @ (model.A_r.conj().T @ r)


def project(model: StackedModel):
    """Projected observation and channel ``(Gamma y, Gamma A_c)``."""
    return model.y_tilde, model.G


def detect_projected(y_tilde, G, cfg: SystemConfig,
                     strategy: Strategy | str = Strategy.SDR,
                     rng: np.random.Generator | None = None,
                     sdr_options: SDROptions | None = None,
                     info: dict | None = None) -> np.ndarray:
    """Solve ``min ||y_tilde - G x||^2`` over alphabet-valued ``x``.

    ``G == 0`` makes every candidate equally good; the all-first-symbol
    vector is returned and ``info['identifiable']`` is set to False.
    """
    strategy = Strategy(strategy)
    alphabet = cfg.alphabet
    G = np.asarray(G)
    y_tilde = np.asarray(y_tilde)
    n = G.shape[1]
    if info is None:
        info = {}
    if not np.any(np.abs(G) > 0.0):
        info["identifiable"] = False
        return np.full(n, alphabet.points[0])
    info["identifiable"] = True
    if strategy is Strategy.EXHAUSTIVE:
        x, cost = _exhaustive(
            lambda X: np.sum(np.abs(y_tilde[:, None] - G @ X) ** 2, axis=0),
            alphabet, n)
        info["objective"] = cost
        return x
    rng = np.random.default_rng(0) if rng is None else rng
    return _sdr_detect(G, y_tilde, alphabet, rng,
                       sdr_options or SDROptions(), cfg.sigma2 / 2.0, info)


def detect_sic(model: StackedModel, cfg: SystemConfig,
               rng: np.random.Generator | None = None,
               sdr_options: SDROptions | None = None) -> np.ndarray:
    """Stage one of SIC: ``argmin ||y - A_c x||^2`` ignoring the radar echo.

    ``A_c`` is block diagonal, so the search separates into one ``N_t``-
    dimensional problem per snapshot.
    """
    alphabet = cfg.alphabet
    M_r, N_t, L = model.M_r, model.N_t, model.L
    Y = la.unvec(model.y, M_r, L)
    H = model.H_c
    if alphabet.size ** N_t <= SIC_ENUMERATION_LIMIT:
        S = candidate_table(alphabet, N_t)
        HS = H @ S
        # ||y - Hs||^2 minus the candidate-independent ||y||^2
        costs = np.sum(np.abs(HS) ** 2, axis=0) - 2.0 * np.real(Y.conj().T @ HS)
        near = costs <= costs.min(axis=1, keepdims=True) + TIE_TOL
        X = S[:, np.argmax(near, axis=1)]
    else:
        rng = np.random.default_rng(0) if rng is None else rng
        opts = sdr_options or SDROptions()
        X = np.column_stack([
            _sdr_detect(H, Y[:, l], alphabet, rng, opts, cfg.sigma2 / 2.0)
            for l in range(L)])
    return la.vec(X)


# --------------------------------------------------------------------------
# receivers


def run_sic_receiver(model: StackedModel, cfg: SystemConfig,
                     rng: np.random.Generator | None = None,
                     sdr_options: SDROptions | None = None) -> DetectionResult:
    x = detect_sic(model, cfg, rng, sdr_options)
    h = ls_target_estimate(model, x)
    obj = float(np.sum(np.abs(model.y - model.A_c @ x) ** 2))
    return DetectionResult(x, h, obj, Method.SIC)


def run_projection_receiver(model: StackedModel, cfg: SystemConfig,
                            strategy: Strategy | str = Strategy.SDR,
                            rng: np.random.Generator | None = None,
                            sdr_options: SDROptions | None = None) -> DetectionResult:
    """Project, decode, estimate."""
    y_tilde, G = project(model)
    info: dict = {}
    x = detect_projected(y_tilde, G, cfg, strategy, rng, sdr_options, info)
    h = ls_target_estimate(model, x)
    obj = float(np.sum(np.abs(y_tilde - G @ x) ** 2))
    return DetectionResult(x, h, obj, Method.PROJECTION,
                           identifiable=info.pop("identifiable"), diagnostics=info)


def run_genie_receiver(model: StackedModel, x_true) -> DetectionResult:
    """Target estimate with the transmitted symbols supplied by a genie."""
    x = np.asarray(x_true, dtype=complex)
    h = ls_target_estimate(model, x)
    obj = float(np.sum(np.abs(model.y - model.A_c @ x - model.A_r @ h) ** 2))
    return DetectionResult(x, h, obj, Method.GENIE)


def exhaustive_joint_ml(model: StackedModel, cfg: SystemConfig) -> DetectionResult:
    """Brute-force joint ML over symbols and target response.

    For every candidate ``x`` the target response is the least-squares fit
    of ``y - A_c x`` on ``A_r`` (via QR), independently of ``Gamma``/``Xi``.
    """
    A_r, A_c, y = model.A_r, model.A_c, model.y
    Q, R = np.linalg.qr(A_r, mode="reduced")
    la.ls_solve(A_r, y)  # raises on a rank-deficient A_r

    def cost(X):
        B = y[:, None] - A_c @ X
        Hh = np.linalg.solve(R, Q.conj().T @ B)
        return np.sum(np.abs(B - A_r @ Hh) ** 2, axis=0)

    x, obj = _exhaustive(cost, cfg.alphabet, A_c.shape[1])
    h = la.ls_solve(A_r, y - A_c @ x)
    return DetectionResult(x, h, obj, Method.JOINT_ML)
