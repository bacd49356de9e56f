"""Closed-form and empirical performance measures.

Covers the projected-problem SNR and the SIC SINR, the Cramer-Rao bound of
the vectorised target response, water-filling rates of the comm-only, SIC
and projection receivers, and the BER / BLER / NMSE link metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import InvalidArgumentError
from .scene import (SystemConfig, apply_block_diagonal, complex_noise,
                    gen_orthogonal_waveform, gen_scene, gen_symbols,
                    radar_operators)

# --------------------------------------------------------------------------
# SNR / SINR


def snr_projected_theory(cfg: SystemConfig) -> float:
    """SNR of the projected detection problem, equal to ``P_c / sigma2``."""
    if not cfg.sigma2 > 0:
        raise InvalidArgumentError("sigma2 must be positive")
    return cfg.P_c / cfg.sigma2


def _power_draws(cfg: SystemConfig, trials: int, rng: np.random.Generator):
    """Per-draw energies of every signal component in one received block."""
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    X_r = gen_orthogonal_waveform(cfg.M_t, cfg.L, cfg.P_r)
    Gamma = radar_operators(X_r, cfg.M_r).Gamma
    out = np.empty((trials, 5))
    for t in range(trials):
        scene = gen_scene(rng, cfg, X_r)
        X_c = gen_symbols(rng, cfg)
        n = la.vec(complex_noise(rng, (cfg.M_r, cfg.L), cfg.sigma2))
        x = la.vec(X_c)
        G = apply_block_diagonal(Gamma, scene.H_c, cfg.L)
        out[t] = (np.sum(np.abs(G @ x) ** 2),
                  np.sum(np.abs(Gamma @ n) ** 2),
                  np.sum(np.abs(scene.H_c @ X_c) ** 2),
                  np.sum(np.abs(scene.H_r @ X_r) ** 2),
                  np.sum(np.abs(n) ** 2))
    return out


def snr_projected_empirical(cfg: SystemConfig, trials: int,
                            rng: np.random.Generator) -> float:
    """Monte Carlo ``E||Gamma A_c x||^2 / E||Gamma n||^2``."""
    p = _power_draws(cfg, trials, rng)
    return float(p[:, 0].sum() / p[:, 1].sum())


def sinr_sic_empirical(cfg: SystemConfig, trials: int,
                       rng: np.random.Generator) -> float:
    """Monte Carlo ``E||A_c x||^2 / (E||A_r h_r||^2 + E||n||^2)``."""
    p = _power_draws(cfg, trials, rng)
    return float(p[:, 2].sum() / (p[:, 3].sum() + p[:, 4].sum()))


def sinr_sic_theory(cfg: SystemConfig) -> float:
    """``E||A_c x||^2 / (E||A_r h_r||^2 + E||n||^2)`` in closed form.

    Assumes the orthogonal waveform and the scene prior of
    :func:`~uplink_isac.scene.gen_target_scene` (unit-norm steering vectors,
    unit-power gains), so ``E||H_r||_F^2 = n_paths``.
    """
    return cfg.M_r * cfg.P_c / (cfg.P_r * cfg.n_paths / cfg.M_t + cfg.M_r * cfg.sigma2)


def sinr_sic_conditional(H_c, H_r, X_r, cfg: SystemConfig) -> float:
    """SIC SINR for one fixed scene, referred to the transmit side.

    The radar echo counts as extra noise of power ``||H_r X_r||^2 / (L M_r)``
    per receive antenna and snapshot; the channel gain itself is left to the
    eigenvalues of ``H_c^H H_c`` in the rate formulas, so the result never
    exceeds ``P_c / sigma2``.
    """
    M_r, L = H_c.shape[0], X_r.shape[1]
    interference = float(np.sum(np.abs(H_r @ X_r) ** 2)) / (L * M_r)
    return cfg.P_c / (cfg.sigma2 + interference)


# --------------------------------------------------------------------------
# sensing bound


def crb_target_response(R, sigma2: float, M_r: int, L: int) -> float:
    """Total CRB of ``vec(H_r)``: ``sigma2 M_r / L * Tr(R^{-1})``."""
    R = la.as_matrix(R)
    w = np.linalg.eigvalsh(0.5 * (R + R.conj().T))
    if w.size == 0 or w[0] <= 1e-12 * max(w[-1], 1e-300):
        raise InvalidArgumentError("radar covariance R is singular")
    return float(sigma2 * M_r / L * np.sum(1.0 / w))


def crb_orthogonal(cfg: SystemConfig) -> float:
    """Minimum CRB under ``Tr(R) <= P_r``, reached by ``R = P_r/M_t I``."""
    return cfg.sigma2 * cfg.M_r * cfg.M_t ** 2 / (cfg.L * cfg.P_r)


# --------------------------------------------------------------------------
# rates


def waterfill(eigenvalues, snr_per_unit: float, total_power: float) -> np.ndarray:
    """Power split maximising ``sum log2(1 + snr * lam_j * P_j)``.

    Returns ``P_j = max(0, mu - 1 / (snr lam_j))`` with the water level
    ``mu`` set so the powers sum to ``total_power``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(lam < 0):
        raise InvalidArgumentError("eigenvalues must be non-negative")
    if not total_power > 0:
        raise InvalidArgumentError("total_power must be positive")
    gains = snr_per_unit * lam
    order = np.argsort(gains)[::-1]
    g = gains[order]
    with np.errstate(divide="ignore", over="ignore"):
        inv = 1.0 / g
    if not np.isfinite(inv[0]):
        raise InvalidArgumentError("no channel has a positive gain")
    # A mode can only be active if 1/g < total_power + 1/g_max.
    n_pos = int(np.sum(inv <= total_power + inv[0]))
    # The water level test mu > 1/g_k and the powers mu - 1/g_j are written
    # as differences of inverse gains to avoid cancellation when every
    # inverse gain dwarfs total_power.
    for k in range(n_pos, 0, -1):
        if total_power > np.sum(inv[k - 1] - inv[:k]):
            break
    act = inv[:k]
    P = np.zeros_like(lam)
    P[order[:k]] = (total_power + np.sum(act[None, :] - act[:, None], axis=1)) / k
    return P


def waterfill_kkt_residual(eigenvalues, snr_per_unit: float, powers) -> float:
    """Largest violation of the water-filling optimality conditions."""
    g = snr_per_unit * np.asarray(eigenvalues, dtype=float)
    P = np.asarray(powers, dtype=float)
    active = P > 0
    marginal = g / (1.0 + g * P)
    nu = marginal[active].max()
    res = np.max(np.abs(marginal[active] - nu)) / nu
    if np.any(~active):
        res = max(res, float(np.max(marginal[~active] - nu, initial=0.0)) / nu)
    return float(res)


def _rate(lam, snr, P) -> float:
    return float(np.sum(np.log2(1.0 + snr * lam * P)))


@dataclass(frozen=True)
class RateReport:
    eigenvalues: np.ndarray
    powers: np.ndarray
    powers_sic: np.ndarray
    rate_comm_only: float
    rate_sic: float
    rate_projection: float


def ergodic_rates(H_c, cfg: SystemConfig, sinr_sic: float,
                  total_power: float = 1.0) -> RateReport:
    """Achievable rates (bit/s/Hz per snapshot) for one channel realisation.

    The per-snapshot power split is normalised to ``total_power`` (1 means
    the ``P_c`` budget, whose scale already sits in the SNR).
    """
    H_c = la.as_matrix(H_c)
    snr = snr_projected_theory(cfg)
    if sinr_sic > snr * (1 + 1e-12):
        raise InvalidArgumentError("SIC SINR cannot exceed the comm-only SNR")
    lam = np.clip(la.hermitian_eig(H_c.conj().T @ H_c)[0], 0.0, None)
    P1 = waterfill(lam, snr, total_power)
    P2 = waterfill(lam, sinr_sic, total_power) if sinr_sic > 0 else np.zeros_like(lam)
    comm = _rate(lam, snr, P1)
    return RateReport(eigenvalues=lam, powers=P1, powers_sic=P2,
                      rate_comm_only=comm, rate_sic=_rate(lam, sinr_sic, P2),
                      rate_projection=(1.0 - cfg.M_t / cfg.L) * comm)


def projection_rate_from_G(G, cfg: SystemConfig, total_power: float = 1.0,
                           tol: float = la.RANK_TOL) -> float:
    """Projection rate straight from the eigenvalues of ``G^H G``.

    Water-fills over the non-zero eigenmodes with a budget of one
    per-snapshot ``total_power`` per unprojected snapshot (``L - M_t``) and
    normalises the mutual information by ``L``.
    """
    lam = np.linalg.eigvalsh(la.as_matrix(G).conj().T @ G)
    lam = lam[lam > tol * lam.max()]
    snr = snr_projected_theory(cfg)
    P = waterfill(lam, snr, (cfg.L - cfg.M_t) * total_power)
    return _rate(lam, snr, P) / cfg.L


# --------------------------------------------------------------------------
# link metrics


def ber(x_true, x_hat, cfg: SystemConfig) -> float:
    """Fraction of wrong bits under the constellation's labelling."""
    x_true, x_hat = np.asarray(x_true), np.asarray(x_hat)
    if x_true.shape != x_hat.shape:
        raise InvalidArgumentError("x_true and x_hat differ in length")
    a = cfg.alphabet
    return float(np.mean(a.to_bits(x_true) != a.to_bits(x_hat)))


def bler(x_true, x_hat, block_symbols: int) -> float:
    """Fraction of blocks of ``block_symbols`` symbols with any error."""
    x_true, x_hat = np.asarray(x_true), np.asarray(x_hat)
    if x_true.shape != x_hat.shape:
        raise InvalidArgumentError("x_true and x_hat differ in length")
    if block_symbols < 1 or x_true.size % block_symbols:
        raise InvalidArgumentError(
            f"length {x_true.size} is not a multiple of {block_symbols}")
    wrong = (x_true != x_hat).reshape(-1, block_symbols)
    return float(np.mean(np.any(wrong, axis=1)))


def nmse(h_true, h_hat) -> float:
    h_true, h_hat = np.asarray(h_true), np.asarray(h_hat)
    ref = float(np.sum(np.abs(h_true) ** 2))
    if ref == 0.0:
        raise InvalidArgumentError("h_true is zero")
    return float(np.sum(np.abs(h_hat - h_true) ** 2)) / ref


# --------------------------------------------------------------------------
# aggregation


@dataclass
class MeanAccumulator:
    """Running mean / standard error; ``merge`` is associative."""

    n: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    def add(self, x: float) -> None:
        self.n += 1
        self.total += x
        self.total_sq += x * x

    def merge(self, other: "MeanAccumulator") -> "MeanAccumulator":
        return MeanAccumulator(self.n + other.n, self.total + other.total,
                               self.total_sq + other.total_sq)

    @property
    def mean(self) -> float:
        return self.total / self.n if self.n else float("nan")

    @property
    def std_err(self) -> float:
        if self.n < 2:
            return 0.0
        var = (self.total_sq - self.total ** 2 / self.n) / (self.n - 1)
        return float(np.sqrt(max(var, 0.0) / self.n))


@dataclass
class RatioAccumulator:
    """Ratio of means ``sum(num) / sum(den)`` with a delta-method error."""

    num: MeanAccumulator = field(default_factory=MeanAccumulator)
    den: MeanAccumulator = field(default_factory=MeanAccumulator)
    cross: float = 0.0

    def add(self, num: float, den: float) -> None:
        self.num.add(num)
        self.den.add(den)
        self.cross += num * den

    def merge(self, other: "RatioAccumulator") -> "RatioAccumulator":
        return RatioAccumulator(self.num.merge(other.num),
                                self.den.merge(other.den),
                                self.cross + other.cross)

    @property
    def mean(self) -> float:
        return self.num.total / self.den.total if self.den.total else float("nan")

    @property
    def std_err(self) -> float:
        n = self.num.n
        if n < 2 or self.den.total == 0:
            return 0.0
        mx, my = self.num.mean, self.den.mean
        vx = (self.num.total_sq - n * mx * mx) / (n - 1)
        vy = (self.den.total_sq - n * my * my) / (n - 1)
        cxy = (self.cross - n * mx * my) / (n - 1)
        r = mx / my
        var = (vx - 2 * r * cxy + r * r * vy) / (my * my * n)
        return float(np.sqrt(max(var, 0.0)))


METRICS = ("ber", "bler", "nmse", "crb", "rate",
           "snr_proj_empirical", "sinr_sic_empirical")


@dataclass
class MetricsRecord:
    """Aggregated metrics of one scheme at one sweep point.

    ``crb`` is the orthogonal-waveform CRB normalised by each trial's
    ``||h_r||^2`` (the NMSE floor); ``rate`` is the scheme's achievable rate.
    """

    sweep_var: str
    sweep_value: float
    scheme: str
    ber: float
    bler: float
    nmse: float
    crb: float
    rate: float
    snr_proj_empirical: float
    sinr_sic_empirical: float
    trials: int
    seed: int
    std_err: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = [getattr(self, m) for m in METRICS]
        if not all(np.isfinite(vals)):
            raise InvalidArgumentError(f"non-finite metric in {self}")
        if self.ber > self.bler + 1e-15:
            raise InvalidArgumentError("BER exceeds BLER")
