"""Scene synthesis and the stacked (vectorised) observation model.

Per block of ``L`` snapshots the base station receives::

    Y = H_r X_r + H_c X_c + N

and after column-stacking ``y = A_r h_r + A_c x_c + n`` with
``A_r = X_r^T kron I_{M_r}`` and ``A_c = I_L kron H_c``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import linalg as la
from .errors import InvalidArgumentError, ModelConstructionError, SolverError

# Chirp rate of the phase modulation applied to the DFT waveform rows. Any
# irrational value keeps the waveform's row space away from the QPSK lattice.
_CHIRP_RATE = np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Finite symbol alphabet with a bit labelling.

    ``points[k]`` carries the bit pattern ``bits[k]``; index order defines
    the lexicographic tie-breaking order used by the detectors.
    """

    name: str
    points: np.ndarray
    bits: np.ndarray
    scale: float

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return self.bits.shape[1]

    def indices(self, x) -> np.ndarray:
        """Symbol indices of alphabet-exact entries ``x``."""
        x = np.asarray(x)
        d = np.abs(x[..., None] - self.points)
        idx = np.argmin(d, axis=-1)
        if np.any(np.take_along_axis(d, idx[..., None], -1) > 1e-9 * self.scale):
            raise InvalidArgumentError("entries are not constellation points")
        return idx

    def quantize(self, x) -> np.ndarray:
        """Nearest constellation point, entrywise."""
        x = np.asarray(x)
        return self.points[np.argmin(np.abs(x[..., None] - self.points), axis=-1)]

    def to_bits(self, x) -> np.ndarray:
        return self.bits[self.indices(x)]

    @property
    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))


def qpsk(P_c: float, N_t: int) -> Constellation:
    """Gray-labelled QPSK scaled to per-entry power ``P_c / N_t``.

    Bit 0 is the sign of the real part, bit 1 the sign of the imaginary
    part (1 = negative), so index ``k`` maps to ``(k >> 1, k & 1)``.
    """
    a = float(np.sqrt(P_c / (2.0 * N_t)))
    re = np.array([1.0, 1.0, -1.0, -1.0])
    im = np.array([1.0, -1.0, 1.0, -1.0])
    points = a * (re + 1j * im)
    bits = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.int8)
    return Constellation("qpsk", points, bits, a)


_CONSTELLATIONS = {"qpsk": qpsk}


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of the uplink DFRC link (powers in watts)."""

    M_t: int = 4
    M_r: int = 8
    N_t: int = 8
    L: int = 20
    P_c: float = 1.0
    P_r: float = 10 ** (-0.8)
    sigma2: float = 1e-2
    d_over_lambda: float = 0.5
    constellation: str = "qpsk"
    # Target-scene prior.
    n_paths: int = 3
    max_angle_deg: float = 60.0

    def __post_init__(self):
        for name in ("M_t", "M_r", "N_t", "L", "n_paths"):
            if int(getattr(self, name)) < 1:
                raise InvalidArgumentError(f"{name} must be >= 1")
        if self.L <= self.M_t:
            raise InvalidArgumentError(
                f"need L > M_t snapshots per block (L={self.L}, M_t={self.M_t})")
        for name in ("P_c", "P_r", "sigma2"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.constellation not in _CONSTELLATIONS:
            raise InvalidArgumentError(
                f"unknown constellation {self.constellation!r}")
        if not 0 < self.max_angle_deg < 90:
            raise InvalidArgumentError("max_angle_deg must lie in (0, 90)")

    @property
    def alphabet(self) -> Constellation:
        return _alphabet(self.constellation, self.P_c, self.N_t)

    @property
    def snr(self) -> float:
        return self.P_c / self.sigma2

    def replace(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


@lru_cache(maxsize=32)
def _alphabet(name: str, P_c: float, N_t: int) -> Constellation:
    return _CONSTELLATIONS[name](P_c, N_t)


@lru_cache(maxsize=8)
def candidate_table(alphabet: Constellation, n: int) -> np.ndarray:
    """All ``alphabet.size ** n`` symbol vectors as columns, lexicographic."""
    idx = np.array(list(itertools.product(range(alphabet.size), repeat=n)),
                   dtype=np.intp).reshape(-1, n)
    table = alphabet.points[idx.T]
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class TargetScene:
    """Radar paths as ``(phi, theta, b)``: AoA, AoD (radians), complex gain."""

    paths: tuple

    def __post_init__(self):
        if len(self.paths) < 1:
            raise InvalidArgumentError("a target scene needs at least one path")
        for phi, theta, _ in self.paths:
            if not (abs(phi) < np.pi / 2 and abs(theta) < np.pi / 2):
                raise InvalidArgumentError("path angles must lie in (-pi/2, pi/2)")


@dataclass(frozen=True, eq=False)
class Scene:
    H_c: np.ndarray
    H_r: np.ndarray
    X_r: np.ndarray
    target: TargetScene | None = None

    @property
    def R(self) -> np.ndarray:
        """Per-snapshot radar covariance ``X_r X_r^H / L``."""
        return self.X_r @ self.X_r.conj().T / self.X_r.shape[1]


@dataclass(frozen=True, eq=False)
class RadarOperators:
    """Quantities that depend only on the radar waveform and ``M_r``.

    They are shared by every trial that uses the same waveform.
    """

    A_r: np.ndarray
    Xi: np.ndarray
    Gamma: np.ndarray
    P_perp: np.ndarray


@dataclass(frozen=True, eq=False)
class StackedModel:
    y: np.ndarray
    A_r: np.ndarray
    A_c: np.ndarray
    Gamma: np.ndarray
    Xi: np.ndarray
    G: np.ndarray
    y_tilde: np.ndarray
    H_c: np.ndarray = field(repr=False)
    P_perp: np.ndarray = field(repr=False)

    @property
    def M_r(self) -> int:
        return self.H_c.shape[0]

    @property
    def N_t(self) -> int:
        return self.H_c.shape[1]

    @property
    def L(self) -> int:
        return self.A_c.shape[0] // self.M_r

    @property
    def M_t(self) -> int:
        return self.A_r.shape[1] // self.M_r


# --------------------------------------------------------------------------
# generators


def steering(M: int, alpha: float, d_over_lambda: float = 0.5) -> np.ndarray:
    """Unit-norm ULA response ``a(M, alpha)``."""
    if M < 1:
        raise InvalidArgumentError("M must be >= 1")
    k = np.arange(M)
    return np.exp(-2j * np.pi * k * d_over_lambda * np.sin(alpha)) / np.sqrt(M)


def build_target_response(target: TargetScene, M_r: int, M_t: int,
                          d_over_lambda: float = 0.5) -> np.ndarray:
    H = np.zeros((M_r, M_t), dtype=complex)
    for phi, theta, b in target.paths:
        H += b * np.outer(steering(M_r, phi, d_over_lambda),
                          steering(M_t, theta, d_over_lambda).conj())
    return H


def gen_target_scene(rng: np.random.Generator, cfg: SystemConfig) -> TargetScene:
    """Draw ``cfg.n_paths`` paths: uniform angles, CN(0, 1) gains."""
    lim = np.deg2rad(cfg.max_angle_deg)
    angles = rng.uniform(-lim, lim, size=(cfg.n_paths, 2))
    gains = (rng.standard_normal(cfg.n_paths)
             + 1j * rng.standard_normal(cfg.n_paths)) / np.sqrt(2.0)
    return TargetScene(tuple((float(p), float(t), complex(b))
                             for (p, t), b in zip(angles, gains)))


def gen_comm_channel(rng: np.random.Generator, M_r: int, N_t: int) -> np.ndarray:
    """i.i.d. Rayleigh channel with unit-variance entries."""
    return (rng.standard_normal((M_r, N_t))
            + 1j * rng.standard_normal((M_r, N_t))) / np.sqrt(2.0)


def gen_orthogonal_waveform(M_t: int, L: int, P_r: float,
                            chirp: bool = True) -> np.ndarray:
    """Radar block with ``X_r X_r^H = (P_r L / M_t) I``.

    Rows are the first ``M_t`` DFT rows of length ``L``; with ``chirp`` each
    snapshot is additionally rotated by a quadratic phase, which keeps the
    rows orthogonal.
    """
    if L < M_t:
        raise InvalidArgumentError(f"orthogonal waveform needs L >= M_t "
                                   f"(L={L}, M_t={M_t})")
    if P_r < 0:
        raise InvalidArgumentError("P_r must be non-negative")
    l = np.arange(L)
    X = np.exp(-2j * np.pi * np.outer(np.arange(M_t), l) / L)
    if chirp:
        X = X * np.exp(-1j * np.pi * _CHIRP_RATE * l ** 2)
    return np.sqrt(P_r / M_t) * X


def gen_symbols(rng: np.random.Generator, cfg: SystemConfig,
                L: int | None = None) -> np.ndarray:
    """``N_t x L`` block of uniformly drawn constellation symbols."""
    L = cfg.L if L is None else L
    alphabet = cfg.alphabet
    return alphabet.points[rng.integers(0, alphabet.size, size=(cfg.N_t, L))]


def complex_noise(rng: np.random.Generator, shape, sigma2: float) -> np.ndarray:
    s = np.sqrt(sigma2 / 2.0)
    return s * rng.standard_normal(shape) + 1j * s * rng.standard_normal(shape)


def gen_scene(rng: np.random.Generator, cfg: SystemConfig,
              X_r: np.ndarray | None = None) -> Scene:
    """Draw ``H_c`` and a target scene; ``X_r`` defaults to the orthogonal
    waveform of ``cfg``."""
    if X_r is None:
        X_r = gen_orthogonal_waveform(cfg.M_t, cfg.L, cfg.P_r)
    H_c = gen_comm_channel(rng, cfg.M_r, cfg.N_t)
    target = gen_target_scene(rng, cfg)
    H_r = build_target_response(target, cfg.M_r, cfg.M_t, cfg.d_over_lambda)
    return Scene(H_c=H_c, H_r=H_r, X_r=X_r, target=target)


def synthesize_block(scene: Scene, X_c, rng: np.random.Generator | None,
                     sigma2: float) -> np.ndarray:
    """Received block ``Y = H_r X_r + H_c X_c + N``."""
    X_c = np.asarray(X_c, dtype=complex)
    M_r, N_t = scene.H_c.shape
    M_t, L = scene.X_r.shape
    if scene.H_r.shape != (M_r, M_t) or X_c.shape != (N_t, L):
        raise InvalidArgumentError(
            f"dimension mismatch: H_c {scene.H_c.shape}, H_r {scene.H_r.shape}, "
            f"X_r {scene.X_r.shape}, X_c {X_c.shape}")
    Y = scene.H_r @ scene.X_r + scene.H_c @ X_c
    if sigma2 > 0:
        Y = Y + complex_noise(rng, Y.shape, sigma2)
    return Y


# --------------------------------------------------------------------------
# stacked model


def radar_operators(X_r, M_r: int) -> RadarOperators:
    """``A_r``, ``Xi = (A_r^H A_r)^{-1}``, ``Gamma`` and ``P_perp`` for ``X_r``."""
    X_r = la.as_matrix(X_r)
    A_r = la.kron(X_r.T, np.eye(M_r))
    try:
        Xi = la.gram_inverse(A_r, name="A_r")
    except SolverError as exc:
        raise ModelConstructionError(
            "radar waveform X_r^T is not full column rank", **exc.diagnostics
        ) from exc
    Gamma = la.orth_complement_projector(A_r, name="A_r", gram_inv=Xi)
    XrT = X_r.T
    P_perp = np.eye(X_r.shape[1]) - XrT @ np.linalg.solve(X_r.conj() @ XrT,
                                                          X_r.conj())
    return RadarOperators(A_r=A_r, Xi=Xi, Gamma=Gamma,
                          P_perp=0.5 * (P_perp + P_perp.conj().T))


def apply_block_diagonal(M: np.ndarray, H: np.ndarray, L: int) -> np.ndarray:
    """``M @ kron(I_L, H)`` without forming the Kronecker product."""
    r, c = H.shape
    return (M.reshape(M.shape[0], L, r) @ H).reshape(M.shape[0], L * c)


def stack_model(scene: Scene, Y, radar: RadarOperators | None = None) -> StackedModel:
    """Vectorise ``Y`` and assemble every operator of the projection receiver."""
    Y = la.as_matrix(Y)
    M_r, N_t = scene.H_c.shape
    L = scene.X_r.shape[1]
    if Y.shape != (M_r, L):
        raise InvalidArgumentError(f"Y has shape {Y.shape}, expected {(M_r, L)}")
    if radar is None:
        radar = radar_operators(scene.X_r, M_r)
    y = la.vec(Y)
    A_c = la.kron(np.eye(L), scene.H_c)
    G = apply_block_diagonal(radar.Gamma, scene.H_c, L)
    return StackedModel(y=y, A_r=radar.A_r, A_c=A_c, Gamma=radar.Gamma,
                        Xi=radar.Xi, G=G, y_tilde=radar.Gamma @ y,
                        H_c=scene.H_c, P_perp=radar.P_perp)


def with_projector(model: StackedModel, Gamma: np.ndarray) -> StackedModel:
    """Copy of ``model`` whose projection operators use ``Gamma`` instead."""
    return replace(model, Gamma=Gamma,
                   G=apply_block_diagonal(Gamma, model.H_c, model.L),
                   y_tilde=Gamma @ model.y)
