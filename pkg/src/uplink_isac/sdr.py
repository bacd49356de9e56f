"""Semidefinite relaxation of binary least squares.

Solves ``min_s ||b - H s||^2`` over ``s in {-1, +1}^n`` approximately:

1. homogenise with an extra variable ``t = 1`` so the cost becomes
   ``z^T C z`` with ``z = [s; t]``;
2. relax ``z z^T`` to ``X = V V^T`` with unit-norm rows of ``V`` (the
   unit-diagonal SDP in low-rank factored form) and minimise by
   block-coordinate descent, renormalising each row after its update;
3. draw Gaussian directions, take signs, keep the cheapest candidate;
4. polish it by greedy single-sign flips while any flip lowers the cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import InvalidArgumentError, SolverError


@dataclass(frozen=True)
class SDROptions:
    rounding_samples: int = 100
    rank: int = 8
    tol: float = 1e-4
    max_sweeps: int = 5000
    warm_start: bool = True
    local_search: bool = True
    polish_candidates: int = 5
    # Tikhonov weight of the warm-start solve; None picks 1e-2 * mean(diag(H^T H)).
    ridge: float | None = None


@numba.njit(cache=True, nogil=True)
def _coordinate_descent(C, V, max_sweeps, tol):
    """Row-wise minimisation of ``tr(C V V^T)`` subject to ``||V[i]|| = 1``.

    Returns ``(sweeps, objective, last_decrease)``; ``sweeps == -1`` when the
    relative decrease never fell below ``tol``.
    """
    n, r = V.shape
    CV = C @ V
    f = 0.0
    for i in range(n):
        for k in range(r):
            f += CV[i, k] * V[i, k]
    delta = 0.0
    for sweep in range(max_sweeps):
        delta = 0.0
        for i in range(n):
            g = C[i] @ V
            cii = C[i, i]
            nrm2 = 0.0
            for k in range(r):
                g[k] -= cii * V[i, k]
                nrm2 += g[k] * g[k]
            if nrm2 > 0.0:
                nrm = np.sqrt(nrm2)
                for k in range(r):
                    new = -g[k] / nrm
                    delta += 2.0 * (new - V[i, k]) * g[k]
                    V[i, k] = new
        f += delta
        if -delta <= tol * max(1.0, abs(f)):
            return sweep + 1, f, -delta
    return -1, f, -delta


@numba.njit(cache=True, nogil=True)
def _flip_descent(C, z):
    """Flip one or two entries of ``z[:-1]`` while that lowers ``z^T C z``.

    Flipping entry ``i`` changes the cost by ``d_i = 4 (C_ii - z_i (C z)_i)``;
    flipping ``i`` and ``j`` together by ``d_i + d_j + 8 z_i z_j C_ij``.
    Pairs are only tried once no single flip helps.  Returns the number of
    moves made.
    """
    n = z.size - 1
    Cz = C @ z
    d = np.empty(n)
    moves = 0
    while True:
        for i in range(n):
            d[i] = 4.0 * (C[i, i] - z[i] * Cz[i])
        thresh = -1e-12 * abs(z @ Cz)
        best, bi, bj = thresh, -1, -1
        for i in range(n):
            if d[i] < best:
                best, bi = d[i], i
        if bi < 0:
            for i in range(n):
                for j in range(i + 1, n):
                    v = d[i] + d[j] + 8.0 * z[i] * z[j] * C[i, j]
                    if v < best:
                        best, bi, bj = v, i, j
        if bi < 0:
            return moves
        for k in (bi, bj):
            if k >= 0:
                z[k] = -z[k]
                Cz += 2.0 * z[k] * C[:, k]
        moves += 1


def lifted_cost(H: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``C`` with ``[s; 1]^T C [s; 1] = ||b - H s||^2``."""
    n = H.shape[1]
    c = H.T @ b
    C = np.empty((n + 1, n + 1))
    C[:n, :n] = H.T @ H
    C[:n, n] = -c
    C[n, :n] = -c
    C[n, n] = b @ b
    return C


def _initial_factor(C, rng, rank, warm_start, ridge):
    n = C.shape[0] - 1
    V = rng.standard_normal((n + 1, rank))
    if warm_start and rank > 1:
        Q = C[:n, :n]
        if ridge is None:
            ridge = 1e-2 * max(float(np.mean(np.diag(Q))), 1e-300)
        z = np.clip(np.linalg.solve(Q + ridge * np.eye(n), -C[:n, n]), -1.0, 1.0)
        V[:, 0] = 0.0
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        V[:n] *= np.sqrt(1.0 - z ** 2)[:, None]
        V[:n, 0] = z
        V[n] = 0.0
        V[n, 0] = 1.0
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    return V


def sdr_relax_and_round(H_real, b_real, rng: np.random.Generator,
                        options: SDROptions | None = None,
                        info: dict | None = None) -> np.ndarray:
    """Approximate ``argmin ||b - H s||^2`` over sign vectors ``s``.

    Parameters
    ----------
    H_real : (m, n) real array
    b_real : (m,) real array
    rng : numpy Generator driving the initial factor and the rounding.
    options : solver settings, see :class:`SDROptions`.
    info : optional dict that receives solver diagnostics.

    Returns
    -------
    s : (n,) array of +-1.0
    """
    opts = options or SDROptions()
    H = np.asarray(H_real, dtype=float)
    b = np.asarray(b_real, dtype=float)
    if H.ndim != 2 or b.shape != (H.shape[0],):
        raise InvalidArgumentError("H must be (m, n) and b of length m")
    n = H.shape[1]
    C = lifted_cost(H, b)
    rank = max(1, min(opts.rank, n + 1))
    V = _initial_factor(C, rng, rank, opts.warm_start, opts.ridge)
    sweeps, relaxed, last = _coordinate_descent(C, V, opts.max_sweeps, opts.tol)
    if sweeps < 0:
        raise SolverError("SDR coordinate descent did not converge",
                          sweeps=opts.max_sweeps, objective=relaxed,
                          last_decrease=last, tol=opts.tol, n=n)

    # Candidate 0: signs of the dominant direction of V V^T.
    u = np.linalg.svd(V, full_matrices=False)[0][:, 0]
    Z = np.sign(np.column_stack(
        [u, V @ rng.standard_normal((rank, opts.rounding_samples))]))
    Z[Z == 0] = 1.0
    Z *= Z[n]
    costs = np.einsum("ik,ik->k", Z, C @ Z)
    best = int(np.argmin(costs))
    z, f, moves = Z[:, best].copy(), float(costs[best]), 0
    if opts.local_search:
        # Polish the cheapest few distinct candidates and keep the best.
        # Polishing never raises a cost, so the result beats every candidate.
        _, first = np.unique(Z.T, axis=0, return_index=True)
        f = np.inf
        for k in sorted(first, key=lambda k: (costs[k], k))[:opts.polish_candidates]:
            zk = Z[:, k].copy()
            mk = _flip_descent(C, zk)
            fk = float(zk @ C @ zk)
            if fk < f:
                z, f, moves = zk, fk, mk
    if info is not None:
        info.update(sweeps=sweeps, relaxed_objective=relaxed,
                    rounded_objective=float(costs[best]), objective=f,
                    flip_moves=moves, candidates=Z.shape[1])
    return z[:n]
