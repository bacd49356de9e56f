"""Self-check suite over small seeded instances.

Each check reports the worst residual it measured against its tolerance.
``projector`` lets callers swap in a different ``Gamma`` construction, which
is how the suite is shown to catch a broken projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import analysis as an
from . import linalg as la
from .receivers import (Strategy, detect_projected, exhaustive_joint_ml,
                        ls_target_estimate)
from .scene import (SystemConfig, apply_block_diagonal, gen_comm_channel,
                    gen_orthogonal_waveform, gen_scene, gen_symbols, radar_operators, stack_model,
                    synthesize_block, with_projector)

TINY = SystemConfig(M_t=1, M_r=2, N_t=2, L=4)
DEFAULT = SystemConfig()


@dataclass(frozen=True)
class Check:
    name: str
    tolerance: float
    residual: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


@dataclass(frozen=True)
class VerifyReport:
    seed: int
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def format(self) -> str:
        lines = [f"verify seed={self.seed}"]
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            lines.append(f"  [{flag}] {c.name:<28} residual={c.residual:.3e} "
                         f"tol={c.tolerance:.1e}")
        lines.append("all checks passed" if self.passed else "FAILED")
        return "\n".join(lines)


def _tiny_model(rng, cfg, projector=None):
    scene = gen_scene(rng, cfg)
    X_c = gen_symbols(rng, cfg)
    model = stack_model(scene, synthesize_block(scene, X_c, rng, cfg.sigma2))
    if projector is not None:
        model = with_projector(model, projector(model.A_r))
    return model


def check_ls_identity(rng, count=100) -> Check:
    worst = 0.0
    for _ in range(count):
        m = int(rng.integers(3, 9))
        n = int(rng.integers(1, m))
        A = la.as_matrix(rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))
        b = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x_ls = la.ls_solve(A, b)
        Gamma = la.orth_complement_projector(A)
        lhs = np.sum(np.abs(b - A @ x) ** 2)
        rhs = np.sum(np.abs(A @ (x - x_ls)) ** 2) + np.real(b.conj() @ Gamma @ b)
        worst = max(worst, abs(lhs - rhs) / lhs)
    return Check("ls_decomposition_identity", 1e-9, worst)


def check_projector(rng, cfg=DEFAULT, count=5) -> list:
    herm = idem = annih = 0.0
    rank_err = eig_err = 0
    for _ in range(count):
        model = _tiny_model(rng, cfg)
        G = model.Gamma
        herm = max(herm, np.linalg.norm(G - G.conj().T))
        idem = max(idem, np.linalg.norm(G @ G - G))
        annih = max(annih, np.linalg.norm(G @ model.A_r) / np.linalg.norm(model.A_r))
        rank_err = max(rank_err, abs(la.numerical_rank(model.G)
                                     - (cfg.L - cfg.M_t) * cfg.N_t))
        w = la.hermitian_eig(model.P_perp)[0]
        target = np.r_[np.ones(cfg.L - cfg.M_t), np.zeros(cfg.M_t)]
        eig_err = max(eig_err, np.max(np.abs(w - target)))
    return [Check("projector_hermitian", 1e-10, herm),
            Check("projector_idempotent", 1e-10, idem),
            Check("radar_annihilated", 1e-10, annih),
            Check("rank_G", 0, rank_err),
            Check("P_perp_eigenvalues", 1e-9, eig_err)]


def check_joint_ml(rng, count=30, projector=None) -> list:
    """Joint ML versus projected exhaustive search on tiny instances."""
    mismatches = 0
    h_err = obj_err = ident = 0.0
    for i in range(count):
        cfg = TINY.replace(sigma2=TINY.P_c / 10 ** ((10, 20)[i % 2] / 10))
        model = _tiny_model(rng, cfg, projector)
        joint = exhaustive_joint_ml(model, cfg)
        x = detect_projected(model.y_tilde, model.G, cfg, Strategy.EXHAUSTIVE)
        mismatches += int(not np.array_equal(x, joint.x_hat))
        h_err = max(h_err, np.linalg.norm(ls_target_estimate(model, x) - joint.h_hat))
        r = model.y - model.A_c @ x
        obj_err = max(obj_err, abs(joint.objective - np.sum(np.abs(model.Gamma @ r) ** 2))
                      / max(joint.objective, 1e-300))
        # Profiled residual identity for an arbitrary alphabet vector.
        xa = la.vec(gen_symbols(rng, cfg))
        ra = model.y - model.A_c @ xa
        lhs = np.sum(np.abs(ra - model.A_r @ ls_target_estimate(model, xa)) ** 2)
        rhs = np.sum(np.abs(model.Gamma @ ra) ** 2)
        ident = max(ident, abs(lhs - rhs) / lhs)
    return [Check("joint_ml_argmin_mismatches", 0, mismatches),
            Check("joint_ml_h_difference", 1e-9, h_err),
            Check("joint_ml_objective", 1e-9, obj_err),
            Check("profiled_objective_identity", 1e-9, ident)]


def check_snr(rng, trials=300) -> list:
    cfg = DEFAULT
    snr = an.snr_projected_empirical(cfg, trials, rng)
    sinr = an.sinr_sic_empirical(cfg, trials, rng)
    theory = an.snr_projected_theory(cfg)
    return [Check("projected_snr_rel_error", 0.05, abs(snr / theory - 1)),
            Check("sic_sinr_below_snr", 0.0, max(0.0, sinr - theory))]


def check_crb(rng, trials=2000) -> Check:
    """Genie LS error of the orthogonal waveform against the closed-form CRB."""
    cfg = DEFAULT
    X_r = gen_orthogonal_waveform(cfg.M_t, cfg.L, cfg.P_r)
    scene = gen_scene(rng, cfg, X_r)
    X_c = gen_symbols(rng, cfg)
    x = la.vec(X_c)
    radar = radar_operators(X_r, cfg.M_r)
    h = la.vec(scene.H_r)
    err = 0.0
    for _ in range(trials):
        Y = synthesize_block(scene, X_c, rng, cfg.sigma2)
        model = stack_model(scene, Y, radar)
        err += np.sum(np.abs(ls_target_estimate(model, x) - h) ** 2)
    crb = an.crb_target_response(scene.R, cfg.sigma2, cfg.M_r, cfg.L)
    closed = an.crb_orthogonal(cfg)
    return Check("crb_genie_rel_error", 0.1,
                 max(abs(err / trials / crb - 1), abs(crb / closed - 1)))


def check_rates(rng) -> list:
    cfg = DEFAULT
    H_c = gen_comm_channel(rng, cfg.M_r, cfg.N_t)
    X_r = gen_orthogonal_waveform(cfg.M_t, cfg.L, cfg.P_r)
    radar = radar_operators(X_r, cfg.M_r)
    G = apply_block_diagonal(radar.Gamma, H_c, cfg.L)
    snr = an.snr_projected_theory(cfg)
    rep = an.ergodic_rates(H_c, cfg, snr / 2)
    factor = abs(rep.rate_projection / rep.rate_comm_only - (1 - cfg.M_t / cfg.L))
    indep = abs(an.projection_rate_from_G(G, cfg) / rep.rate_projection - 1)
    kkt = an.waterfill_kkt_residual(rep.eigenvalues, snr, rep.powers)
    return [Check("rate_projection_factor", 1e-9, factor),
            Check("rate_projection_from_G", 1e-6, indep),
            Check("rate_sic_below_comm", 0.0, max(0.0, rep.rate_sic - rep.rate_comm_only)),
            Check("waterfill_kkt", 1e-9, kkt)]


def verify(seed: int = 0, projector=None) -> VerifyReport:
    """Run every check with generators derived from ``seed``."""
    streams = [np.random.default_rng(s)
               for s in np.random.SeedSequence(seed).spawn(6)]
    checks = [check_ls_identity(streams[0])]
    checks += check_projector(streams[1])
    checks += check_joint_ml(streams[2], projector=projector)
    checks += check_snr(streams[3])
    checks.append(check_crb(streams[4]))
    checks += check_rates(streams[5])
    return VerifyReport(seed, tuple(checks))
