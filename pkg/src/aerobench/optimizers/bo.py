"""Gaussian-process Bayesian optimization with a log expected-improvement
acquisition.

An exact GP with an isotropic Matern-5/2 kernel models standardized rewards
on the unit cube. Hyperparameters (length scale, signal variance, noise)
are refit each round by multi-start gradient ascent on the marginal
likelihood, accepting only improving steps. The acquisition is maximized
over a Sobol candidate set plus a handful of local refinements.
"""
from __future__ import annotations

import numpy as np
from scipy.stats import norm, qmc

from ..space import ParamSpace
from .base import BudgetExhausted, BudgetedObjective, ConfigurationError

JITTER_START = 1e-8
JITTER_MAX = 1e-4

DEFAULTS = {
    "n_initial": 30,
    "n_candidates": 256,
    "n_refine": 10,
    "fit_starts": 4,
    "fit_steps": 40,
    "fit_lr": 0.1,
}


# Bounds on the log hyperparameters (length scale, signal var, noise var)
# keep the fit away from degenerate kernels.
THETA_LO = np.log(np.array([1e-3, 1e-4, 1e-8]))
THETA_HI = np.log(np.array([1e2, 1e3, 1.0]))


def matern52(sq_dists: np.ndarray, length: float, signal_var: float) -> np.ndarray:
    r = np.sqrt(np.maximum(sq_dists, 0.0))
    a = np.sqrt(5.0) * r / length
    return signal_var * (1.0 + a + a**2 / 3.0) * np.exp(-a)


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum(
        np.sum(a**2, axis=1)[:, None]
        + np.sum(b**2, axis=1)[None, :]
        - 2.0 * a @ b.T,
        0.0,
    )


def _chol(k_mat: np.ndarray, warn) -> np.ndarray | None:
    """Cholesky with escalating diagonal jitter; None when it never succeeds."""
    jitter = JITTER_START
    n = len(k_mat)
    while jitter <= JITTER_MAX:
        try:
            return np.linalg.cholesky(k_mat + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            jitter *= 2.0
    warn(
        f"GP covariance not positive definite even with jitter {JITTER_MAX}; "
        f"condition diagnostics: diag range [{k_mat.diagonal().min():.3e}, "
        f"{k_mat.diagonal().max():.3e}], n={n}"
    )
    return None


class _GP:
    """Exact GP on standardized targets with Matern-5/2 kernel."""

    def __init__(self, x: np.ndarray, y: np.ndarray, warn):
        self.x = x
        self.y_mean = float(np.mean(y))
        self.y_std = float(np.std(y))
        if self.y_std < 1e-12:
            self.y_std = 1.0
        self.y = (y - self.y_mean) / self.y_std
        self.warn = warn
        self.theta = np.log(np.array([0.5, 1.0, 1e-3]))  # (length, sf2, sn2)
        self._chol_cache = None
        self._alpha = None

    def _neg_mll_and_grad(self, theta: np.ndarray) -> tuple[float, np.ndarray | None]:
        length, sf2, sn2 = np.exp(theta)
        sq = _sq_dists(self.x, self.x)
        n = len(self.x)
        r = np.sqrt(np.maximum(sq, 0.0))
        a = np.sqrt(5.0) * r / length
        exp_a = np.exp(-a)
        k_mat = sf2 * (1.0 + a + a**2 / 3.0) * exp_a + sn2 * np.eye(n)
        chol = _chol(k_mat, lambda _msg: None)
        if chol is None:
            return np.inf, None
        alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, self.y))
        nll = float(
            0.5 * self.y @ alpha
            + np.sum(np.log(np.diag(chol)))
            + 0.5 * n * np.log(2.0 * np.pi)
        )
        # d(neg mll)/dtheta_j = 0.5 tr((K^-1 - alpha alpha^T) dK/dtheta_j)
        k_inv = np.linalg.solve(chol.T, np.linalg.solve(chol, np.eye(n)))
        w = k_inv - np.outer(alpha, alpha)
        dk_len = sf2 * (a**2 * (1.0 + a) / 3.0) * exp_a
        dk_sf = k_mat - sn2 * np.eye(n)
        grad = np.array(
            [
                0.5 * float(np.sum(w * dk_len)),
                0.5 * float(np.sum(w * dk_sf)),
                0.5 * sn2 * float(np.trace(w)),
            ]
        )
        return nll, grad

    def fit(self, rng: np.random.Generator, opts: dict) -> None:
        best_theta = self.theta
        best_val, _ = self._neg_mll_and_grad(best_theta)
        starts = [self.theta] + [
            np.array(
                [
                    rng.uniform(np.log(0.05), np.log(2.0)),
                    rng.uniform(np.log(0.1), np.log(4.0)),
                    rng.uniform(np.log(1e-6), np.log(1e-2)),
                ]
            )
            for _ in range(int(opts["fit_starts"]) - 1)
        ]
        for theta in starts:
            theta = np.clip(theta.copy(), THETA_LO, THETA_HI)
            val, grad = self._neg_mll_and_grad(theta)
            if not np.isfinite(val):
                continue
            lr = float(opts["fit_lr"])
            for _ in range(int(opts["fit_steps"])):
                if grad is None or not np.all(np.isfinite(grad)):
                    break
                cand = np.clip(theta - lr * grad, THETA_LO, THETA_HI)
                cand_val, cand_grad = self._neg_mll_and_grad(cand)
                # Accept only improving steps; otherwise shrink the step.
                if cand_val < val:
                    theta, val, grad = cand, cand_val, cand_grad
                else:
                    lr *= 0.5
                    if lr < 1e-4:
                        break
            if val < best_val:
                best_theta, best_val = theta, val
        self.theta = best_theta
        length, sf2, sn2 = np.exp(self.theta)
        k_mat = matern52(_sq_dists(self.x, self.x), length, sf2) + sn2 * np.eye(
            len(self.x)
        )
        chol = _chol(k_mat, self.warn)
        if chol is None:
            raise FloatingPointError("GP covariance factorization failed")
        self._chol_cache = chol
        self._alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, self.y))

    def posterior(self, x_new: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        length, sf2, _ = np.exp(self.theta)
        k_star = matern52(_sq_dists(x_new, self.x), length, sf2)
        mu = k_star @ self._alpha
        v = np.linalg.solve(self._chol_cache, k_star.T)
        var = np.maximum(sf2 - np.sum(v**2, axis=0), 1e-12)
        return mu, np.sqrt(var)


def log_expected_improvement(
    mu: np.ndarray, sigma: np.ndarray, best: float
) -> np.ndarray:
    z = (mu - best) / sigma
    ei = (mu - best) * norm.cdf(z) + sigma * norm.pdf(z)
    return np.log(np.maximum(ei, 1e-300))


def run(
    obj: BudgetedObjective,
    space: ParamSpace,
    seed: int,
    options: dict,
    warm: list[tuple[np.ndarray, float | None]],
) -> None:
    opts = {**DEFAULTS, **options}
    n_initial = int(opts["n_initial"])
    n_candidates = int(opts["n_candidates"])
    n_refine = int(opts["n_refine"])
    if n_initial < 2:
        raise ConfigurationError("n_initial must be >= 2")
    rng = space.rng(seed)
    dim = space.relaxed_dim

    xs: list[np.ndarray] = []
    ys: list[float] = []
    for u, reward in warm:
        if reward is not None:
            xs.append(np.clip(u, 0.0, 1.0))
            ys.append(reward)

    def observe(u: np.ndarray) -> None:
        reward = obj.evaluate_u(u)
        if reward is not None:
            xs.append(np.clip(u, 0.0, 1.0))
            ys.append(reward)

    try:
        obj.set_iteration(0)
        while len(xs) < n_initial:
            observe(rng.random(dim))

        step = 0
        while True:
            step += 1
            obj.set_iteration(step)
            gp = _GP(np.array(xs), np.array(ys), obj.warn)
            try:
                gp.fit(rng, opts)
            except FloatingPointError:
                # Fall back to random search once the model is unusable.
                observe(rng.random(dim))
                continue
            best = float((max(ys) - gp.y_mean) / gp.y_std)
            sobol = qmc.Sobol(d=dim, scramble=True, seed=int(rng.integers(2**31)))
            cand = sobol.random(n_candidates)
            mu, sigma = gp.posterior(cand)
            lei = log_expected_improvement(mu, sigma, best)
            order = np.argsort(-lei)
            # Local refinement around the top Sobol candidates.
            pool = [cand[i] for i in order[:n_refine]]
            refined = []
            for base in pool:
                for _ in range(3):
                    trial = np.clip(base + rng.normal(0.0, 0.05, size=dim), 0.0, 1.0)
                    refined.append(trial)
            all_cand = np.array(pool + refined)
            mu2, sigma2 = gp.posterior(all_cand)
            lei2 = log_expected_improvement(mu2, sigma2, best)
            observe(all_cand[int(np.argmax(lei2))])
    except BudgetExhausted:
        pass
