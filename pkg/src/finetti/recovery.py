"""Recovering a mixing measure on [0, 1] from its moments.

Two routes are offered. :func:`recover_mixing_grid` fits weights on a fixed
grid by least squares over the probability simplex; :func:`recover_atoms_prony`
recovers a measure with few atoms exactly from a Hankel system. Both are
also wrapped as scikit-learn estimators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import nnls
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from finetti.exceptions import ConvergenceError, RankDeficiencyError, ValidationError
from finetti.moments import check_complete_monotonicity

MAX_PRONY_ATOMS = 4
ROOT_WINDOW = 1e-10


@dataclass
class GridMeasure:
    grid: np.ndarray
    weights: np.ndarray
    residual: float
    n_iter: int = 0
    objective_history: list[float] = field(default_factory=list, repr=False)

    def moments(self, max_order: int) -> np.ndarray:
        """``m_0 .. m_max_order`` of the fitted measure."""
        return np.array([self.weights @ self.grid**k for k in range(max_order + 1)])

    def to_dict(self) -> dict:
        return {"grid": self.grid.tolist(), "weights": self.weights.tolist(),
                "residual": float(self.residual)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass
class AtomicMeasure:
    atoms: np.ndarray
    weights: np.ndarray

    def moments(self, max_order: int) -> np.ndarray:
        return np.array([self.weights @ self.atoms**k for k in range(max_order + 1)])

    def to_dict(self) -> dict:
        return {"atoms": self.atoms.tolist(), "weights": self.weights.tolist()}


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{w >= 0, sum(w) = 1}`` (sort-and-threshold)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def _moment_vector(moments: Sequence) -> np.ndarray:
    ok, violation = check_complete_monotonicity(moments)
    if not ok:
        j, k = violation
        raise ValidationError(
            f"moments are not completely monotone: (-1)^{j} Delta^{j} m_{k} < 0")
    return np.array([float(m) for m in moments[1:]])


def recover_mixing_grid(moments: Sequence, grid_size: int = 101, tol: float = 1e-12,
                        max_iters: int = 100000, init: str = "nnls") -> GridMeasure:
    """Fit weights on a uniform grid of ``[0, 1]`` to moments ``m_0 .. m_D``.

    Minimizes ``sum_k (sum_g w_g p_g**k - m_k)**2`` over the simplex by
    projected gradient with step ``1/L`` (``L`` the gradient's Lipschitz
    constant), stopping once an iteration lowers the objective by less than
    ``tol``. The descent starts from an active-set NNLS solution by default
    (``init="nnls"``); ``init="uniform"`` starts from equal weights, which
    can need very many iterations on ill-conditioned moment systems.

    Raises :class:`ConvergenceError` if ``max_iters`` runs out first.
    """
    if grid_size < 2:
        raise ValidationError("grid_size must be at least 2")
    target = _moment_vector(moments)
    grid = np.linspace(0.0, 1.0, grid_size)
    if target.size == 0:
        w = np.full(grid_size, 1.0 / grid_size)
        return GridMeasure(grid, w, 0.0)
    V = np.vstack([grid**k for k in range(1, target.size + 1)])
    lipschitz = 2.0 * np.linalg.norm(V, 2) ** 2

    def objective(w):
        r = V @ w - target
        return float(r @ r)

    if init == "nnls":
        # Sum-to-one enters as an extra equation; the result is then projected.
        A = np.vstack([V, np.ones(grid_size)])
        b = np.concatenate([target, [1.0]])
        w = project_to_simplex(nnls(A, b, maxiter=50 * grid_size)[0])
    elif init == "uniform":
        w = np.full(grid_size, 1.0 / grid_size)
    else:
        raise ValidationError(f"unknown init {init!r}")

    f = objective(w)
    history = [f]
    for it in range(1, max_iters + 1):
        candidate = project_to_simplex(w - 2.0 * (V.T @ (V @ w - target)) / lipschitz)
        f_new = objective(candidate)
        if f_new > f:
            # rounding noise at the optimum; keep the better point
            break
        decrease = f - f_new
        w, f = candidate, f_new
        history.append(f)
        if decrease < tol:
            break
    else:
        raise ConvergenceError("projected gradient did not converge",
                               residual=float(np.sqrt(f)), iterations=max_iters)
    return GridMeasure(grid, w, float(np.sqrt(f)), it, history)


def recover_atoms_prony(moments: Sequence, r: int) -> AtomicMeasure:
    """Recover an ``r``-atom measure on ``[0, 1]`` from ``m_0 .. m_{2r-1}``.

    The atoms are the roots of the monic degree-``r`` polynomial whose
    coefficients solve the Hankel system ``sum_j c_j m_{i+j} = -m_{i+r}``;
    weights then solve the Vandermonde moment equations.
    """
    if not 1 <= r <= MAX_PRONY_ATOMS:
        raise ValidationError(f"r must be in [1, {MAX_PRONY_ATOMS}]")
    m = np.array([float(x) for x in moments])
    if m.size < 2 * r:
        raise ValidationError(f"need {2 * r} moments for r={r}, got {m.size}")
    m = m[:2 * r]
    H = np.array([[m[i + j] for j in range(r)] for i in range(r)])
    sv = np.linalg.svd(H, compute_uv=False)
    if sv[-1] <= 1e-12 * max(sv[0], 1.0):
        raise RankDeficiencyError(
            f"Hankel matrix is singular: the moments have fewer than {r} atoms; try a smaller r",
            singular_values=sv.tolist())
    c = np.linalg.solve(H, -m[r:2 * r])
    roots = np.roots(np.concatenate([[1.0], c[::-1]]))
    if np.any(np.abs(roots.imag) > ROOT_WINDOW) or np.any(
            (roots.real < -ROOT_WINDOW) | (roots.real > 1 + ROOT_WINDOW)):
        raise ValidationError(f"recovered atoms {roots} do not lie in [0, 1]")
    atoms = np.sort(np.clip(roots.real, 0.0, 1.0))
    if np.any(np.diff(atoms) <= 0):
        raise RankDeficiencyError("recovered atoms coincide; try a smaller r", atoms=atoms.tolist())
    vander = np.vstack([atoms**k for k in range(2 * r)])
    weights = np.linalg.lstsq(vander, m, rcond=None)[0]
    if np.any(weights <= 0):
        raise ValidationError(f"recovered weights {weights} are not positive")
    return AtomicMeasure(atoms, weights)


class GridMixingRecovery(BaseEstimator):
    """Estimator wrapper around :func:`recover_mixing_grid`.

    ``fit`` takes the moment sequence ``m_0 .. m_D``. Fitted attributes:
    ``grid_``, ``weights_``, ``residual_``, ``n_iter_``, ``objective_history_``.
    """

    def __init__(self, grid_size=101, tol=1e-12, max_iter=100000, init="nnls"):
        self.grid_size = grid_size
        self.tol = tol
        self.max_iter = max_iter
        self.init = init

    def fit(self, moments, y=None):
        fitted = recover_mixing_grid(list(moments), self.grid_size, self.tol,
                                     self.max_iter, self.init)
        self.grid_ = fitted.grid
        self.weights_ = fitted.weights
        self.residual_ = fitted.residual
        self.n_iter_ = fitted.n_iter
        self.objective_history_ = fitted.objective_history
        return self

    def predict(self, orders):
        """Moments of the fitted measure at the requested orders."""
        check_is_fitted(self, "weights_")
        orders = np.asarray(orders, dtype=int)
        return np.array([self.weights_ @ self.grid_**k for k in orders.ravel()])

    def measure(self) -> GridMeasure:
        check_is_fitted(self, "weights_")
        return GridMeasure(self.grid_, self.weights_, self.residual_, self.n_iter_,
                           self.objective_history_)


class PronyAtomicRecovery(BaseEstimator):
    """Estimator wrapper around :func:`recover_atoms_prony`."""

    def __init__(self, n_atoms=2):
        self.n_atoms = n_atoms

    def fit(self, moments, y=None):
        fitted = recover_atoms_prony(list(moments), self.n_atoms)
        self.atoms_ = fitted.atoms
        self.weights_ = fitted.weights
        return self

    def predict(self, orders):
        check_is_fitted(self, "atoms_")
        orders = np.asarray(orders, dtype=int)
        return np.array([self.weights_ @ self.atoms_**k for k in orders.ravel()])
