"""Projected gradient ascent for the sum of mutual chordal distances."""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .spaces import PointSet, SpaceParams, _inner_table, uniform_coords
from .streams import stream

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 3000
    step: float = 0.1
    backtrack: float = 0.5
    grow: float = 1.5
    tol: float = 1e-13
    patience: int = 20
    restarts: int = 8
    eps_c: float = 1e-9
    armijo: float = 1e-4

    def __post_init__(self):
        for name in ("max_iters", "step", "tol", "restarts", "eps_c", "patience"):
            if not getattr(self, name) > 0:
                raise DomainError(f"optimizer {name} must be positive")
        if not 0.0 < self.backtrack < 1.0:
            raise DomainError("backtracking factor must lie in (0, 1)")
        if not self.grow >= 1.0:
            raise DomainError("step growth factor must be >= 1")


@dataclass
class OptTrace:
    objective: list = field(default_factory=list)
    grad_norm: float = math.nan
    best_restart: int = 0
    converged: bool = False
    iterations: int = 0
    restart_objectives: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"objective": self.objective, "grad_norm": self.grad_norm,
                "best_restart": self.best_restart, "converged": self.converged,
                "iterations": self.iterations, "restart_objectives": self.restart_objectives}


def _objective(X: np.ndarray) -> float:
    return _value_and_grad(X, 1e-9, grad=False)[0]


def _value_and_grad(X: np.ndarray, eps_c: float, grad: bool = True):
    N, d, k = X.shape
    Tc = _inner_table(k)
    # G[c] = components of <x_i, x_j>
    Z = np.einsum("nia,abc->cnib", X, Tc).reshape(k, N, d * k)
    flat = X.reshape(N, d * k)
    G = Z @ flat.T  # (k, N, N)
    s = np.einsum("cij,cij->ij", G, G)
    np.fill_diagonal(s, 1.0)
    one_minus = np.clip(1.0 - s, 0.0, None)
    value = float(np.sqrt(one_minus).sum())
    if not grad:
        return value, None
    # clamp |<x,y>| <= 1 - eps_c
    floor = 1.0 - (1.0 - eps_c) ** 2
    W = 1.0 / np.sqrt(np.maximum(one_minus, floor))
    np.fill_diagonal(W, 0.0)
    # d s_ij / d x_i = 2 sum_c G_c[i,j] (Tc[:, :, c] x_j)
    Y = np.einsum("abc,njb->cnja", Tc, X).reshape(k, N, d * k)
    g = np.zeros((N, d * k))
    for c in range(k):
        g -= 2.0 * (W * G[c]) @ Y[c]
    # project onto the tangent space of the unit sphere of representatives
    g -= np.einsum("na,na->n", g, flat)[:, None] * flat
    return value, g.reshape(N, d, k)


def objective_and_grad(X: PointSet, eps_c: float = 1e-9):
    """``f = sum_{i != j} sin theta(x_i, x_j)`` and its tangent gradient."""
    X.params.require_points()
    return _value_and_grad(np.asarray(X.coords), eps_c)


def _normalize(X: np.ndarray) -> np.ndarray:
    return X / np.sqrt(np.einsum("nia,nia->n", X, X))[:, None, None]


def _ascend(X: np.ndarray, cfg: OptimizerConfig):
    f, g = _value_and_grad(X, cfg.eps_c)
    history = [f]
    eta = cfg.step / max(X.shape[0], 1)
    quiet = 0
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        gn2 = float(np.einsum("nia,nia->", g, g))
        if gn2 == 0.0:
            converged = True
            break
        while True:
            Xn = _normalize(X + eta * g)
            fn, gnew = _value_and_grad(Xn, cfg.eps_c)
            if fn >= f + cfg.armijo * eta * gn2:
                break
            eta *= cfg.backtrack
            if eta < 1e-16:
                return X, f, g, history, True, it
        gain = (fn - f) / max(abs(f), 1e-300)
        # Barzilai-Borwein trial step for the next iteration, capped by growth
        dx, dg = Xn - X, gnew - g
        curv = -float(np.einsum("nia,nia->", dx, dg))
        bb = float(np.einsum("nia,nia->", dx, dx)) / curv if curv > 0 else math.inf
        X, f, g = Xn, fn, gnew
        history.append(f)
        eta = min(bb, eta * cfg.grow ** 4) if cfg.grow > 1 else eta
        quiet = quiet + 1 if gain < cfg.tol else 0
        if quiet >= cfg.patience:
            converged = True
            break
    return X, f, g, history, converged, it


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PROJUNIFORM_THREADS", "1")))
    except ValueError:
        return 1


def maximize_sum_distances(params: SpaceParams, N: int, cfg: OptimizerConfig | None = None,
                           rng: np.random.Generator | int | None = None, init: np.ndarray | None = None):
    """Best of ``cfg.restarts`` projected gradient ascents from random starts.

    Restart ``i`` draws its start from a stream derived from ``rng`` and
    ``i``, so the result does not depend on how restarts are scheduled.
    """
    params.require_points()
    if N < 2:
        raise DomainError("need at least two points")
    cfg = cfg or OptimizerConfig()
    if isinstance(rng, (int, np.integer)) or rng is None:
        base = int(rng or 0)
    else:
        base = int(rng.integers(0, 2 ** 63))

    def run(i):
        X0 = init if (init is not None and i == 0) else uniform_coords(
            params, N, stream(base, "maxdist", N, i))
        return _ascend(np.array(X0, dtype=float), cfg)

    workers = min(_threads(), cfg.restarts)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            runs = list(ex.map(run, range(cfg.restarts)))
    else:
        runs = [run(i) for i in range(cfg.restarts)]
    finals = [r[1] for r in runs]
    best = int(np.argmax(finals))
    X, f, g, history, converged, iters = runs[best]
    trace = OptTrace(history, float(np.sqrt(np.einsum("nia,nia->", g, g))), best, converged,
                     iters, finals)
    if not converged:
        log.info("maximizer hit max_iters=%d without meeting tol", cfg.max_iters)
    return PointSet(params, X, "maxdist", {"objective": f}), trace
