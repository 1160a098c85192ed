"""Exact optimal-transport computations on discrete measures.

Three problems, all solved exactly as min-cost flows and certified on every
call (primal feasibility, complementary slackness, duality gap):

* ``w1_exact``: the 1-Wasserstein transportation problem between two
  probability measures.
* ``bl_norm``: the norm of a signed measure against test functions that are
  1-Lipschitz and bounded by a constant D, computed through its primal
  decomposition (pairwise transport plus residual mass billed at D).
* ``bl_project_simplex``: the closest probability vector to a signed weight
  vector in that norm, the projection step of the evolution loop.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._mcf import SolverError, min_cost_flow
from .measures import DiscreteMeasure, as_dataset, squared_distance_matrix

__all__ = [
    "TransportPlan",
    "BlDecomposition",
    "SolverError",
    "w1_exact",
    "bl_norm",
    "bl_decomposition",
    "bl_project_simplex",
    "w1_objective_for_simplex_weights",
    "min_w1_over_simplex",
]

FEASIBILITY_TOL = 1e-9
SLACKNESS_TOL = 1e-7
DUALITY_GAP_TOL = 1e-7


@dataclass(frozen=True)
class TransportPlan:
    """An optimal coupling: nonnegative flow with the two measures as marginals."""

    flow: np.ndarray  # (n_mu, n_nu)
    cost: float


@dataclass(frozen=True)
class BlDecomposition:
    """Primal witness for the norm of a signed measure.

    Writes sigma_i = sum_j (flow[i,j] - flow[j,i]) + residual_plus[i]
    - residual_minus[i]; the norm is the transport cost of ``flow`` plus D
    times the total residual mass.
    """

    flow: np.ndarray  # (m, m), zero diagonal
    residual_plus: np.ndarray  # (m,)
    residual_minus: np.ndarray  # (m,)
    cost: float


def _distance_matrix(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return np.sqrt(squared_distance_matrix(X, Y))


def _balance(supply: np.ndarray) -> np.ndarray:
    """Force the supply vector to sum to exactly zero (float arithmetic)."""
    supply = supply.astype(np.float64).copy()
    imbalance = supply.sum()
    if imbalance != 0.0:
        supply[int(np.argmax(np.abs(supply)))] -= imbalance
    return supply


def _certify(src, dst, cost, supply, flow, pi, scale: float) -> float:
    """Self-check a solve; returns the duality gap. Raises on violation."""
    n = supply.shape[0]
    balance = np.zeros(n)
    np.add.at(balance, src, flow)
    np.add.at(balance, dst, -flow)
    feas = float(np.max(np.abs(balance - supply)))
    if feas > FEASIBILITY_TOL * max(1.0, scale):
        raise SolverError(f"primal feasibility residual {feas:.3e} exceeds tolerance")
    if float(flow.min(initial=0.0)) < -FEASIBILITY_TOL:
        raise SolverError("negative flow in returned solution")
    rc = cost + pi[src] - pi[dst]
    active = flow > FEASIBILITY_TOL
    if np.any(active):
        cs = float(np.max(np.abs(rc[active] * flow[active])))
        if cs > SLACKNESS_TOL * max(1.0, scale):
            raise SolverError(f"complementary slackness violation {cs:.3e}")
    primal = float(np.dot(flow, cost))
    dual = float(np.dot(supply, -pi))
    gap = abs(primal - dual)
    if gap > DUALITY_GAP_TOL * max(1.0, abs(primal)):
        raise SolverError(f"duality gap {gap:.3e} exceeds tolerance")
    return gap


def _check_probability(mu: DiscreteMeasure, name: str) -> None:
    if not mu.is_probability:
        raise ValueError(f"{name} must be a probability measure")


def w1_exact(mu: DiscreteMeasure, nu: DiscreteMeasure) -> tuple[float, TransportPlan]:
    """Exact 1-Wasserstein distance and an optimal transport plan."""
    _check_probability(mu, "mu")
    _check_probability(nu, "nu")
    if mu.dim != nu.dim:
        raise ValueError("dimension mismatch between measures")
    n, m = mu.size, nu.size
    rho = _distance_matrix(mu.support, nu.support)

    src = np.repeat(np.arange(n, dtype=np.int64), m)
    dst = np.tile(np.arange(n, n + m, dtype=np.int64), n)
    cost = rho.ravel()
    a = np.clip(mu.weights, 0.0, None)
    b = np.clip(nu.weights, 0.0, None)
    supply = _balance(np.concatenate([a, -b]))

    flow, pi = min_cost_flow(n + m, src, dst, cost, supply)
    _certify(src, dst, cost, supply, flow, pi, scale=1.0)
    plan = TransportPlan(flow=flow.reshape(n, m), cost=float(np.dot(flow, cost)))
    return plan.cost, plan


def _bl_arcs(rho: np.ndarray, D: float, extra_nodes: int):
    """Arc lists for the signed-measure flow: pairwise arcs plus a bank node.

    Nodes 0..m-1 are the support, node m is the bank (residual mass at
    price D); callers may reserve further nodes after the bank.
    """
    m = rho.shape[0]
    ii, jj = np.nonzero(~np.eye(m, dtype=bool))
    src = [ii.astype(np.int64), np.arange(m, dtype=np.int64),
           np.full(m, m, dtype=np.int64)]
    dst = [jj.astype(np.int64), np.full(m, m, dtype=np.int64),
           np.arange(m, dtype=np.int64)]
    cost = [rho[ii, jj], np.full(m, D), np.full(m, D)]
    return (np.concatenate(src), np.concatenate(dst), np.concatenate(cost),
            m + 1 + extra_nodes, ii, jj)


def bl_decomposition(sigma: DiscreteMeasure, D: float) -> BlDecomposition:
    """Optimal primal decomposition certifying the bounded-Lipschitz norm."""
    if not (D > 0):
        raise ValueError("D must be positive")
    m = sigma.size
    rho = _distance_matrix(sigma.support, sigma.support)
    src, dst, cost, n_nodes, ii, jj = _bl_arcs(rho, D, extra_nodes=0)
    supply = _balance(np.concatenate([sigma.weights, [-sigma.total_mass]]))

    flow, pi = min_cost_flow(n_nodes, src, dst, cost, supply)
    scale = max(1.0, float(np.abs(sigma.weights).sum()))
    _certify(src, dst, cost, supply, flow, pi, scale=scale)

    n_pair = ii.shape[0]
    pair_flow = np.zeros((m, m))
    pair_flow[ii, jj] = flow[:n_pair]
    r_plus = flow[n_pair : n_pair + m].copy()
    r_minus = flow[n_pair + m :].copy()
    return BlDecomposition(
        flow=pair_flow,
        residual_plus=r_plus,
        residual_minus=r_minus,
        cost=float(np.dot(flow, cost)),
    )


def bl_norm(sigma: DiscreteMeasure, D: float) -> float:
    """Norm of a signed measure against D-bounded 1-Lipschitz test functions.

    Equals the 1-Wasserstein distance when sigma is the difference of two
    probability measures and all support distances are at most 2D.
    """
    return bl_decomposition(sigma, D).cost


def bl_project_simplex(
    mu_tilde: DiscreteMeasure, D: float
) -> tuple[DiscreteMeasure, float]:
    """Closest probability vector to a signed weight vector in BL distance.

    Returns the projected measure on the same support and the optimal
    objective value bl(mu_tilde, result). Optimality is certified by the
    flow solver's duality gap on every call.
    """
    if not (D > 0):
        raise ValueError("D must be positive")
    m = mu_tilde.size
    rho = _distance_matrix(mu_tilde.support, mu_tilde.support)
    # Nodes: supports, bank, then a sink that absorbs exactly unit mass;
    # flow into the sink through support i is the projected weight mu[i].
    src, dst, cost, n_nodes, ii, jj = _bl_arcs(rho, D, extra_nodes=1)
    sink = m + 1
    src = np.concatenate([src, np.arange(m, dtype=np.int64)])
    dst = np.concatenate([dst, np.full(m, sink, dtype=np.int64)])
    cost = np.concatenate([cost, np.zeros(m)])
    total = mu_tilde.total_mass
    supply = _balance(np.concatenate([mu_tilde.weights, [1.0 - total], [-1.0]]))

    flow, pi = min_cost_flow(n_nodes, src, dst, cost, supply)
    scale = max(1.0, float(np.abs(mu_tilde.weights).sum()))
    _certify(src, dst, cost, supply, flow, pi, scale=scale)

    weights = flow[-m:].copy()
    weights[np.abs(weights) < 1e-15] = 0.0
    total_w = weights.sum()
    if total_w > 0:
        weights = weights / total_w
    projected = DiscreteMeasure(mu_tilde.support, weights)
    return projected, float(np.dot(flow, cost))


def w1_objective_for_simplex_weights(S, V, mu_weights: np.ndarray) -> float:
    """W1 between the empirical measure of S and given weights on V."""
    from .measures import empirical

    S = as_dataset(S)
    V = as_dataset(V)
    mu_weights = np.asarray(mu_weights, dtype=np.float64)
    target = DiscreteMeasure(V, mu_weights)
    if not target.is_probability:
        raise ValueError("weights must lie in the probability simplex")
    value, _ = w1_exact(empirical(S), target)
    return value


def min_w1_over_simplex(S, V) -> tuple[float, np.ndarray]:
    """Minimize W1(empirical(S), weighted measure on V) over simplex weights.

    Solved as one flow problem in which the candidate weights are decision
    variables (arcs from each candidate into a unit-mass sink). Returns the
    optimal value and an optimal weight vector.
    """
    S = as_dataset(S)
    V = as_dataset(V)
    n, m = S.shape[0], V.shape[0]
    rho = _distance_matrix(S, V)

    src = np.concatenate([
        np.repeat(np.arange(n, dtype=np.int64), m),
        np.arange(n, n + m, dtype=np.int64),
    ])
    dst = np.concatenate([
        np.tile(np.arange(n, n + m, dtype=np.int64), n),
        np.full(m, n + m, dtype=np.int64),
    ])
    cost = np.concatenate([rho.ravel(), np.zeros(m)])
    supply = _balance(np.concatenate([np.full(n, 1.0 / n), np.zeros(m), [-1.0]]))

    flow, pi = min_cost_flow(n + m + 1, src, dst, cost, supply)
    _certify(src, dst, cost, supply, flow, pi, scale=1.0)
    weights = flow[-m:].copy()
    weights = np.clip(weights, 0.0, None)
    weights = weights / weights.sum()
    return float(np.dot(flow, cost)), weights
