"""Slow, independent reference solvers used by the tests."""
import itertools

import numpy as np
from scipy.optimize import minimize_scalar

from aggglm.glm import GlmFamily


def random_valid(rng, kind, size):
    if kind == "gaussian":
        return rng.normal(0.0, 2.0, size)
    if kind == "poisson":
        return rng.exponential(2.0, size)
    return rng.uniform(0.01, 0.99, size)


def random_instance(rng, kind, max_size=6, max_constraints=3):
    """Sorted gamma plus a feasible random constraint set for one block."""
    m = int(rng.integers(1, max_size + 1))
    gamma = np.sort(random_valid(rng, kind, m))
    h = int(rng.integers(1, min(max_constraints, m) + 1))
    ranks = np.sort(rng.choice(np.arange(1, m + 1), size=h, replace=False))
    values = np.sort(random_valid(rng, kind, h))
    return gamma, ranks, values


def grid_oracle(kind, gamma_sorted, ranks, values, step=1e-3):
    """Coordinatewise grid search over each free coordinate's box, then refinement.

    Each free coordinate is confined to the interval between the constraint
    values of its neighbouring ranks; the ordering between free coordinates
    is dropped. Returns the minimizer and its objective value.
    """
    fam = GlmFamily(kind)
    g = np.asarray(gamma_sorted, dtype=float)
    m = g.size
    ranks = np.asarray(ranks)
    values = np.asarray(values, dtype=float)
    z = np.empty(m)
    for j in range(1, m + 1):
        hit = np.flatnonzero(ranks == j)
        if hit.size:
            z[j - 1] = values[hit[0]]
            continue
        below = values[ranks < j]
        above = values[ranks > j]
        lo = below[-1] if below.size else -np.inf
        hi = above[0] if above.size else np.inf
        lo_range = lo if np.isfinite(lo) else min(g[j - 1], hi) - 1.0
        hi_range = hi if np.isfinite(hi) else max(g[j - 1], lo) + 1.0
        lo_range = max(lo_range, fam.domain_min)
        hi_range = min(hi_range, fam.domain_max)
        grid = np.append(np.arange(lo_range, hi_range, step), hi_range)
        obj = fam.divergence(grid, np.full(grid.size, g[j - 1]))
        best = grid[np.argmin(obj)]
        res = minimize_scalar(
            lambda x: float(fam.divergence(np.array([x]), np.array([g[j - 1]]))[0]),
            bounds=(max(lo_range, best - step), min(hi_range, best + step)),
            method="bounded",
            options={"xatol": 1e-12},
        )
        cand = [best, res.x]
        vals = [float(fam.divergence(np.array([c]), np.array([g[j - 1]]))[0]) for c in cand]
        z[j - 1] = cand[int(np.argmin(vals))]
    return z, float(np.sum(fam.divergence(z, g)))


def cvxpy_oracle(kind, gamma_sorted, ranks, values):
    """Solve the chain-ordered problem directly with a conic solver."""
    import cvxpy as cp

    g = np.asarray(gamma_sorted, dtype=float)
    m = g.size
    z = cp.Variable(m)
    cons = [z[r - 1] == v for r, v in zip(ranks, values)]
    if m > 1:
        cons.append(cp.diff(z) >= 0)
    if kind == "gaussian":
        obj = 0.5 * cp.sum_squares(z - g)
    elif kind == "poisson":
        cons.append(z >= 0)
        obj = cp.sum(cp.kl_div(z, g))
    else:
        cons += [z >= 0, z <= 1]
        obj = cp.sum(cp.kl_div(z, g) + cp.kl_div(1 - z, 1 - g))
    prob = cp.Problem(cp.Minimize(obj), cons)
    prob.solve(solver=cp.CLARABEL)
    return np.asarray(z.value), float(prob.value)


def brute_force_impute(kind, gamma, blocks, grid):
    """Exhaustive search over ``grid``-valued targets meeting every block's constraints."""
    fam = GlmFamily(kind)
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.size
    best, best_val = None, np.inf
    for cand in itertools.product(grid, repeat=n):
        cand = np.array(cand)
        ok = True
        for rows, cons in blocks:
            s = np.sort(cand[list(rows)])
            if any(s[r - 1] != v for r, v in cons):
                ok = False
                break
        if not ok:
            continue
        val = float(np.sum(fam.divergence(cand, gamma)))
        if val < best_val - 1e-15:
            best, best_val = cand, val
    return best, best_val
