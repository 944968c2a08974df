"""
Fitting a Poisson model from a histogram of targets
===================================================

Only a 10-bin quantile summary of the counts is handed to the solver. The
loss trajectory never increases.
"""

import numpy as np

from aggglm import FitOptions, SimulationConfig, alternate_fit, fit_glm, simulate_glm, summarize_targets

X, z, beta_true = simulate_glm(SimulationConfig("poisson", n=500, d=4, seed=1))
summary = summarize_targets(z, 10)
print("constraints kept:", summary.blocks[0].h, "of", z.size, "targets")

state = alternate_fit(X, summary, "poisson", FitOptions())
print("iterations:", state.iterations, "converged:", state.converged)
print("first / last loss: %.3f / %.3f" % (state.loss_trajectory[0], state.loss_trajectory[-1]))
print("non-increasing:", bool(np.all(np.diff(state.loss_trajectory) <= 0)))

# compare with a fit that sees every target
print("true beta:      ", np.round(beta_true, 3))
print("full-data beta: ", np.round(fit_glm(X, z, "poisson"), 3))
print("aggregate beta: ", np.round(state.beta, 3))
