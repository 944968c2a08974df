"""
Error versus summary granularity
================================

Five-fold cross-validated test error for increasingly fine summaries,
next to a GLM trained on the fully observed targets.
"""

from aggglm import SimulationConfig, granularity_sweep, simulate_glm

X, z, _ = simulate_glm(SimulationConfig("poisson", n=400, d=5, seed=4))
res = granularity_sweep(X, z, "poisson", [2, 5, 10, 25], folds=5, seed=4)

test = res.mean_by_bins("test_error")
base = res.mean_by_bins("baseline_test_error")
for b in res.bins:
    print("bins %3d  test %.3f  baseline %.3f" % (b, test[b], base[b]))
