"""
Permutation test of a fit
=========================

The fit error is compared against GLMs trained on randomly permuted
targets. A small p-value means the error sits to the left of the null.
"""

from aggglm import SimulationConfig, permutation_test, simulate_glm

X, z, _ = simulate_glm(SimulationConfig("gaussian", n=300, d=3, seed=3))

# with every target known the test has full power
res = permutation_test(X, z, "gaussian", n_perms=99, seed=0)
print("observed %.3f, null median %.3f, p = %.3f"
      % (res.observed_error, sorted(res.null_errors)[49], res.p_value))
