"""
Imputing targets from order statistics
======================================

Given model predictions and a few known order statistics, the closest
feasible target vector is found by sorting, clamping and scattering.
"""

import numpy as np

from aggglm import AggregateSummary, impute_targets

# predictions for five individuals
gamma = np.array([2.0, 0.5, 3.1, 1.2, 0.9])

# all we know: the 2nd smallest target is 1.0 and the largest is 3.0
summary = AggregateSummary.single_block(5, [(2, 1.0), (5, 3.0)])

z = impute_targets(gamma, summary)
print("predictions:", gamma)
print("imputed:    ", z)

# the imputation keeps the ordering of the predictions
print("same order: ", np.array_equal(np.argsort(gamma, kind="stable"), np.argsort(z, kind="stable")))
