"""
Blockwise summaries
===================

Order statistics reported separately per group (say per county) constrain
each group's targets independently.
"""

import numpy as np

from aggglm import SimulationConfig, alternate_fit, simulate_glm, summarize_blocks

X, z, _ = simulate_glm(SimulationConfig("gaussian", n=300, d=3, seed=2))
county = np.repeat(["north", "south", "east"], 100)

summary = summarize_blocks(z, county, 4)
state = alternate_fit(X, summary, "gaussian")

for block in summary.blocks:
    rows = list(block.rows)
    kept = np.sort(state.z_hat[rows])[block.ranks - 1]
    print(county[rows[0]], "constraints met:", np.array_equal(kept, block.values))
