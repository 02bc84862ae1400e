"""
A misleading bonus in GridWorld
===============================

The designer adds +50 for stepping onto the centre cell.  Added naively, the
bonus makes circling the centre worth more than reaching the goal (+100,
episode ends).  The learned reward keeps the useful part and the agent goes
to the goal.

Usage: python demos/gridworld_center_bonus.py [episodes] [seed]
"""

import sys

import numpy as np

from barfi.config import make_config
from barfi.harness import run

episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 1500
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0

for method in ("naive", "barfi"):
    cfg = make_config("gridworld", "GW_centerBonus", method, seed=seed, total_episodes=episodes)
    result = run(cfg)
    R = result.returns()
    chunks = np.array_split(R, 10)
    print(method)
    print("  primary return by tenth:", " ".join("%5.1f" % c.mean() for c in chunks))
    tail = min(500, len(R) // 3)
    print("  last %d episodes: %.1f" % (tail, R[-tail:].mean()))
    if result.discount is not None:
        print("  learned discount %.3f after %d outer steps (%d skipped)"
              % (result.discount.gamma, len(result.outer_updates), result.skipped_outer))
