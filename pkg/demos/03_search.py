"""
Searching for lengths with many assembly modes
==============================================

Compare direct sampling, simulated annealing and the cross-entropy method on
the integer length landscape, reporting each run as "best (evaluations)".
A full budget of 600 evaluations costs about two minutes per run.

Usage: python demos/03_search.py [runs] [budget]
"""

import sys

from assembly_modes.optimizer import OptimizerConfig, run_optimizer, runs_csv

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 2
budget = int(sys.argv[2]) if len(sys.argv) > 2 else 200

table = {}
for method in ("random", "sa", "ce"):
    table[method] = [run_optimizer(OptimizerConfig(method=method, budget=budget, seed=s)) for s in range(runs)]
    print(f"{method:>6}:", "  ".join(r.display() for r in table[method]), flush=True)

# the best linkage of all runs
best = max((r for rs in table.values() for r in rs), key=lambda r: r.best_value)
print("\nbest", best.best_value, "from", best.method, "at", best.best_candidate)

# the CSV run log the CLI writes with --out
print(runs_csv([r for rs in table.values() for r in rs]))
