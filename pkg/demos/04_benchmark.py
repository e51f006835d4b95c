"""
A small benchmark run
=====================

Generates oracle-certified instances for all four suites, runs the
population planner and the full-space A* baseline, and prints both reports.
"""

# %%
from plahx.bench.generate import KINDS
from plahx.bench.pipeline import run_suite
from plahx.meta import SearchConfig

plahx_report = run_suite(KINDS, count=5, seed=1, search_config=SearchConfig(seed=1))
print(plahx_report.to_text())

# %%
baseline_report = run_suite(KINDS, count=5, seed=1, planner="baseline")
print(baseline_report.to_text())

# %%
# Per-instance view: plan length against the oracle optimum, and the
# subspace compression ratio of each run.
for r in plahx_report.records[:8]:
    print(f"{r.instance_id:<22} {r.plan_length}/{r.optimal_length}  pscr={r.pscr:.3f}")
