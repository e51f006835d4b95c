"""
Population search on a generated Blocks instance
================================================

Runs the planner with its default settings, then looks inside: how small the
searched subspaces were, how the incumbent bound moved, and which action
pairs the conflict recorder learned to avoid.
"""

# %%
import io
import json

from plahx import SearchConfig, format_plan, ground, parse_domain, parse_problem, run
from plahx.bench.generate import generate_instances

inst = generate_instances("blocks", 1, seed=12, max_length=8)[0]
print(inst.instruction)
domain = parse_domain(inst.domain_pddl)
task = ground(domain, parse_problem(inst.problem_pddl, domain))

# %%
log = io.StringIO()
result = run(task, SearchConfig(seed=0), log=log)
print(format_plan(task, result.plan))
print("oracle optimum:", inst.optimal_length, " found:", len(result.plan))

# %%
m = result.metrics
print(f"|A| = {m.n_actions}, critical = {m.n_critical}")
print(f"mean subspace = {m.mean_subspace:.2f} ({m.mean_subspace / m.n_actions:.0%} of |A|)")
print("generations:", m.generations, " conflicts recorded:", m.conflicts)

# %%
# One JSON line per generation.
for line in log.getvalue().splitlines()[:3]:
    rec = json.loads(line)
    print(rec["m"], rec["f_global"], rec["archive"], rec["lengths"][:6])

# %%
# The recorder in isolation: each conflict between two actions lowers their
# pairwise weight, which shifts the sampling distribution away from the pair.
from plahx.meta import ConflictRecorder, sampling_distribution  # noqa: E402

C = list(result.plan)
rec = ConflictRecorder(len(task.actions))
print({task.actions[a].name: round(p, 3) for a, p in sampling_distribution(C, rec).items()})
for m in range(5):
    rec.penalize(C[0], C[1], m)
print({task.actions[a].name: round(p, 3) for a, p in sampling_distribution(C, rec).items()})
print("weight after 5 conflicts:", round(rec.w(C[0], C[1]), 4), " floor:", rec.lower_bound)
