"""
Parsing, grounding and validating a Blocks task
===============================================

Walks a two-block problem from PDDL text to grounded actions and checks a
few plans with the validator.
"""

# %%
from plahx import format_plan, ground, parse_domain, parse_problem, validate_plan
from plahx.bench.domains import BLOCKS

domain = parse_domain(BLOCKS)
print(domain.name, [s.name for s in domain.schemas])

# %%
problem = parse_problem(
    """(define (problem two) (:domain blocks)
         (:objects b1 b2 - block)
         (:init (ontable b1) (ontable b2) (clear b1) (clear b2) (handempty))
         (:goal (and (on b1 b2))))""",
    domain,
)
task = ground(domain, problem)
# repeated objects are allowed, so stack(b1, b1) exists too
print(len(task.actions), "grounded actions")
for a in task.actions:
    print(f"  {a.id:2d} {a.name}")

# %%
# A good plan, a plan that fights itself, and one that stops short.
ids = lambda *names: [task.action_by_name(n).id for n in names]
for plan in (
    ids("(pick-up b1)", "(stack b1 b2)"),
    ids("(pick-up b1)", "(pick-up b2)"),
    ids("(pick-up b1)"),
):
    print(format_plan(task, plan).replace("\n", " "), "->", validate_plan(task, plan))
