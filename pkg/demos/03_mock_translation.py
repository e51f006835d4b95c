"""
From an instruction to a plan with the offline translator
=========================================================

The mock client stands in for a language model and returns the gold
abstraction for each instance, so the whole pipeline runs offline. Point
``HTTPChatClient`` at a chat-completions endpoint to use a real model.
"""

# %%
from plahx.bench.generate import generate_instances
from plahx.bench.pipeline import prompt_token_pair, shots_for, solve_instruction
from plahx.pddl import parse_domain
from plahx.translator import MockClient, TranslatorConfig, build_prompt, domain_header

inst = generate_instances("grippers", 1, seed=3)[0]
domain = parse_domain(inst.domain_pddl)
print(inst.instruction)

# %%
# The prompt: a domain header, six solved examples, then the query.
shots = shots_for("grippers")
prompt = build_prompt(shots, inst.instruction, domain_header(domain)).render()
print(prompt[:600], "...")

# %%
abstract, full = prompt_token_pair(inst)
print(f"prompt tokens: {abstract} with abstractions, {full} with full problem files")

# %%
client = MockClient(fixtures={inst.id: inst.abstraction})
solved = solve_instruction(inst.instruction, domain, client, key=inst.id, shots=shots,
                           translator_config=TranslatorConfig())
print(solved.translation.abstraction.render())
print(solved.result_class, [solved.task.actions[i].name for i in solved.plan])

# %%
# A broken completion is classified, not raised.
bad = MockClient(fixtures={inst.id: "(:objects box1 - box)\n(:init (at box1))\n(:goal (free left))"})
print(solve_instruction(inst.instruction, domain, bad, key=inst.id).result_class)
