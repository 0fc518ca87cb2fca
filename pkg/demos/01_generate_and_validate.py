"""Generate a small puzzle corpus, inspect one problem, and run the
independent validity oracle over everything.

Run:  python3 demos/01_generate_and_validate.py
"""

import numpy as np

from rpmkit import generate_corpus, render_raster, validate_problem
from rpmkit.rpm import SHAPE_NAMES

problems = generate_corpus("center", 200, seed=12345)
print(f"generated {len(problems)} center-configuration problems\n")

p = problems[0]
print(f"problem {p.id}: rules")
for rule in p.rules:
    param = f"({rule.param:+d})" if rule.param else ""
    print(f"  {rule.attr:9s} {rule.kind}{param}")

print("\ncontext matrix (type/size/color per cell, ? = missing):")
cells = [
    f"{SHAPE_NAMES[panel.entities[0][1]][:4]} s{panel.entities[0][2]} c{panel.entities[0][3]}"
    for panel in p.context
]
for row in range(3):
    line = cells[3 * row : 3 * row + 3] if row < 2 else cells[6:8] + ["   ?   "]
    print("   " + " | ".join(f"{c:16s}" for c in line))
answer = p.choices[p.answer]
print(f"\nanswer (index {p.answer}): {SHAPE_NAMES[answer.entities[0][1]]} "
      f"size {answer.entities[0][2]} color {answer.entities[0][3]}")

# ascii view of the rendered answer panel
raster = render_raster(answer, (20, 20))
shades = " .:-=+*#%@"
print("\nrendered answer panel:")
for row in raster:
    print("   " + "".join(shades[min(int(v * (len(shades) - 1) + 0.5), 9)] for v in row))

report = validate_problem(p)
print(f"\noracle on problem 0: ok={report.ok}, satisfying candidates={list(report.satisfying)}")

good = sum(validate_problem(q).ok for q in problems)
print(f"oracle over the corpus: {good}/{len(problems)} problems have exactly one valid answer")

answers = np.bincount([q.answer for q in problems], minlength=8)
print(f"answer-position histogram (should be roughly flat): {answers.tolist()}")
