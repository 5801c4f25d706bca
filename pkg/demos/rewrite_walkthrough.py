"""Replay the sl2 E conjugated-form script step by step, then break it on purpose.

Run with ``python3 demos/rewrite_walkthrough.py``.
"""
from qgv.gb_rewrite import SideConditionError, apply_rule, format_word, load_script, parse_word, replay_script

script = load_script("sl2_E")
print(script.note)
print("start:", format_word(script.start))
rep = replay_script(script)
for st in rep.steps:
    print(f"  {st.rule} @ {st.pos}: {st.word}")
print("passed:", rep.passed)

# the two summands in the wrong order do not q^2-commute, so the rule refuses
swapped = parse_word("phi[exp(-nu - u - du) + exp(nu + u - du)]")
try:
    apply_rule(swapped, "SumToConj", 0)
except SideConditionError as e:
    print("refused:", e)
