"""
Symbolic regression in a few lines
===================================

Expression trees, their text form, and the Pareto front the GP search
returns.
"""

# %%
import numpy as np

from pathloss_aoa import expr as ex, sr

e = ex.parse_text("(0.53076 * sin(sin(((0.12336 * x0) + x1))))")
print(ex.to_text(e), "-> complexity", ex.complexity(e))
print("pretty:", ex.to_pretty(e))

# Invalid rows are marked with NaN instead of raising.
print(ex.evaluate(ex.parse_text("log10(x0)"), [[100.0], [-1.0]]))

# %%
# Recover cos(x) from 51 samples.
x = np.linspace(0, np.pi / 2, 51)
front = sr.fit(x[:, None], np.cos(x), sr.SrConfig(seed=0, iterations=2000))
for s in front.entries:
    print(f"complexity {s.complexity:2d}  val MSE {s.loss:.3e}  {ex.to_pretty(s.expr)}")

# %%
# Knee selection prefers the entry with the steepest log-loss drop per node.
print("score pick:", sr.select_model(front, "score").text)
print(front.to_csv())
