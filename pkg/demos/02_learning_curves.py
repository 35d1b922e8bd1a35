"""Fit the two learning-curve families to a planted improvement schedule
and show that the fitter recovers the planted parameters and that AIC
picks the right family.
"""

import numpy as np

from cardskill.stattests import fit_exponential, fit_power

xs = np.arange(1.0, 31.0)

print("planted power law: y = 0.45 - 0.18 * x^-0.65")
ys = 0.45 - 0.18 * xs ** -0.65
power = fit_power(xs, ys)
expo = fit_exponential(xs, ys)
print(f"  power fit: A={power.a:.4f} B={power.b:.4f} "
      f"alpha={power.alpha:.4f} sse={power.sse:.2e}")
print(f"  exp   fit: sse={expo.sse:.2e}")
print(f"  AIC prefers: {'power' if power.aic < expo.aic else 'exponential'}")
print()

print("planted exponential: y = 0.45 - 0.18 * exp(-0.3 x)")
ys = 0.45 - 0.18 * np.exp(-0.3 * xs)
power = fit_power(xs, ys)
expo = fit_exponential(xs, ys)
print(f"  exp   fit: A={expo.a:.4f} B={expo.b:.4f} "
      f"alpha={expo.alpha:.4f} sse={expo.sse:.2e}")
print(f"  power fit: sse={power.sse:.2e}")
print(f"  AIC prefers: {'power' if power.aic < expo.aic else 'exponential'}")
