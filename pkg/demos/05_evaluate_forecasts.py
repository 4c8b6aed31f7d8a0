"""Forecast evaluation: error metrics, trend accuracy, time offset.
====================================================================

Demonstrates the indicator suite on constructed series where the right
answers are known: a delayed copy has perfect correlation at its lag, and
directional accuracy only credits matching day-over-day moves.
"""

import numpy as np

from sentistock import best_time_offset, compute_metrics, directional_accuracy

rng = np.random.default_rng(0)
actual = 100 + np.cumsum(rng.normal(0, 1, 120))

# A slightly noisy copy scores near-perfect on everything.
pred = actual + rng.normal(0, 0.2, actual.size)
mae, rmse, r2 = compute_metrics(pred, actual)
print(f"noisy copy:   MAE {mae:.3f}  RMSE {rmse:.3f}  R2 {r2:.4f}  "
      f"dir-acc {directional_accuracy(pred, actual):.3f}")

# A 4-day-late copy: error metrics degrade, and the offset search finds
# exactly the planted delay.
late = np.concatenate([np.full(4, actual[0]), actual[:-4]])
mae, rmse, r2 = compute_metrics(late, actual)
lag, acc_at_lag = best_time_offset(late, actual, max_lag=10)
print(f"4 days late:  MAE {mae:.3f}  RMSE {rmse:.3f}  R2 {r2:.4f}")
print(f"  best time offset: {lag} days (directional accuracy there: {acc_at_lag:.3f})")

# Directional accuracy ignores scale entirely: any strictly increasing
# transform of both series leaves it unchanged.
a = rng.normal(0, 1, 80)
b = rng.normal(0, 1, 80)
base = directional_accuracy(a, b)
mapped = directional_accuracy(np.exp(a), np.exp(b))
print(f"\nmonotone-transform invariance: {base:.3f} == {mapped:.3f}")
