"""Reference values for the rank-sum p-value and Cohen's d.

Regenerate with: python3 gen_stats_oracle.py > stats_oracle.json
"""
import json

import numpy as np
from scipy.stats import mannwhitneyu

rng = np.random.default_rng(20240611)
cases = []
for i in range(100):
    n = 20
    shift = rng.uniform(-1.5, 1.5)
    a = rng.normal(0.0, 1.0, n)
    b = rng.normal(shift, rng.uniform(0.5, 2.0), n)
    if i % 3 == 0:
        # coarse values so the tie correction matters
        a = np.round(a, 1)
        b = np.round(b, 1)
    p = mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True).pvalue
    pooled = np.sqrt(((n - 1) * a.var(ddof=1) + (n - 1) * b.var(ddof=1)) / (2 * n - 2))
    d = abs(a.mean() - b.mean()) / pooled
    cases.append({"a": a.tolist(), "b": b.tolist(), "p": float(p), "d": float(d)})

print(json.dumps({"cases": cases}))
