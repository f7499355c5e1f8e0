"""
Six circuit classes
===================

Each class gets its own network, trained on seeded random circuits and
scored on held-out rows. A constant predictor (the mean of the held-out
targets) is printed beside each score as a floor to beat.
"""

# %%
import time

import numpy as np

from circuitann.circuits import ann_architecture
from circuitann.experiments import run_class_experiment

print(f"{'class':6s} {'arch':>14s} {'n':>5s} {'nrmse':>8s} {'const':>8s} {'bar':>5s}  time")
for cls in ("1a", "2a", "1b", "1c", "2b", "2c"):
    t0 = time.perf_counter()
    net, ds, report = run_class_experiment(cls)
    const = float(np.sqrt(np.mean((report.true_norm - report.true_norm.mean(0)) ** 2)))
    arch = "-".join(map(str, ann_architecture(cls).sizes))
    print(f"{cls:6s} {arch:>14s} {len(ds):5d} {report.metrics['nrmse']:8.4f} {const:8.4f} "
          f"{report.threshold:5.2f}  {time.perf_counter() - t0:.1f}s")

# %%
# Category 2 classes also predict phase; the report keeps it in degrees.
_, _, report = run_class_experiment("2a")
print(f"2a mean |phase error|: {report.metrics['mean_abs_phase_err']:.2f} deg")
print(f"2a mean |current error|: {report.metrics['mean_abs_current_err']:.4f} A")
