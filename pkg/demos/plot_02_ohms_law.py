"""
Can a tiny network learn Ohm's law?
===================================

A 2-3-1 sigmoid network sees normalized (R, V) pairs and must output the
normalized current. The grid is chosen so every target stays below the
sigmoid ceiling.
"""

# %%
from circuitann.experiments import default_ohm_grid, run_ohm_experiment

grid = default_ohm_grid()
print(f"{len(grid)} grid points, V in [{min(v for v, _ in grid)}, {max(v for v, _ in grid)}] V")

# %%
# Train with the default cycle count, max(500, 10 * N); the point
# (V=10, R=5) is always held out.
net, dataset, report = run_ohm_experiment()
print(f"trained for {len(report.train_report.loss_per_cycle)} cycles on {report.n_train} points")
print(f"held-out normalized RMSE: {report.metrics['nrmse']:.4f}")

for (r, v), pred in zip(report.features_phys, report.pred_phys[:, 0]):
    if (r, v) == (5.0, 10.0):
        print(f"V=10, R=5: predicted {pred:.4f} A, exact {v / r:.4f} A")

# %%
# A few more held-out rows, physical units.
for row in range(1, 6):
    r, v = report.features_phys[row]
    print(f"V={v:5.1f} R={r:5.1f}  i={report.true_phys[row, 0]:.4f}  pred={report.pred_phys[row, 0]:.4f}")
