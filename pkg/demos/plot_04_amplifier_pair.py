"""
Electrical versus electronic amplifier models
=============================================

Both datasets share the same (R1, R6, V) rows; only the response model
differs. Two separate 3-3-3-1 networks learn them.
"""

# %%
import numpy as np

from circuitann.experiments import run_amplifier_experiment

runs = run_amplifier_experiment()
(_, ds_el, rep_el), (_, ds_tr, rep_tr) = runs["amp_electrical"], runs["amp_electronic"]
print("identical feature rows:", np.array_equal(ds_el.features, ds_tr.features))
print(f"electrical nrmse {rep_el.metrics['nrmse']:.4f}, electronic nrmse {rep_tr.metrics['nrmse']:.4f}")

# %%
# Same inputs, different physics: the electronic model always gives the
# larger output current because no current leaks into the base.
gap = (ds_tr.targets - ds_el.targets)[:, 0] * 0.1 * ds_el.context.e_max
print(f"electronic minus electrical i6: min {gap.min():.4f} A, max {gap.max():.4f} A")
