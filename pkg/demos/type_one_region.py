"""
Where in (gamma, k) is the Gray-Scott model Type-I unstable?
============================================================

For three species the Type-I test reduces to a handful of inequalities
on the characteristic-polynomial coefficients of A and A~.  Sweeping them
over a grid maps the region cheaply; a sample of cells is cross-checked
with the direct critical-line search.
"""

import numpy as np

from turing_one import grayscott as gs

result = gs.region_sweep(gamma_range=(1e-3, 5e-2), k_range=(2e-2, 1e-1), grid=(100, 100),
                         verify_lemma3=True, verify_fraction=0.1, seed=1)
summary = result.summary()
print("Type-I cells:", summary["type_i_cells"])
print("bounding box:", summary["bounding_box"])
print("simply connected:", summary["simply_connected"])
print("cross-checked cells:", result.verified, "mismatches:", result.verify_mismatches)

###############################################################################
# Which parameter marks fall inside?

for name, p in gs.PRESETS.items():
    print(f"set {name} (gamma={p.gamma}, k={p.k_rate}):",
          "inside" if result.contains(p.gamma, p.k_rate) else "outside")

###############################################################################
# The region is a thin band, so zoom in on k for an ASCII picture
# (k grows upward, gamma to the right, A and B marked).

zoom = gs.region_sweep(gamma_range=(1e-3, 5e-2), k_range=(5.4e-2, 7e-2), grid=(70, 24))
canvas = [["#" if c else "." for c in row] for row in zoom.mask]
for name, p in gs.PRESETS.items():
    i, j = zoom.cell_of(p.gamma, p.k_rate)
    canvas[i][j] = name
for k, row in zip(zoom.ks[::-1], canvas[::-1]):
    print(f"k={k:.4f} " + "".join(row))

result.write_csv("region.csv")
np.save("region_mask.npy", result.mask)
