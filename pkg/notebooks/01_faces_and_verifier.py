"""
Synthetic faces, UV textures and the toy verifier
=================================================

Builds the desk-scale face model, renders a few pairs, pulls a UV texture
back out of a rendered image and looks at where genuine and impostor
distances fall relative to the calibrated threshold.
"""

# %%
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from gada.attacks import make_uv_space
from gada.harness import calibrate_verifier, default_model, gen_data, pair_distances
from gada.oracle import VerifierConfig

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

model = default_model()
print(model.n_vertices, "vertices,", len(model.triangles), "triangles")

# %%
# The verifier threshold is fit on a held-out set (seed 10000).
verifier, acc = calibrate_verifier(VerifierConfig())
print(f"threshold {verifier.threshold:.5f}, calibration accuracy {acc:.2f}")

data = gen_data(0, 6, model=model, verifier=verifier)

# %%
# Left/right views of the first pairs; the bottom row is the face mask.
fig, ax = plt.subplots(3, 6, figsize=(12, 6))
for i in range(3):
    for j, idx in enumerate((data.left(i), data.right(i))):
        ax[0, 2 * i + j].imshow(data.images[idx])
        space = make_uv_space(data.images[idx], model, data.params[idx])
        ax[1, 2 * i + j].imshow(np.clip(space.texture_of(data.images[idx]), 0, 1))
        ax[2, 2 * i + j].imshow(space.raster.face_mask, cmap="gray")
for a in ax.ravel():
    a.set_axis_off()
ax[0, 0].set_title("image")
ax[1, 0].set_title("UV texture")
ax[2, 0].set_title("face mask")
fig.savefig(OUT / "faces.png", dpi=100)

# %%
# Genuine pairs should mostly sit below the threshold, impostors above.
gen, imp = pair_distances(gen_data(0, 40, model=model, verifier=verifier), verifier)
print(f"genuine accepted {np.mean(gen < verifier.threshold):.2f}, "
      f"impostors rejected {np.mean(imp >= verifier.threshold):.2f}")
fig, a = plt.subplots(figsize=(6, 3))
a.hist(gen, bins=20, alpha=0.6, label="genuine")
a.hist(imp, bins=20, alpha=0.6, label="impostor")
a.axvline(verifier.threshold, color="k", ls="--")
a.legend()
fig.savefig(OUT / "distances.png", dpi=100)
