import glob
import os

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from exprays.render import ImageSpec, render_parameter_plane, write_ppm
from exprays.serialize import read_param_trace_json

INDIR = "../data/param_rays"
OUTDIR = "../data/plots"
CENTER = complex(2, 0)
WIDTH = 16.0
WIDTH_PX, HEIGHT_PX = 800, 600
MAX_ITER = 200

os.makedirs(OUTDIR, exist_ok=True)

traces = [read_param_trace_json(f) for f in sorted(glob.glob(f"{INDIR}/*.json"))]
print(f"Loaded {len(traces)} parameter rays")

spec = ImageSpec(CENTER, WIDTH, WIDTH_PX, HEIGHT_PX, max_iter=MAX_ITER)
rendering = render_parameter_plane(spec, traces, verbose=True)
write_ppm(f"{OUTDIR}/parameter_plane.ppm", rendering.image)

# the same picture with the rays in color and a legend
extent = [spec.left, spec.left + spec.width_units, spec.top - spec.height_units, spec.top]
background = np.where(rendering.overlay_mask, 255, rendering.image)

fig, ax = plt.subplots(figsize=(10, 7.5))
ax.imshow(background, cmap="gray", vmin=0, vmax=255, extent=extent)
for trace in traces:
    kappas = np.array([smp.kappa for smp in trace.samples])
    ax.plot(kappas.real, kappas.imag, lw=1.2, label=str(trace.address))
ax.set_xlim(extent[0], extent[1])
ax.set_ylim(extent[2], extent[3])
ax.set_xlabel(r"Re $\kappa$")
ax.set_ylabel(r"Im $\kappa$")
ax.legend(loc="upper left", fontsize="small")
fig.savefig(f"{OUTDIR}/parameter_plane.png", dpi=150)
