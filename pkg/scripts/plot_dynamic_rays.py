import os

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
from tqdm import tqdm

from exprays.combinatorics import parse_address
from exprays.rays import trace_ray
from exprays.render import ImageSpec, render_dynamic_plane, write_png
from exprays.variation import dynamic_ray_variation

KAPPA = complex(-2, 0.5)
ADDRESSES = ["|0", "|1", "|-1", "1|0", "|1 0"]
T_LO, T_HI = 1.0, 30.0
OUTDIR = "../data/plots"

os.makedirs(OUTDIR, exist_ok=True)

traces = [trace_ray(KAPPA, parse_address(x), T_LO, T_HI) for x in tqdm(ADDRESSES, desc="tracing")]

spec = ImageSpec(complex(8, 0), 24.0, 900, 600, max_iter=100)
rendering = render_dynamic_plane(KAPPA, spec, traces, verbose=True)
write_png(f"{OUTDIR}/dynamic_plane.png", rendering.image)

fig, axs = plt.subplots(1, 2, figsize=(12, 5))
for text, trace in zip(ADDRESSES, traces):
    z = np.array([smp.z for smp in trace.samples])
    axs[0].plot(z.real, z.imag, label=text)
    df = trace.to_frame()
    axs[1].semilogy(df.t, df.residual, label=text)
axs[0].set_xlabel("Re z")
axs[0].set_ylabel("Im z")
axs[0].legend(fontsize="small")
axs[1].set_xlabel("potential t")
axs[1].set_ylabel("|g(t) - (t - kappa + 2 pi i s_1)|")
fig.savefig(f"{OUTDIR}/dynamic_rays.png", dpi=150)

for text in ADDRESSES:
    rv = dynamic_ray_variation(KAPPA, parse_address(text), T_LO)
    print(f"{text:>6}: alpha = {rv.alpha:.4f}, N = {rv.N}, bound = {rv.bound:g}")
