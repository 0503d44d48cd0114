# %% [markdown]
# # How long can the light path be?
#
# Each diode sits behind index-matching glue and a dichroic mirror, with
# a 50 um core fiber butted against the far side.  The longer the path, the
# more the beam spreads and the less of it lands in the core.  Here we find
# the longest path that still delivers the required power for each color.

# %%
import numpy as np

from dualbeam import design
from dualbeam.stack import BLUE_PL450B, RED_HL63603TG, build_unit_stack, trace_stack
from dualbeam.beam import beam_geometry

nominal = design.Scenario()

# %% [markdown]
# Start with the beam right at the fiber face for the shortest mechanically
# possible stacks.  The blue diode keeps its TO-can window, so its minimum
# is much longer than the red one.

# %%
for ld in (BLUE_PL450B, RED_HL63603TG):
    face = trace_stack(ld.beam(), build_unit_stack(ld, ld.min_pathway))
    g = beam_geometry(face)
    p = design.coupled_power_at(ld, nominal, ld.min_pathway)
    print(f"{ld.label:10s} min pathway {ld.min_pathway * 1e3:.2f} mm  "
          f"spot {g.w1 * 1e6:6.1f} x {g.w2 * 1e6:6.1f} um  coupled {p * 1e3:.3f} mW")

# %% [markdown]
# Power falls off roughly as 1/d^2 once the spot outgrows the core.

# %%
for ld in (BLUE_PL450B, RED_HL63603TG):
    d, p = design.power_vs_pathway(ld, nominal, (ld.min_pathway, 20e-3), 8)
    print(ld.label)
    for di, pi in zip(d, p):
        print(f"  {di * 1e3:6.2f} mm  {pi * 1e3:8.4f} mW")

# %% [markdown]
# Now invert: bisect for the pathway where the coupled power crosses the
# requirement (0.1 mW blue, 1 mW red).

# %%
for ld in (BLUE_PL450B, RED_HL63603TG):
    req = design.requirement_for(ld)
    d = design.max_pathway(ld, nominal, req)
    print(f"{ld.label:10s} longest pathway {d * 1e3:.3f} mm for {req.min_power * 1e3:g} mW")

# %% [markdown]
# A 10 um misalignment on both axes costs surprisingly little, because the
# spot is already several times the core diameter at these distances.

# %%
off = design.Scenario(offset=design.Alignment(10e-6, 10e-6))
for ld in (BLUE_PL450B, RED_HL63603TG):
    print(ld.label, f"{design.max_pathway(ld, off, design.requirement_for(ld)) * 1e3:.3f} mm")
