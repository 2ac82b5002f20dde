"""Three routes to the same vorticity field, compared under grid refinement.

A doubly wound vortex filament gives a flow whose vorticity can be
computed from the wavefunction (Clebsch form), from amplitude times
current, or as the plain curl of the current.  All three must agree up
to discretization error, and the disagreement must shrink like h^2.
"""

import numpy as np

from vortkit.fieldgrid import cross, curl, gradient
from vortkit.madelung import PhysicalParams, clebsch_vorticity, decompose, log_density
from vortkit.scenarios import build_vortex_line, example_config, parse_config, with_grid_dims

params = PhysicalParams()

cfg, problems = parse_config(example_config("vortex_line"))
assert not problems

print("grid      wave-vs-curl   amp-vs-curl    wave-vs-amp")
previous = None
for n in (24, 48):
    grid_cfg = with_grid_dims(cfg, n)
    psi, width = build_vortex_line(grid_cfg.grid)
    m = decompose(psi, params)

    w_wave = clebsch_vorticity(psi, params)
    w_amp = cross(gradient(log_density(m.R, m.density_floor)), m.J)
    w_curl = curl(m.J)

    # compare where the flow actually carries flux
    jmag = m.J.magnitude()
    mask = jmag > 0.05 * jmag.max()

    def rel(a, b):
        num = np.sqrt(np.sum((a.values - b.values)[mask] ** 2))
        den = np.sqrt(np.sum(w_curl.values[mask] ** 2))
        return num / den

    trio = (rel(w_wave, w_curl), rel(w_amp, w_curl), rel(w_wave, w_amp))
    print(f"{n:3d}^3   {trio[0]:12.3e}  {trio[1]:12.3e}  {trio[2]:12.3e}")
    if previous is not None:
        shrink = max(previous) / max(trio)
        print(f"        halving h shrank the worst disagreement {shrink:.2f}x")
    previous = trio

print()
print(f"filament core width {width:.2f} (box {cfg.grid.extent(0):.0f}),")
print("phase winds twice around the core, so the vorticity is concentrated")
print("on the filament while all three routes stay mutually consistent.")
