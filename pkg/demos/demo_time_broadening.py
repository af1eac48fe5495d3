"""Time broadening of the antibunching dip behind narrow filters.

Computes full g2(tau) traces at three of the experimental filter
bandwidths.  A narrow filter acts as a projective measurement of photon
energy, so the conjugate timing uncertainty stretches the dip and lifts
its minimum: energy resolution and antibunching cannot be had together.
"""

import csv
import pathlib

import numpy as np

from filtered_rf import EmitterParams, GaussianIRF, filtered_g2, irf_convolve

emitter = EmitterParams(gamma=1.0, rabi=0.5)  # gamma units
detector = GaussianIRF(fwhm=1.14)  # 37.5 ps at gamma = 20 ueV

taus = np.linspace(0.0, 60.0, 3001)
columns = {"tau_gamma": taus}
for width in (23.0, 0.85, 0.29):
    trace = filtered_g2(emitter, width, taus=taus)
    smeared = irf_convolve(trace, detector)
    columns[f"g2_width_{width}"] = smeared.values
    dip = 1.0 - smeared.values[0]
    half = np.interp(1.0 - dip / 2.0, smeared.values[:300], taus[:300])
    print(f"width = {width:6.2f} gamma: g2(0) = {smeared.values[0]:.3f}, dip FWHM = {2 * half:.2f}/gamma")

out = pathlib.Path(__file__).parent / (pathlib.Path(__file__).with_suffix("").name + ".csv")
with open(out, "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(columns.keys())
    writer.writerows(zip(*(np.round(v, 8) for v in columns.values())))
print(f"wrote {out.name}")
