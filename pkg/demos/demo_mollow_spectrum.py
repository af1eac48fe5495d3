"""Emission spectra: elastic peak, natural line, and the dressed-state triplet.

Decomposes the spectrum at weak (rabi = 0.5 gamma) and strong
(rabi = 2 gamma) drive.  The elastic component carries the laser's 10 neV
width and a weight set by the drive; the inelastic part splits into
sidebands at the damped Rabi frequency once driving dominates decay.
"""

import csv
import pathlib

import numpy as np

from filtered_rf import EmitterParams, HBAR_UEV_PS, emission_spectrum

GAMMA_UEV = 20.0
LASER_NEV = 10.0

for rabi_over_gamma in (0.5, 2.0):
    emitter = EmitterParams(
        gamma=1.0,
        rabi=rabi_over_gamma,
        laser_linewidth=LASER_NEV / 1000.0 / GAMMA_UEV,
    )
    omegas = np.linspace(-15.0, 15.0, 30001)
    decomposition = emission_spectrum(emitter, omegas)

    print(f"rabi = {rabi_over_gamma} gamma:")
    for c in decomposition.components:
        print(
            f"  {c.kind:12s} center = {c.center * GAMMA_UEV:8.2f} ueV  "
            f"fwhm = {2 * c.hwhm * GAMMA_UEV:8.3f} ueV  weight = {c.weight:+.4f}"
        )

    name = f"demo_mollow_spectrum_rabi{rabi_over_gamma}.csv"
    with open(pathlib.Path(__file__).parent / name, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["omega_ueV", "s"])
        writer.writerows(zip(np.round(omegas * GAMMA_UEV, 6), np.round(decomposition.values, 9)))
    print(f"  wrote {name}")
