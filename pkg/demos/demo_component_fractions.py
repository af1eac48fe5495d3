"""What actually passes the filter: component fractions of the detected light.

Tabulates the filtered spectral composition along both experimental axes:
filter width at weak drive (the elastic part saturates the narrow-filter
limit) and drive strength at the etalon bandwidth (sidebands split away,
leaving the inelastic central peak to compete with the elastic line).
"""

import csv
import pathlib
from dataclasses import replace

import numpy as np

from filtered_rf import EmitterParams, filtered_fractions

here = pathlib.Path(__file__).parent
KINDS = ("coherent", "rayleigh", "mollow_red", "mollow_blue")

weak = EmitterParams(gamma=1.0, rabi=0.5, laser_linewidth=5e-4)
widths = np.logspace(-2.0, np.log10(150.0), 17)
with open(here / "demo_fractions_vs_width.csv", "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["filter_width_over_gamma", *KINDS])
    for width in widths:
        fr = filtered_fractions(weak, width)
        writer.writerow([f"{width:.4g}", *(f"{fr[k]:.6f}" for k in KINDS)])
print("vs width at rabi = 0.5 gamma:")
for width in (0.01, 0.29, 150.0):
    fr = filtered_fractions(weak, width)
    print(f"  width = {width:7.3g} gamma: elastic fraction = {fr['coherent']:.3f}")

strong = EmitterParams(gamma=1.0, rabi=2.0, laser_linewidth=5e-4)
rabi_values = np.linspace(0.25, 6.0, 24)
with open(here / "demo_fractions_vs_drive.csv", "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["rabi_over_gamma", *KINDS])
    for rabi in rabi_values:
        fr = filtered_fractions(replace(strong, rabi=rabi), 0.29)
        writer.writerow([f"{rabi:.4g}", *(f"{fr[k]:.6f}" for k in KINDS)])
fr = filtered_fractions(strong, 0.29)
sidebands = fr["mollow_red"] + fr["mollow_blue"]
print(
    f"at rabi = 2 gamma, width = 0.29 gamma: elastic {fr['coherent']:.2f}, "
    f"central inelastic {fr['rayleigh']:.2f}, sidebands {sidebands:.2f}"
)
print("wrote demo_fractions_vs_width.csv, demo_fractions_vs_drive.csv")
