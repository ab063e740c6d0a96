"""
Cosine beams and link budgets
=============================

Pattern shapes, free-space path loss and the RIS link model, and how an
off-boresight receiver shows up as extra path loss.
"""

# %%
import numpy as np

from pathloss_aoa import beam, presets
from pathloss_aoa.beam import BORESIGHT, CosineBeamPattern, Pointing

# A cos^n pattern narrows quickly as n grows.
for n in (1, 4, 28):
    hpbw = np.degrees(beam.half_power_beamwidth_rad(n))
    print(f"n = {n:2d}: half-power beamwidth {hpbw:6.2f} deg")

# %%
# Gain of the horn-like receiver (n = m = 28, 23.5 dBi) as it turns away.
horn = presets.STAGE1_RX_PATTERN
for deg in (0, 5, 10, 20, 40, 60):
    print(f"{deg:3d} deg: {beam.gain_dbi(horn, Pointing.from_degrees(deg)):8.2f} dBi")

# %%
# Free-space link at 2 m. The total loss grows by -10 n log10(cos theta)
# as the receiver turns; this is the signal the estimators invert.
link = presets.stage1_link(28e9)
base = beam.fs_total_pl_db(link)
print(f"FSPL(2 m, 28 GHz) = {beam.fspl_db(2.0, 28e9):.3f} dB, boresight total = {base:.3f} dB")
theta = np.radians([0, 10, 30, 60])
pl = beam.fs_total_pl_db(link, BORESIGHT, Pointing(theta, np.zeros_like(theta)))
for t, p in zip(np.degrees(theta), pl):
    print(f"theta_R = {t:4.0f} deg: PL = {p:8.3f} dB, delta = {p - base:7.3f} dB")

# %%
# The log-expanded form and the gains form are the same number.
gains = beam.fs_total_pl_db_from_gains(link, BORESIGHT, Pointing(theta, np.zeros_like(theta)))
print("max |difference| =", np.max(np.abs(pl - gains)), "dB")

# %%
# RIS-assisted link: plate size, distances, tilt and feed losses.
for d in (2.0, 3.0):
    ris = presets.stage2_link(d)
    print(f"{d:.0f} m: boresight PL = {beam.ris_total_pl_db(ris):.2f} dB, "
          f"at the 55 deg AoA = {beam.ris_total_pl_db(ris, BORESIGHT, Pointing.from_degrees(55)):.2f} dB")
ris = presets.stage2_link(2.0)
lam = beam.wavelength_m(28e9)
print(f"steering angle at 28 GHz: {np.degrees(beam.steering_angle_rad(lam, ris.element_spacing_m)):.1f} deg")
