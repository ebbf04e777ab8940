"""
Tunable splitter: transfer matrices and the interference fringe
===============================================================

A Mach-Zehnder with an electro-optic phase shifter between its two
couplers behaves as a single beam splitter whose ratio follows the
drive voltage.  This script walks the phase through a full turn,
records both output powers, and reads the fringe visibility and the
intensity-null (balance) phase off the scan.

Run as ``python3 demos/01_tunable_splitter.py``.  A plot is written
next to this file when matplotlib is importable; the printed numbers
do not need it.
"""

import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from qnoise import (
    InterferometerConfig,
    LocalOscillator,
    analytic_moments,
    balance_phase,
    coefficients_from_transfer,
    compose_transfer,
    run_fringe,
)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

HERE = Path(__file__).resolve().parent

# A symmetric device (two 50:50 couplers) at quarter-wave bias acts as a
# balanced splitter: equal magnitudes everywhere in the transfer matrix.
symmetric = InterferometerConfig(math.pi / 4.0, math.pi / 4.0, math.pi / 2.0)
u = compose_transfer(symmetric)
print("symmetric transfer matrix at phi = pi/2:")
with np.printoptions(precision=4, suppress=True):
    print(u)
print(f"|U|^2 row sums: {np.sum(np.abs(u) ** 2, axis=1)}")

# Now a device nobody would ship: the second coupler pulls 51:49 and the
# two arms lose 10% and 15% of their field amplitude.
alpha2 = math.asin(math.sqrt(0.51))
lossy = InterferometerConfig(math.pi / 4.0, alpha2, 0.0, eta1=0.9, eta2=0.85)
lo = LocalOscillator(100.0)

scan = run_fringe(lossy, lo, n_points=1441)
print(f"\nfringe visibility (port 1): {scan.visibility:.6f}")
# weights of the two arm amplitudes at port 1 follow the second coupler,
# so the 51:49 split slightly compensates the 0.9/0.85 loss asymmetry
expected = (0.9 * 0.85 * math.sin(2.0 * alpha2)
            / (0.9**2 * math.cos(alpha2) ** 2 + 0.85**2 * math.sin(alpha2) ** 2))
print(f"loss-limited value for this coupler: {expected:.6f}")
print(f"(a 50:50 second coupler would give "
      f"{2.0 * 0.9 * 0.85 / (0.9**2 + 0.85**2):.6f})")

phi_star = balance_phase(alpha2, 0.9, 0.85)
print(f"\nbalance phase from the closed form: {phi_star:.9f} rad")
print(f"offset from quarter wave: {(phi_star - math.pi / 2.0) / math.pi:+.3e} pi")
print(f"scan-resolved null (coarse): {scan.balance_phase_rad:.9f} rad")

# the mean difference current at the null is not exactly zero: the open
# port's vacuum still contributes its variance-driven term
coeffs = coefficients_from_transfer(
    compose_transfer(replace(lossy, phi=phi_star))
)
mean_at_null, _ = analytic_moments(coeffs, lo, sigma2=0.25)
print(f"mean difference current at the null: {mean_at_null:+.3e}")
print(f"fringe amplitude for scale:          {lo.intensity * 0.9 * 0.85:.3e}")

if plt is not None:
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    top.plot(scan.phases / math.pi, scan.port1_power, label="port 1")
    top.plot(scan.phases / math.pi, scan.port2_power, label="port 2")
    top.set_ylabel("mean power (arb.)")
    top.legend(frameon=False)
    top.set_title("lossy 51:49 device, LO intensity 1e4")

    bottom.plot(scan.phases / math.pi, scan.dc_mean, color="k")
    bottom.axvline(phi_star / math.pi, color="tab:red", ls="--", lw=1.0,
                   label="balance phase")
    bottom.axhline(0.0, color="0.7", lw=0.8)
    bottom.set_xlabel("phase (pi rad)")
    bottom.set_ylabel("mean difference current")
    bottom.legend(frameon=False)

    out = HERE / "01_tunable_splitter.png"
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print(f"\nwrote {out}")
else:
    print("\nmatplotlib not available; skipped the plot")
