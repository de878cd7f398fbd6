"""
Print the universal constants behind the threshold rule and the conversion
factor from the variance-minimising k* to the MSE-minimising k0*.

    python demos/05_constants.py
"""

import time

from trimhill import compute_universal_constants, conversion_factor, f_of_p

t0 = time.perf_counter()
u = compute_universal_constants(1e-9)
print(f"Computed by adaptive quadrature in {time.perf_counter() - t0:.1f}s:")
print(f"  I1 = {u.I1:.7f}   I2 = {u.I2:.7f}   I3 = {u.I3:.7f}")
print(f"  variance constant C = {u.C:.7f}\n")

print("  p       f(p)        1/factor(p)")
for p in (-0.25, -0.5, -1.0, -2.0, -4.0, -8.0):
    print(f"  {p:5.2f}   {f_of_p(p):.7f}   {1 / conversion_factor(p):.6f}")
print("\nk0* = round(k* x factor(p)); the rule uses p = -1 unless told otherwise.")
