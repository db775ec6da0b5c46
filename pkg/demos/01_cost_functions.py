"""How the three window costs respond to a known shift.

A textured pair is built with a constant disparity of 5. For one pixel we
print SAD, MSE and 1 - NCC at every candidate disparity: all three bottom
out at the true shift, with very different dynamic ranges.
"""

from stereobench.cost import mse_window, ncc_window, sad_window
from stereobench.synthetic import shifted_pair

left, right = shifted_pair(40, 60, shift=5, seed=0)
x, y, r = 30, 20, 3

print(f"{'d':>3} {'SAD':>9} {'MSE':>9} {'1-NCC':>9}")
for d in range(11):
    sad = sad_window(left, right, x, y, d, r)
    mse = mse_window(left, right, x, y, d, r)
    ncc = ncc_window(left, right, x, y, d, r)
    mark = "  <- true shift" if d == 5 else ""
    print(f"{d:>3} {sad:9.4f} {mse:9.5f} {1 - ncc:9.5f}{mark}")
