"""Fit the first-order drawdown model to one recession.

The decay constant is the slope of the least-squares line through the
(level, level-rate) pairs; the fitted curve C*exp(alpha*t) + b is compared
with the samples, and the decay constant is translated into drain times.
"""

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from gidrain import StormEvent, estimate_derivative, fit_storm, time_to_drain

dt_hours = 1 / 6
t = np.arange(0, 36 + 1e-9, dt_hours)
rng = np.random.default_rng(11)
level = 0.85 * np.exp(-0.17 * t) + 0.06 + rng.normal(0, 0.005, t.size)

storm = StormEvent("DEMO", 0, 0, t.size - 1, level[0], 0.85)
fit = fit_storm(storm, level, dt_hours)
print(f"alpha = {fit.alpha:.4f} 1/hr   (generator used -0.17)")
print(f"b     = {fit.offset_b:.4f} m    (generator used 0.06)")
print(f"C     = {fit.scale_C:.4f} m, r2 = {fit.r_squared:.4f}, rmse = {fit.rmse:.4f} m")

h, dhdt = estimate_derivative(level, dt_hours)
recon = fit.scale_C * np.exp(fit.alpha * t) + fit.offset_b

fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
left.plot(h, dhdt, ".", ms=2, alpha=0.5)
hh = np.linspace(h.min(), h.max(), 50)
left.plot(hh, fit.alpha * (hh - fit.offset_b), "r-", lw=1.5)
left.set_xlabel("level h (m)")
left.set_ylabel("dh/dt (m/hr)")
left.set_title("line fit in (h, dh/dt) space")
right.plot(t, level, ".", ms=2, alpha=0.5, label="samples")
right.plot(t, recon, "r-", lw=1.5, label="fitted curve")
right.set_xlabel("hours")
right.set_ylabel("level (m)")
right.legend()
fig.tight_layout()
fig.savefig("demo02_drawdown_fit.png", dpi=120)
print("wrote demo02_drawdown_fit.png")

# what the constant means operationally: hours to drain 1 m to 1 cm
print("\nhours to drain 1 m down to 1 cm:")
for alpha in (-0.011, -0.05, -0.119, -0.2, -0.397):
    flag = "  <- meets a 24 h window" if time_to_drain(alpha, 1.0, 0.01) <= 24 else ""
    print(f"  alpha {alpha:+.3f}: {time_to_drain(alpha, 1.0, 0.01):7.1f} h{flag}")
