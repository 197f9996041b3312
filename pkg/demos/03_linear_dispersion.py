"""A small standing wave oscillates at sqrt(g k).

The amplitude 1e-6 keeps the dynamics linear; the frequency is read off
the cos(kx) Fourier coefficient of the elevation.
"""
import math

import numpy as np

from wwbreak import dno, dynamics, spectral

g, k, amp = 1.0, 2, 1e-6
grid = spectral.Grid(1, 64)
x = grid.x[0]
state = dynamics.SurfaceState(grid, 0.0, amp * np.cos(k * x), np.zeros_like(x), g)
settings = dno.StripSettings(M=16)
H0 = dynamics.energy(state, settings=settings)

dt, steps = 2e-2, 400
times, coef = [0.0], [amp]
for _ in range(steps):
    state = dynamics.step(state, dt, settings)
    times.append(state.t)
    coef.append(2 * np.mean(state.eta * np.cos(k * x)))
coef = np.array(coef)

# zero crossings of amp cos(omega t)
crossings = [times[i] - coef[i] * dt / (coef[i + 1] - coef[i])
             for i in range(steps) if coef[i] * coef[i + 1] < 0]
omega = math.pi / np.mean(np.diff(crossings))
print(f"measured omega = {omega:.8f}, sqrt(g k) = {math.sqrt(g * k):.8f}")
print("relative energy drift:", (dynamics.energy(state, settings=settings) - H0) / H0)
