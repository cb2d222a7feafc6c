"""Three mobility models on a 1000 x 1000 m field, one node each, 600 s."""
# %%
import math

import numpy as np

from mwsnsim.kernel import RandomStream
from mwsnsim.mobility import FieldGeometry, MobilityParams, init_state, step

field = FieldGeometry(1000.0, 1000.0)

for model in ("random-waypoint", "mass", "linear"):
    p = MobilityParams(model, 10.0, 10.0)
    stream = RandomStream(3, "mobility/0")
    s = init_state((500.0, 500.0), p, field, stream)
    xs, ys, headings = [], [], []
    for _ in range(600):
        s = step(s, p, 1.0, stream, field)
        xs.append(s.x)
        ys.append(s.y)
        headings.append(math.atan2(s.vy, s.vx))
    # heading churn: how often the direction changes, the thing that hurts clustering
    turns = np.abs(np.angle(np.exp(1j * np.diff(headings))))
    print(f"{model:16s} final ({s.x:7.1f}, {s.y:7.1f})  mean turn {turns.mean():.3f} rad/s  "
          f"bbox {min(xs):.0f}-{max(xs):.0f} x {min(ys):.0f}-{max(ys):.0f}")

# %%
# walls reflect specularly: the speed never changes for the linear model
p = MobilityParams("linear", 12.5, 12.5)
s = init_state((990.0, 10.0), p, field, RandomStream(1, "mobility/0"), heading=-math.pi / 4)
for _ in range(5):
    s = step(s, p, 1.0, None, field)
    print(f"({s.x:.2f}, {s.y:.2f}) speed {s.speed:.12f}")
