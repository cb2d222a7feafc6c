"""One scenario end to end: 100 nodes, GRC-R, random waypoint at 10 m/s."""
# %%
from mwsnsim import ScenarioConfig, simulate

cfg = ScenarioConfig(protocol="GRC-R", mobility="random-waypoint", speed=10.0, seed=1)
rec, world = simulate(cfg)

print(cfg.config_hash())
print(f"sent {rec.sent}  delivered {rec.delivered_unique}  dropped {rec.dropped}  "
      f"in flight {rec.in_flight_at_end}")
print(f"loss {rec.loss_pct:.2f} %   pdr {rec.pdr_unique:.4f}")

# where the packets went
for reason, n in world.drop_reasons.most_common():
    print(f"  {reason:20s} {n}")

# %%
# the same scenario without node movement delivers everything
static, _ = simulate(cfg.with_(speed=0.0, range=300.0))
print(f"static: loss {static.loss_pct:.6f} %  pdr {static.pdr_unique:.6f}")
