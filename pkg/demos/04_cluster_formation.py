"""How each protocol organises the same 100 nodes in its first round."""
# %%
from collections import Counter

from mwsnsim import ScenarioConfig, World

for proto in ("MAR", "GRC", "DECA", "DEMC"):
    w = World(ScenarioConfig(protocol=proto, speed=5.0, seed=4))
    w.start_round()
    w.kernel.run(until=w.pcfg.election_window + 0.5)
    roles = Counter(s.role for s in w.nodes[:-1])
    sizes = sorted((len(v.members) for v in w.clusters), reverse=True)
    msgs = w.control_messages()
    print(f"{proto:5s} heads {len(w.heads()):3d}  members {roles['member']:3d}  "
          f"unaffiliated {roles['unaffiliated']:2d}  largest clusters {sizes[:4]}  messages {dict(msgs)}")

# DEMC lets a node two hops out join through a relaying member; DECA needs hellos
# to learn degree, DEMC sends none
