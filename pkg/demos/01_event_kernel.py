"""The event kernel: ordering, ties, cancellation and seeded streams."""
# %%
from mwsnsim.kernel import Kernel, RandomStream

k = Kernel(record=True)
seen = []
k.schedule(2.0, "round-timer", seen.append, "round")
k.schedule(1.0, "packet-delivery", seen.append, "first at t=1")
k.schedule(1.0, "packet-delivery", seen.append, "second at t=1")  # same time, FIFO
late = k.schedule(3.0, "recovery-timeout", seen.append, "never")
k.cancel(late)
k.run()
print(seen)          # ['first at t=1', 'second at t=1', 'round']
print(k.now)         # with no horizon the clock stays at the last event
for line in k.trace_lines():
    print(line)

# %%
# every concern gets its own stream, keyed by (seed, label)
a = RandomStream(7, "mobility/0")
b = RandomStream(7, "mobility/0")
c = RandomStream(7, "traffic")
print([round(a.uniform(0, 1), 6) for _ in range(3)])
print([round(b.uniform(0, 1), 6) for _ in range(3)])   # identical
print([round(c.uniform(0, 1), 6) for _ in range(3)])   # independent
