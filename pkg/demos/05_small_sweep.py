"""A small protocol x mobility sweep, its CSV and the plot tables built from it."""
# %%
from mwsnsim import ScenarioConfig
from mwsnsim.experiment import SweepSpec, emit_plotdata, read_rows, run_sweep

spec = SweepSpec(base=ScenarioConfig(duration=300.0),
                 protocols=("GRC", "GRC-R", "DEMC", "DEMC-R"),
                 mobility_models=("random-waypoint", "linear"),
                 speeds=(5.0, 15.0), seeds=(1, 2, 3))
text = run_sweep(spec, jobs=2)   # same bytes for any jobs value
print(text.splitlines()[0])
print(len(read_rows(text)), "rows")

# %%
# one figure: loss against speed, one series per protocol with a 95% CI
table = emit_plotdata(text, "loss", "rwp", spec.protocols)
print(table.to_csv())

# %%
# the aggregate rows ("mean" in the seed column) give the quick comparison
for row in read_rows(text):
    if row["seed"] == "mean":
        print(f"{row['protocol']:7s} {row['mobility']:16s} {row['speed_mps']:>10s}  pdr {row['pdr_unique']}")
