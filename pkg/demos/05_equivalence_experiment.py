"""An end-to-end equivalence experiment with report emission.

Runs the simple-case instance at two resolutions for three sample
functions, computes the assembled trace norm and its maximal-function
counterpart, and reports pairwise ratios with their cross-resolution
stability.  A genuine two-sided equivalence shows as a resolution-stable
ratio; the step function's divergence shows as growth instead.
"""

import tempfile
from pathlib import Path

import mmtrace as mt
from mmtrace.io import parse_config

config = parse_config("""
name = simple3d
kind = grid3d
pieces = square_face theta=1 axis=2 offset=0.5 ; segment theta=2 axis=2 anchor=0.5,0.5
resolutions = 1/8 1/16
functions = linear hoelder:0.6 step
functionals = trace_simple:1 bn
p = 2.5
c = 6
sigma = 0.01
seeds = 0
""")

report = mt.run_equivalence(config)
print("stability of trace/bn ratios across resolutions (relative variation):")
for key, value in report.stability.items():
    print(f"  {key}: {value if value is None else round(value, 4)}")

print("\nstep-function trace values (growth = divergence signal):")
for cell in report.cells:
    if cell.function == "step" and cell.functional == "trace_simple:1":
        print(f"  h={cell.resolution}: {cell.report.value:.4f}")

with tempfile.TemporaryDirectory() as tmp:
    csv_path = mt.report_emit(report, "csv", str(Path(tmp) / "report.csv"), config)
    lines = Path(csv_path).read_text().splitlines()
    print(f"\nCSV report: {len(lines) - 1} rows, header:")
    print(" ", lines[0])
    print(" ", lines[1])

# the energy probe: the homogeneous trace parts of a smooth extension are
# controlled by its discrete Sobolev-type norm
space, pw = mt.generate(mt.simple_case_spec(1 / 8), verify=False)
F = mt.make_sample_function(space, pw, "linear")
ratio = mt.dirichlet_upper_bound_probe(space, F, 2.5, pw)
print(f"\nenergy probe for the linear extension: {ratio:.4f}")
