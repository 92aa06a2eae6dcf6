"""The trace-characterizing functionals on both canonical instances.

Simple case (all codimensions positive): per-piece Besov norms plus a
cross-piece gluing term, compared against the maximal-function form.
Difficult case (one fat piece): L_p and sharp-maximal parts on the fat
piece, a Besov norm on the thin one, and the doubly averaged gluing term,
compared against the packing-type functional.
"""

import mmtrace as mt

p = 2.5

print("=== simple case: face (codim 1) + segment (codim 2) in the cube ===")
space, pw = mt.generate(mt.simple_case_spec(1 / 16), verify=False)
seq = mt.build_measure_sequence(space, pw, theta=2.0, p=p)
f = mt.make_sample_function(space, pw, "hoelder:0.6")

for which in (1, 2, 3):
    print(f"GL{which} =", round(mt.gluing(space, pw, f, p, which).value, 4))

seg = pw.pieces[1]
bes = mt.besov_norm(space, seg, f, 1 - seg.theta / p, p)
bes_alt = mt.besov_norm_alt(space, seg, f, 1 - seg.theta / p, p)
print(f"segment Besov: {bes.value:.4f}, alternative form: {bes_alt.value:.4f}, "
      f"ratio {bes_alt.value / bes.value:.3f}")

sharp = mt.calderon_maximal(space, seq, f)
print("maximal function range on S:", round(float(sharp.min()), 3), "-", round(float(sharp.max()), 3))

bn = mt.bn_functional(space, seq, pw, f, p, sigma=0.01, c=6.0)
ts = mt.trace_norm_simple(space, pw, f, p, l=1)
print(f"trace norm (l=1): {ts.value:.4f}  parts {ts.parts}")
print(f"maximal-function form: {bn.value:.4f}  ratio {ts.value / bn.value:.3f}")

print("\n=== difficult case: half-plane region (codim 0) + boundary segment ===")
space2, pw2 = mt.generate(mt.difficult_case_spec(1 / 16), verify=False)
seq2 = mt.build_measure_sequence(space2, pw2, theta=1.0, p=p)
g = mt.make_sample_function(space2, pw2, "linear")

td = mt.trace_norm_difficult(space2, pw2, g, p)
print("trace norm parts:", {k: round(v, 4) for k, v in td.parts.items()})

bsn = mt.bsn_functional(space2, seq2, g, p, c=6.0, search_budget=256)
print(f"packing functional (searched lower bound, {bsn.params['family_size']} balls): "
      f"{bsn.value:.4f}  ratio {td.value / bsn.value:.3f}")

idx, ibar, wit = mt.combinatorial_expand(space2, pw2, mt.Ball(0, 0.25), c=2.0)
print(f"combinatorial expansion at the corner: pieces {idx}, i_bar = {ibar}, witnesses {wit}")
