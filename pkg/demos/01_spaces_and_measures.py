"""Point clouds as metric measure spaces: balls, nets, doubling, decay.

Builds grid spaces of one and three dimensions, queries closed balls,
constructs separated nets, and estimates the doubling constant and the
relative volume-decay orders (which recover the ambient dimension).
"""

import numpy as np

import mmtrace as mt

# an 11-point segment with uniform mass
coords = np.linspace(0, 1, 11).reshape(-1, 1)
line = mt.FiniteMetricMeasureSpace(weights=np.full(11, 1 / 11), coords=coords, resolution=0.1)

ball = mt.Ball(center=5, radius=0.15)
members = mt.ball_members(line, ball)
print("ball around 0.5 of radius 0.15 contains:", line.coords[members].ravel())
print("its mass:", mt.mu_ball(line, ball))

net = mt.separated_net(line, range(11), k=2)   # separation 2^-2
print("greedy 1/4-separated net:", line.coords[net.points].ravel(),
      "covering radius:", round(net.covering_radius, 3))

for r in (1.0, 0.3, 2 ** -5):
    print(f"k(r) for r={r}: {mt.k_of_r(r)}")

# a 3-d grid: the doubling constant is near 2^3 and the decay orders
# recover the dimension
space3, _ = mt.generate(mt.simple_case_spec(1 / 16), verify=False)
C, (x_star, r_star) = mt.doubling_constant(space3, 0.25)
print(f"\n3-d grid doubling constant: {C:.2f} attained at point {x_star}, r={r_star}")
decay = mt.decay_exponents(space3, 0.5)
print(f"decay orders: Q={decay.Q_est:.3f}, q={decay.q_est:.3f} "
      f"(central slope {decay.central_slope:.3f}, {decay.n_pairs} pairs)")
