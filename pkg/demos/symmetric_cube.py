"""Jumps of a symmetric polynomial in floors sit on the corners of a cube.

For a_n = floor(n*a1)*floor(n*a2) the normalized step (a_{n+1} - a_n)/n
clusters at the four subset sums of the gradient (a2, a1) shifted by a
base point.  Peeling the cube returns the edges; inverting the gradient
returns the parameters.
"""

import numpy as np

from beatty.reals import sqrt
from beatty.seqgen import gen_poly_of_floors
from beatty.symmetric import SymmetricForm, cluster_limit_points, normalized_jumps, peel_cube_edges, recover_symmetric

form = SymmetricForm("product", 2)
seq = gen_poly_of_floors(form.polynomial(), [sqrt(2), sqrt(3)], 10**5)
_, delta = normalized_jumps(seq, 2)
corners = cluster_limit_points(delta, 4)
print("cluster centres:", np.round(corners.corners, 4).tolist())
print("edges:", np.round(peel_cube_edges(corners).values, 4).tolist())
print("alphas:", [round(v, 4) for v in recover_symmetric(seq, form).values])

# exact peeling on a hand-made cube, and a near miss that is not a cube
print(peel_cube_edges([0, 1, 4, 5, 9, 10, 13, 14]).values)
try:
    peel_cube_edges([0, 1, 2, 4])
except Exception as exc:
    print("rejected:", exc)

form = SymmetricForm("quadratic", 3)
seq = gen_poly_of_floors(form.polynomial(), [sqrt(2), sqrt(3), sqrt(5)], 10**5)
print("quadratic:3 ->", [round(v, 4) for v in recover_symmetric(seq, form).values])
