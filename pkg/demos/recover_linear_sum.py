"""Hide three irrationals in a sum of Beatty sequences, then get them back.

    a_n = floor(n*(sqrt2 - 1)) + floor(n*(sqrt3 - 1)) + floor(n*(sqrt5 - 2))

Each step of a_n is 0, 1, 2 or 3.  The step frequencies are the coefficients
of prod((1 - a) + a z), so the roots of that polynomial give back the
fractional parts.  Run:  python demos/recover_linear_sum.py
"""

from beatty.jumps import fit_jump_polynomial, jump_histogram, recover_linear
from beatty.reals import sqrt
from beatty.seqgen import ParameterVector, gen_linear_sum

alphas = (sqrt(2) - 1, sqrt(3) - 1, sqrt(5) - 2)
seq = gen_linear_sum(ParameterVector(alphas), 10**5)
print("first terms:", seq.values[:12].tolist())

hist = jump_histogram(seq)
print("jump counts:", dict(sorted(hist.counts.items())))
poly = fit_jump_polynomial(hist, 3)
print("frequencies:", [round(float(c), 4) for c in poly.coefficients])

res = recover_linear(seq, 3)
truth = sorted(float(a) for a in alphas)
for est, t in zip(res.recovered, truth):
    print(f"  recovered {est.value:.5f} +- {est.radius:.1e}   true {t:.5f}")
print("slope", round(res.slope.value, 6), "flags", res.flags)
