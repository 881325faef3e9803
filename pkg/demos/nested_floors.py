"""Nested floors: a_n = floor(floor(floor(n*a1)*a2)*a3).

Two routes back to the parameters.  The step sizes form 2**d levels, one
per floor/ceiling word, and their rates give the fractional parts.  The
moments of the deficit n*a1*a2*a3 - a_n give the parameters themselves
when they lie in (0, 1).
"""

from beatty.nested import empirical_moments, jump_spectrum, moment_formula, recover_nested, word_densities
from beatty.reals import RealExpr, sqrt
from beatty.seqgen import gen_nested

alphas = [sqrt(2), 1 + sqrt(3), sqrt(5)]
seq = gen_nested(alphas, 10**6)
sp = jump_spectrum(seq, 3)
want = word_densities(alphas)
for (level, rate), (word, density) in zip(sp.levels, sorted(want.items())):
    print(f"  level {level:3d}  word {''.join(map(str, word))}  rate {rate:.4f}  predicted {float(density):.4f}")
print("fractional parts:", [round(v, 4) for v in recover_nested(seq, 3).values])

# a rational parameter can collapse a level
lost = [sqrt(2), 1 + sqrt(3), RealExpr.rational("12/5")]
print("with 12/5, zero-density words:", [w for w, v in word_densities(lost).items() if v == 0])

small = [sqrt(2) / 2, sqrt(3) / 2, sqrt(5) / 3]
seq = gen_nested(small, 10**6)
m = empirical_moments(seq, 3)
for k in (1, 2, 3):
    print(f"  T3{k}: empirical {m[(3, k)]:.5f}  closed form {float(moment_formula((3, k), small)):.5f}")
res = recover_nested(seq, 3, "moments")
print("moments ->", [round(v, 4) for v in res.values], "T32 residual", f"{res.diagnostics['T32_residual']:.1e}")
