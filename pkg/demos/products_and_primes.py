"""Products of Beatty sequences factor back into their parts.

If a_n = floor(n*a1) * floor(n*a2) and a_n has a prime factor q with
q**2 >= a_n, then q usually *is* floor(n*a1), which pins a1 to
[q/n, (q+1)/n).  Not always: q can be a proper divisor of floor(n*a1), so
the intervals are combined by vote rather than intersected blindly.
"""

from beatty.product import beatty_prime_scan, detect_leading_floor, recover_product
from beatty.reals import sqrt
from beatty.seqgen import gen_poly_of_floors

seq = gen_poly_of_floors("x1*x2", [sqrt(5), sqrt(2)], 10**4)
for n, v in enumerate(seq.values[:20].tolist(), start=1):
    det = detect_leading_floor(v, n, 2)
    if det is not None:
        print(f"a_{n} = {v} = {det.q} * {v // det.q}, so sqrt5 lies in [{det.lo}, {det.hi})")
        break

res = recover_product(seq, 2)
print("sqrt5, sqrt2 ->", [round(v, 6) for v in res.values], res.flags)

res = recover_product(gen_poly_of_floors("x1*x2", ["7/3", "13/9"], 10**4), 2)
print("7/3, 13/9   ->", [str(e.exact) for e in res.recovered])

res = recover_product(gen_poly_of_floors("x1*x2", [sqrt(37), sqrt(2)], 10**4), 2)
print("sqrt37 case flags:", res.flags)

# Beatty sequences are full of primes, except when they cannot be
print("primes in floor(n*sqrt2), n <= 1e4:", len(beatty_prime_scan(sqrt(2), 0, 10**4)))
print("primes in floor(15n/2 + 3), 1 <= n <= 1e5:", len(beatty_prime_scan("15/2", 3, 10**5)))
print("  ...and at n = 0:", beatty_prime_scan("15/2", 3, 0, start=0))
