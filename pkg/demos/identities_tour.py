"""Floor identities: checked on ranges, or proved outright for rationals."""

import numpy as np

from beatty.identities import KNUTSON, SPORADIC_PAIR, rational_nested_equiv, search_collisions, verify_range

# certified floors: every term is decided exactly or the run stops
print(verify_range("floor(n*(sqrt(2)-1)) + floor(n*(2-sqrt(2)))", "n - 1", 1, 10**4).to_json())
print(verify_range(KNUTSON, lambda n: (n == 0).astype(np.int64), -(10**4), 10**4).verdict)

# two different nested floors that agree on every integer
a, b = SPORADIC_PAIR
print(rational_nested_equiv(a, b).to_json())
print(rational_nested_equiv(["1/2", "2/3"], ["2/3", "1/2"]).to_json())

pairs = search_collisions(9)
print(len(pairs), "collisions with denominators <= 9, e.g.")
for c in pairs[:5]:
    print("  ", c.to_json())
