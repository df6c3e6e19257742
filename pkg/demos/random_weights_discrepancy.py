"""How far a random weight drifts from its mean on mesoscopic cells.

Split the unit cube into n^d cells, each split into m^d subcells carrying
independent weights.  The discrepancy D is the average over cells of
|cell mean - expected mean|.  Its expectation is at most m^(-d/2) and it
reaches that level only with probability about exp(-0.3 n^d).  In the
plane m^(-d/2) is 1/m.  Below are 200 trials per setting, reproducible
from the seed.

Run:  python demos/random_weights_discrepancy.py
"""
from pfh import stochastic_discrepancy

print(f"{'n':>3}{'m':>4}{'mean D':>12}{'m^-1':>8}{'P(D >= 1/m)':>14}{'bound':>12}")
for n, m in ((2, 4), (4, 4), (8, 4), (8, 10), (8, 20)):
    s = stochastic_discrepancy(n, m, 2, dist="uniform01", trials=200, seed=0)
    print(f"{n:>3}{m:>4}{s.empirical_mean:>12.5f}{s.bound_mean:>8.3f}{s.empirical_tail_freq:>14.3f}{s.bound_tail:>12.2e}")

s = stochastic_discrepancy(8, 10, 2, dist="bernoulli", p=0.3, trials=200, seed=0)
print(f"\nbernoulli(0.3), n=8, m=10: mean D = {s.empirical_mean:.5f} (std. error {s.std_error:.1e})")
