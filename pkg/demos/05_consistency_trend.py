# The excess risk of the cross-validated estimator shrinks as the
# sample grows, even with the dimension growing twice as fast. The
# comparison radius follows the boundary growth rate, and the search
# cap keeps their product at exactly n.

from lassocv import consistency_experiment

rows = consistency_experiment(
    n_list=[100, 200, 400],
    p_rule=lambda n: 2 * n,
    q=2.0,
    k=2,
    reps=20,
    seed=3,
    workers=2,
)

print("    n      p    radius   median excess   share above 0.5")
for row in rows:
    print(f"{row.n:5d}  {row.p:5d}   {row.t_n:6.3f}   {row.median_excess:13.5f}"
          f"   {row.exceed_fraction:16.2f}")

drop = rows[0].median_excess / max(rows[-1].median_excess, 1e-12)
print(f"\nmedian excess shrank by a factor of {drop:.1f} from n=100 to n=400")
