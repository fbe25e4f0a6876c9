"""Every closed-form rate bound in one table.

All universal constants default to 1 and are shape-only; where the source
expressions are ambiguous between log bases, both readings are kept in the
result's terms.
"""

from distest import bounds

d, m, n, sigma2 = 4, 16, 64, 1.0
per_machine = (float(d),) * m
total = float(d * m)

q_per = bounds.RateQuery(d=d, m=m, n=n, sigma2=sigma2,
                         budgets_per_machine=per_machine)
q_tot = bounds.RateQuery(d=d, m=m, n=n, sigma2=sigma2, budget_total=total,
                         lambda_max2=1.0, lambda_min2=0.5)

rows = [
    bounds.prop1_lower(total, bounds.unit_interval_entropy_inverse),
    bounds.theorem1_lower(q_per),
    bounds.prop2_lower(bounds.RateQuery(d=d, m=m, n=1,
                                        budgets_per_machine=per_machine)),
    bounds.theorem2_lower(q_tot),
    bounds.prop3_lower(q_tot),
    bounds.prop3_budget(d, m, n),
    *bounds.cor1_rates(q_tot),
    *bounds.cor2_rates(q_tot),
    bounds.packing_entropy_hypercube_lower(d, 1 / 16),
]

print(f"inputs: d={d} m={m} n={n} sigma2={sigma2} "
      f"B_i={per_machine[0]} B={total}")
print(f"{'formula':<16} {'value':>14}  terms")
for res in rows:
    terms = ", ".join(f"{k}={v:.4g}" for k, v in sorted(res.terms.items()))
    print(f"{res.formula_id:<16} {res.value:>14.6g}  {terms}")

print(f"{'centralized':<16} {bounds.centralized_rate('gaussian', d, m, n, sigma2):>14.6g}"
      f"  (gaussian family)")
print(f"{'pstar':<16} {bounds.tail_pstar(4.0, 0.1, 4, 1.0):>14.6g}"
      f"  (a=4, delta=0.1, n=4, sigma=1)")
