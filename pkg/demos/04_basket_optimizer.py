"""Pick the best basket of assets under a budget, synergies included.

Values come from wherever you trust (market-implied prices, desk
estimates); the optimizer takes integer cents and returns a proven
optimum. The linearized model can also be exported for an industrial
solver.
"""

from toxmarket.optimizer import (
    BasketInstance,
    brute_force_basket,
    build_model,
    format_instance,
    format_model,
    optimize_basket,
)

# Six sites; two adjacent pairs complement each other, one pair are
# substitutes. All figures in cents.
instance = BasketInstance(
    values=(9_000_00, 7_500_00, 6_000_00, 5_000_00, 4_000_00, 3_500_00),
    costs=(6_000_00, 5_500_00, 4_000_00, 3_500_00, 2_500_00, 2_000_00),
    synergies={
        (0, 1): 3_000_00,    # shared access road
        (2, 3): 1_500_00,
        (4, 5): -2_500_00,   # same catchment, one buyer
    },
    budget=15_000_00,
)

print("instance file form:")
print(format_instance(instance))

solution = optimize_basket(instance)
print(f"proof: {solution.proof}")
print(f"selected sites: {solution.selected}")
print(f"objective: EUR {solution.objective_cents/100:,.2f}")
print(f"spend:     EUR {solution.spend_cents/100:,.2f} of EUR {instance.budget/100:,.2f}")

oracle = brute_force_basket(instance)
print("brute-force oracle agrees:", oracle.objective_cents == solution.objective_cents)

print("\nlinearized model for an external solver:")
print(format_model(build_model(instance)))
