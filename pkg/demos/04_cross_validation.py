"""The cross-validation surface over the two penalty weights.

Runs the grid search on one synthetic dataset and prints the mean
validation error for every (theta, lambda) cell, marking the selected one.
"""

import numpy as np

import pcsrrr as pc

scenario = pc.Scenario(grouped=False, p=60, n=50, n_test=50, tau=0.1)
train, test, truth, groups = pc.generate(scenario, seed=4)

lam_grid = pc.default_lambda_grid(train, rank=scenario.r_true, size=6)
theta_grid = pc.default_theta_grid(train, groups, size=5)
plan = pc.CvPlan(lambda_grid=lam_grid, folds=5, theta_grid=theta_grid,
                 rank_grid=(scenario.r_true,), seed=4)

result = pc.cross_validate(train, groups, plan, "proposed")

print("mean validation error by cell (rows: theta, cols: lambda):\n")
print("theta\\lambda " + " ".join(f"{l:8.2f}" for l in lam_grid))
for theta in theta_grid:
    cells = [c for c in result.table if c.hp.theta == theta]
    row = " ".join(
        f"{c.mean_error:8.4f}" + ("*" if c.hp == result.best else " ")
        for c in cells)
    print(f"{theta:11.4g}  {row}")

print(f"\nselected: lambda={result.best.lam:.3f} theta={result.best.theta:g} "
      f"(mean error {result.best_error:.4f})")

report = pc.fit_method("proposed", train, groups, result.best)
tpr, tnr = pc.tpr_tnr(report.active_rows, truth.nonzero_rows, scenario.p)
print(f"refit on all training rows: TPR={tpr:.2f} TNR={tnr:.2f} "
      f"test MSE_Y={pc.mse_y(test.X, report.factors, truth):.4f}")
