#!/usr/bin/env python3
"""Replay the regression from the published per-source summaries alone.

No simulation involved: feeds the quoted per-source low-voltage means and
SEMs into the weighted fit and prints the intercept, slope, nonlinearity
estimate, and the 90% CL bound under each available rule.
"""

import numpy as np

from qvolt import analysis

POINTS = [
    analysis.RegressionPoint(x=0.00, y=-0.307e-9, sigma=0.020e-9, label="c1"),
    analysis.RegressionPoint(x=0.49, y=-0.316e-9, sigma=0.029e-9, label="q2"),
    analysis.RegressionPoint(x=0.05, y=-0.302e-9, sigma=0.047e-9, label="q3"),
]


def main():
    fit = analysis.wls_fit(POINTS, v1=3.0)
    print(f"intercept = {fit.intercept * 1e9:+.4f} +- {fit.sigma_intercept * 1e9:.4f} nV")
    print(f"slope     = {fit.slope * 1e9:+.4f} +- {fit.sigma_slope * 1e9:.4f} nV")
    print(f"eps       = {fit.eps:+.3e} +- {fit.sigma_eps:.3e}")

    mc = analysis.mc_errors(POINTS, np.random.default_rng(0), n_real=10_000)
    print(f"MC sd(slope) = {mc.sd_slope * 1e9:.4f} nV ({mc.n_realizations} realizations)")

    for rule in ("central", "folded", "mc-percentile"):
        bound = analysis.confidence_bound(
            fit.eps, fit.sigma_eps, cl=0.90, rule=rule, rng=np.random.default_rng(1)
        )
        print(f"90% CL bound ({rule:13s}): |eps| < {bound:.3e}")


if __name__ == "__main__":
    main()
