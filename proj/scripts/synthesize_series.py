#!/usr/bin/env python3
"""Generate the bundled stand-in for the 1889-1978 annual US series.

The replication data set is not redistributed here. This script builds a
deterministic synthetic series whose 89 paired observations (1890-1978) hit
the published Mehra-Prescott (1985) sample statistics exactly:

    consumption growth   mean 1.83%   std 3.57%
    S&P 500 real return  mean 6.98%   std 16.54%
    riskless real return mean 0.80%   std 5.67%

Cross-correlations are assumed (not published in the source tables):
corr(x, R_e) = 0.40, corr(x, R_f) = 0.20, corr(R_e, R_f) = 0.10.

Consumption is anchored so the 1977 level equals the level whose CRRA
utility at tau = 1.0319 is 7.14871804.

Usage: python3 scripts/synthesize_series.py > data/mp_1889_1978.csv
"""

import math
import sys

import numpy as np

FIRST_YEAR = 1889
LAST_YEAR = 1978
ANCHOR_YEAR = 1977
ANCHOR_TAU = 1.0319
ANCHOR_UTILITY = 7.14871804

MEANS = np.array([1.0183, 1.0698, 1.0080])
STDS = np.array([0.0357, 0.1654, 0.0567])
CORR = np.array([[1.00, 0.40, 0.20],
                 [0.40, 1.00, 0.10],
                 [0.20, 0.10, 1.00]])


def anchor_consumption():
    one_minus_tau = 1.0 - ANCHOR_TAU
    return (1.0 + one_minus_tau * ANCHOR_UTILITY) ** (1.0 / one_minus_tau)


def main():
    rng = np.random.default_rng(1985)
    n_years = LAST_YEAR - FIRST_YEAR + 1
    draws = rng.standard_normal((n_years, 3))

    # Rows 1..89 carry the paired observations; whiten them to an exact
    # identity sample covariance, then colour with the target correlation.
    paired = draws[1:]
    centre = paired.mean(axis=0)
    cov = np.cov(paired, rowvar=False, ddof=1)
    whiten = np.linalg.inv(np.linalg.cholesky(cov))
    colour = np.linalg.cholesky(CORR)
    transform = lambda z: ((z - centre) @ whiten.T) @ colour.T
    scaled = MEANS + STDS * transform(draws)

    growth = scaled[:, 0]
    equity = scaled[:, 1]
    riskfree = scaled[:, 2]
    assert (scaled > 0).all()

    levels = np.empty(n_years)
    levels[0] = 1.0
    for i in range(1, n_years):
        levels[i] = levels[i - 1] * growth[i]
    levels *= anchor_consumption() / levels[ANCHOR_YEAR - FIRST_YEAR]

    out = sys.stdout
    out.write("year,consumption,equity_return,riskfree_return\n")
    for i in range(n_years):
        out.write("%d,%.6f,%.10f,%.10f\n" % (FIRST_YEAR + i, levels[i], equity[i], riskfree[i]))


if __name__ == "__main__":
    main()
