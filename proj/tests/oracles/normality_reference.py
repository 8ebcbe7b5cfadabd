"""Independent reference values for the normality unit tests.

Generates the CSV fixtures under tests/data/ and prints the expected
statistics, which are frozen into tests/test_normality.cpp. Anderson-Darling
values come from statsmodels; Mardia values from a direct O(n^2) evaluation of
the Mahalanobis cross products with scipy's chi-squared and normal tails.
"""
import pathlib

import numpy as np
from scipy import stats
from statsmodels.stats.diagnostic import normal_ad

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def save(name, arr):
    arr = np.atleast_2d(arr.T).T if arr.ndim == 1 else arr
    np.savetxt(DATA / name, arr, delimiter=",", fmt="%.17g")
    return np.loadtxt(DATA / name, delimiter=",", ndmin=2)


def ad(x):
    a2, p = normal_ad(x)
    n = len(x)
    return a2 * (1 + 0.75 / n + 2.25 / n**2), p


def mardia(y):
    n, p = y.shape
    yc = y - y.mean(0)
    s = yc.T @ yc / n
    g = yc @ np.linalg.solve(s, yc.T)
    b1 = (g**3).sum() / n**2
    b2 = (np.diag(g) ** 2).mean()
    skew = n * b1 / 6
    df = p * (p + 1) * (p + 2) / 6
    z = (b2 - p * (p + 2)) / np.sqrt(8 * p * (p + 2) / n)
    return b1, b2, stats.chi2.sf(skew, df), 2 * stats.norm.sf(abs(z))


def pca_project(x, k):
    xc = x - x.mean(0)
    w, v = np.linalg.eigh(xc.T @ xc / len(x))
    return xc @ v[:, ::-1][:, :k]


rng = np.random.default_rng(20240611)

normal = save("ad_normal.csv", rng.standard_normal(1000))[:, 0]
print("ad_normal      A*2=%.17g p=%.17g" % ad(normal))

bimodal = np.concatenate([rng.normal(-3, 1, 500), rng.normal(3, 1, 500)])
bimodal = save("ad_bimodal.csv", rng.permutation(bimodal))[:, 0]
print("ad_bimodal     A*2=%.17g p=%.17g" % ad(bimodal))

small = save("ad_small.csv", rng.standard_normal(12) * 2.5 + 1.0)[:, 0]
print("ad_small       A*2=%.17g p=%.17g" % ad(small))

mvn = save("mardia_normal.csv", rng.standard_normal((5000, 5)))
print("mardia_normal  b1=%.17g b2=%.17g skew_p=%.17g kurt_p=%.17g" % mardia(mvn))

centers = rng.normal(0, 4, (10, 8))
labels = rng.integers(0, 10, 5000)
mixed = save("mardia_mixture.csv", centers[labels] + rng.standard_normal((5000, 8)))
print("mardia_mixture b1=%.17g b2=%.17g skew_p=%.17g kurt_p=%.17g" % mardia(pca_project(mixed, 5)))

skewed = save("ad_skewed.csv", rng.exponential(1.0, 40))[:, 0]
print("ad_skewed      A*2=%.17g p=%.17g" % ad(skewed))
