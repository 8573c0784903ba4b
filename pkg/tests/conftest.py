"""Shared fixtures: synthetic data and independent brute-force oracles.

The oracles here deliberately re-derive everything from definitions
(subset enumeration, vertex enumeration, grid search) so they share no
code path with the package implementations they check.
"""

import csv
import itertools
import math

import numpy as np

from marginforge.core import Dataset


def two_gaussians(m: int, seed: int, p: int = 2, spread: float = 0.9, shift: float = 1.1) -> Dataset:
    """Two overlapping Gaussian blobs with +-1 labels, m/2 each."""
    rng = np.random.default_rng(seed)
    half = m // 2
    neg = rng.normal(-shift, spread, (half, p))
    pos = rng.normal(shift, spread, (m - half, p))
    features = np.vstack([neg, pos])
    labels = np.concatenate([-np.ones(half), np.ones(m - half)])
    return Dataset(features, labels)


def write_csv(path, data: Dataset):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j}" for j in range(data.p)] + ["label"])
        for row, label in zip(data.features, data.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def oracle_projection(theta, nu: float, eta: float):
    """Entropy projection by enumerating every capped subset (KKT forms).

    For each candidate set S capped at 1/nu the remaining mass is spread
    over the complement proportionally to exp(-eta*theta); the feasible
    candidate with the smallest objective is the optimum.
    """
    theta = np.asarray(theta, dtype=float)
    m = theta.shape[0]
    cap = 1.0 / nu
    best = None
    for k in range(m + 1):
        if k * cap >= 1.0 + 1e-12 and k > 0:
            continue
        for capped in itertools.combinations(range(m), k):
            remaining = 1.0 - k * cap
            free = [i for i in range(m) if i not in capped]
            d = np.zeros(m)
            d[list(capped)] = cap
            if free:
                weights = np.exp(-eta * (theta[free] - np.min(theta[free])))
                d[free] = remaining * weights / weights.sum()
            elif remaining > 1e-12:
                continue
            if np.any(d > cap * (1.0 + 1e-10)):
                continue
            pos = d[d > 1e-15]
            objective = float(d @ theta) + (float(pos @ np.log(pos)) + math.log(m)) / eta
            if best is None or objective < best[0]:
                best = (objective, d)
    return best[1], best[0]


def capped_simplex_vertices(m: int, nu: float):
    """All extreme points of the capped simplex: k entries at 1/nu, at
    most one fractional entry carrying the leftover, zeros elsewhere."""
    cap = 1.0 / nu
    seen = set()
    out = []
    for k in range(int(math.floor(nu)) + 1):
        leftover = 1.0 - k * cap
        if leftover < -1e-12:
            continue
        for capped in itertools.combinations(range(m), k):
            if leftover <= 1e-12:
                d = np.zeros(m)
                d[list(capped)] = cap
                key = tuple(np.round(d, 12))
                if key not in seen:
                    seen.add(key)
                    out.append(d)
                continue
            if leftover > cap + 1e-12:
                continue  # not a vertex: more than one fractional entry needed
            for frac in range(m):
                if frac in capped:
                    continue
                d = np.zeros(m)
                d[list(capped)] = cap
                d[frac] = leftover
                key = tuple(np.round(d, 12))
                if key not in seen:
                    seen.add(key)
                    out.append(d)
    return out


def min_linear_over_cap(vector, nu: float) -> float:
    """Exact min of d @ vector over the capped simplex via its vertices."""
    vector = np.asarray(vector, dtype=float)
    return min(float(d @ vector) for d in capped_simplex_vertices(vector.shape[0], nu))
