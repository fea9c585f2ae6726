"""Independent reference implementations used as test oracles.

Everything here is deliberately written with explicit loops and plain math,
separate from the package's vectorized code paths, so tests compare two
independently derived answers.
"""

from __future__ import annotations

import cmath
import math

import numpy as np


def naive_profile(unit_vectors, positions, channels, wavelength_m, kappa):
    """Two-loop Bartlett reference: |sum_m h_m e^{-j kappa k (u_c . d_m)}|^2."""
    k = 2.0 * math.pi / wavelength_m
    out = np.zeros(len(unit_vectors))
    for c, u in enumerate(unit_vectors):
        acc = 0.0 + 0.0j
        for d, h in zip(positions, channels):
            phase = kappa * k * (u[0] * d[0] + u[1] * d[1] + u[2] * d[2])
            acc += h * cmath.exp(-1j * phase)
        out[c] = abs(acc) ** 2
    return out


def direct_variance(magnitudes, azimuth_centers, elevation_centers):
    """Direct summation of the spread metric, normalized to 1 for uniform.

    sigma = sum(psi * f) / ((F / A) * sum(psi)), psi measured from the
    maximum cell with wrapped azimuth differences.
    """
    n_el, n_az = magnitudes.shape
    best = (-1.0, 0, 0)
    for e in range(n_el):
        for a in range(n_az):
            if magnitudes[e, a] > best[0]:
                best = (magnitudes[e, a], e, a)
    _, e_max, a_max = best

    def wrap(x):
        return (x + math.pi) % (2.0 * math.pi) - math.pi

    total = 0.0
    weighted = 0.0
    psi_sum = 0.0
    for e in range(n_el):
        for a in range(n_az):
            psi = wrap(azimuth_centers[a] - azimuth_centers[a_max]) ** 2 + (
                elevation_centers[e] - elevation_centers[e_max]
            ) ** 2
            total += magnitudes[e, a]
            weighted += psi * magnitudes[e, a]
            psi_sum += psi
    cells = n_el * n_az
    return weighted / ((total / cells) * psi_sum)


def max_inorder_matching(forward_counters, reverse_counters, skew):
    """Size of the maximum in-order matching with |delta counter| <= skew."""
    nf, nr = len(forward_counters), len(reverse_counters)
    table = [[0] * (nr + 1) for _ in range(nf + 1)]
    for i in range(nf - 1, -1, -1):
        for j in range(nr - 1, -1, -1):
            best = max(table[i + 1][j], table[i][j + 1])
            if abs(forward_counters[i] - reverse_counters[j]) <= skew:
                best = max(best, 1 + table[i + 1][j + 1])
            table[i][j] = best
    return table[0][0]


def multipath_channel(sources, gains, positions, wavelength_m):
    """Loop-based image-source channel: sum_k (g_k / r_k) e^{-j k r_k}."""
    k = 2.0 * math.pi / wavelength_m
    out = []
    for p in positions:
        acc = 0.0 + 0.0j
        for src, g in zip(sources, gains):
            r = math.dist(tuple(src), tuple(p))
            acc += (g / r) * cmath.exp(-1j * k * r)
        out.append(acc)
    return np.array(out)


def bearing_from(anchor, target):
    """Azimuth of the ray from an anchor toward a target point."""
    return math.atan2(target[1] - anchor[1], target[0] - anchor[0])


def ray_distance_sq(point, anchor, bearing):
    """Squared distance from a point to the line through anchor at bearing."""
    n = (math.cos(bearing), math.sin(bearing))
    off = (point[0] - anchor[0], point[1] - anchor[1])
    along = off[0] * n[0] + off[1] * n[1]
    perp = (off[0] - along * n[0], off[1] - along * n[1])
    return perp[0] ** 2 + perp[1] ** 2
