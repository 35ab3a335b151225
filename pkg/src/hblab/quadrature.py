"""Quadrature on the unit sphere S^{n-1} and boundary sampling grids."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import special


@lru_cache(maxsize=64)
def sphere_rule(n: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule exact for polynomials of degree <= ``order`` on S^{n-1}.

    n = 2 is the trapezoid rule in angle; higher n peel off one polar angle at
    a time with Gauss-Gegenbauer nodes in its cosine.  Weights sum to one.
    """
    if n < 2:
        raise ValueError("sphere rules need n >= 2")
    if n == 2:
        N = order + 1
        th = 2 * np.pi * np.arange(N) / N
        pts = np.column_stack([np.cos(th), np.sin(th)])
        return pts, np.full(N, 1.0 / N)
    a = (n - 3) / 2
    N = order // 2 + 1
    t, w = special.roots_jacobi(N, a, a)
    w = w / w.sum()
    sub_pts, sub_w = sphere_rule(n - 1, order)
    s = np.sqrt(1 - t ** 2)
    pts = np.concatenate([np.column_stack([np.full(len(sub_w), ti), si * sub_pts]) for ti, si in zip(t, s)])
    wts = np.concatenate([wi * sub_w for wi in w])
    return pts, wts


def circle_samples(count: int = 720) -> np.ndarray:
    th = 2 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(th), np.sin(th)])


@lru_cache(maxsize=8)
def icosphere(level: int = 4) -> np.ndarray:
    """Vertices of the subdivided icosahedron; ``10 * 4**level + 2`` points."""
    p = (1 + 5 ** 0.5) / 2
    verts = [(-1, p, 0), (1, p, 0), (-1, -p, 0), (1, -p, 0), (0, -1, p), (0, 1, p),
             (0, -1, -p), (0, 1, -p), (p, 0, -1), (p, 0, 1), (-p, 0, -1), (-p, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache: dict = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                v = verts[i] + verts[j]
                verts.append(v / np.linalg.norm(v))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return np.array(verts)


def boundary_samples(n: int) -> np.ndarray:
    """Declared sampling grid of the sphere for boundary-range comparisons.

    720 equispaced angles for n = 2, the 2562-point icosphere for n = 3, and
    the nodes of the degree-24 product rule otherwise.
    """
    if n == 2:
        return circle_samples(720)
    if n == 3:
        return icosphere(4)
    return sphere_rule(n, 24)[0]


def ball_samples(n: int, radial: int = 24, order: int = 24) -> np.ndarray:
    """Points filling the closed ball (spherical shells including r = 1 and the origin)."""
    pts, _ = sphere_rule(n, order)
    shells = [np.zeros((1, n))] + [r * pts for r in np.linspace(0, 1, radial + 1)[1:]]
    return np.concatenate(shells)
