"""Brute-force oracles shared by the tests; independent of the library code."""
import numpy as np


def brute_directed(P, Q, chunk=2000):
    """sup_{p in P} min_{q in Q} ||p - q|| over two point clouds, by brute force."""
    P = np.atleast_2d(P)
    Q = np.atleast_2d(Q)
    best = 0.0
    for i in range(0, len(P), chunk):
        D = np.linalg.norm(P[i:i + chunk, None, :] - Q[None, :, :], axis=2)
        best = max(best, float(D.min(axis=1).max()))
    return best


def brute_hausdorff(P, Q):
    return max(brute_directed(P, Q), brute_directed(Q, P))


def disc_cloud(center, radius, n_radial=200, n_angle=2000):
    """Polar grid over a closed disc, boundary included."""
    r = np.linspace(0.0, radius, n_radial)
    t = np.linspace(0.0, 2 * np.pi, n_angle, endpoint=False)
    R, Tt = np.meshgrid(r, t)
    pts = np.stack([R.ravel() * np.cos(Tt.ravel()), R.ravel() * np.sin(Tt.ravel())], axis=1)
    return pts + np.asarray(center, dtype=float)
