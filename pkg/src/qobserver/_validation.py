"""Small input validation helpers shared by the numerical modules."""

import numpy as np

SYMMETRY_ATOL = 1e-12


def as_real_matrix(a, shape=None, name="array"):
    a = np.array(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if shape is not None and a.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_square(a, name="array"):
    a = as_real_matrix(a, name=name)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def as_column(v, n=2, name="vector"):
    v = np.array(v, dtype=float).reshape(-1)
    if v.shape != (n,):
        raise ValueError(f"{name} must have {n} entries, got {v.size}")
    return v.reshape(n, 1)


def as_row(v, n=2, name="vector", dtype=float):
    v = np.array(v, dtype=dtype).reshape(-1)
    if v.shape != (n,):
        raise ValueError(f"{name} must have {n} entries, got {v.size}")
    return v.reshape(1, n)


def check_symmetric(a, name="array", atol=SYMMETRY_ATOL):
    """Raise unless ``a`` equals its transpose to ``atol``."""
    if np.max(np.abs(a - a.T), initial=0.0) > atol:
        raise ValueError(f"{name} must be symmetric")
    return a


def symmetrize(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def min_eig(a):
    """Smallest eigenvalue of the Hermitian part of ``a``."""
    a = np.asarray(a)
    return float(np.linalg.eigvalsh(0.5 * (a + a.conj().T)).min())


def max_eig(a):
    a = np.asarray(a)
    return float(np.linalg.eigvalsh(0.5 * (a + a.conj().T)).max())
