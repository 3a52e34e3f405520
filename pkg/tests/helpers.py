import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


def matrices(n, m=None, elements=finite):
    return arrays(np.float64, (n, n if m is None else m), elements=elements)


@st.composite
def hurwitz_matrices(draw, n=2, margin=0.2):
    A = draw(matrices(n))
    return A - (np.linalg.eigvals(A).real.max() + margin) * np.eye(n)


@st.composite
def spd_matrices(draw, n=2, low=0.1):
    X = draw(matrices(n))
    return X @ X.T + low * np.eye(n)


def random_spd(rng, n, low=0.1):
    X = rng.standard_normal((n, n))
    return X @ X.T + low * np.eye(n)
