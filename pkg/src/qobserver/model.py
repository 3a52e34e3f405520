"""Physical model data and the derived drift, diffusion and output matrices.

A single particle with quadratures ``x = [q, p]`` has Hamiltonian
``x^T G x / 2 - x^T Sigma B u`` and coupling operator ``c = Ctilde x``.
Every system matrix used by the estimators is a function of
``(hbar, G, Ctilde, B)``; perturbations enter through ``(dG, dCtilde)``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_column, as_real_matrix, as_row, check_symmetric, symmetrize

__all__ = [
    "SIGMA",
    "SystemModel",
    "DerivedModel",
    "UncertaintyBounds",
    "UncertaintyRealization",
    "derive_matrices",
    "delta_drift",
    "delta_diffusion",
    "delta_output",
    "is_admissible",
    "sample_admissible",
    "q2_coeff_to_deltaG",
    "worst_case_realization",
    "perturbed_model",
]

SIGMA = np.array([[0.0, 1.0], [-1.0, 0.0]])
SIGMA.setflags(write=False)

ADMISSIBLE_SLACK = 1e-12


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Nominal plant: ``hbar``, Hamiltonian form ``G``, coupling ``Ctilde``, control channel ``B``."""

    G: np.ndarray
    Ctilde: np.ndarray
    B: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        G = check_symmetric(as_real_matrix(self.G, (2, 2), "G"), "G", atol=0.0)
        C = as_row(self.Ctilde, name="Ctilde", dtype=complex)
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "G", _frozen(G))
        object.__setattr__(self, "Ctilde", _frozen(C))
        object.__setattr__(self, "B", _frozen(as_column(self.B, name="B")))
        object.__setattr__(self, "hbar", float(self.hbar))

    def __repr__(self):
        return (
            f"SystemModel(G={self.G.tolist()}, Ctilde={self.Ctilde.ravel().tolist()}, "
            f"B={self.B.ravel().tolist()}, hbar={self.hbar})"
        )


@dataclass(frozen=True, eq=False)
class DerivedModel:
    A: np.ndarray
    F: np.ndarray
    D: np.ndarray
    m: np.ndarray
    Sigma: np.ndarray = SIGMA


@dataclass(frozen=True)
class UncertaintyBounds:
    """Admissible set ``dG^2 <= g I``, ``Re(dC)^T Re(dC) <= r1 I``, ``Im(dC)^T Im(dC) <= r2 I``."""

    g: float = 0.0
    r1: float = 0.0
    r2: float = 0.0

    def __post_init__(self):
        for name in ("g", "r1", "r2"):
            value = float(getattr(self, name))
            if not value >= 0.0:
                raise ValueError(f"{name} must be nonnegative")
            object.__setattr__(self, name, value)


@dataclass(frozen=True, eq=False)
class UncertaintyRealization:
    deltaG: np.ndarray
    deltaC: np.ndarray

    def __post_init__(self):
        dG = as_real_matrix(self.deltaG, (2, 2), "deltaG")
        check_symmetric(dG, "deltaG")
        object.__setattr__(self, "deltaG", _frozen(symmetrize(dG)))
        object.__setattr__(self, "deltaC", _frozen(as_row(self.deltaC, name="deltaC", dtype=complex)))

    @classmethod
    def zero(cls):
        return cls(np.zeros((2, 2)), np.zeros(2, dtype=complex))


def derive_matrices(model):
    """Drift ``A``, output row ``F``, diffusion ``D`` and ``m = Sigma^T Im(Ctilde)^T``.

    Examples
    --------
    >>> model = SystemModel(G=np.diag([-0.05, 2.0]), Ctilde=[1, 0], B=[0, 1])
    >>> derive_matrices(model).A
    array([[0.  , 2.  ],
           [0.05, 0.  ]])
    """
    C = model.Ctilde
    CC = C.conj().T @ C
    A = SIGMA @ (model.G + CC.imag)
    F = (C + C.conj()).real
    D = symmetrize(model.hbar * SIGMA @ CC.real @ SIGMA.T)
    m = SIGMA.T @ C.imag.T
    return DerivedModel(A=A, F=F, D=D, m=m)


def _cross_terms(model, u):
    C, dC = model.Ctilde, u.deltaC
    return C.conj().T @ dC + dC.conj().T @ C + dC.conj().T @ dC


def delta_drift(model, u):
    """Drift perturbation ``Sigma dG + Sigma Im[C^+ dC + dC^+ C + dC^+ dC]``."""
    return SIGMA @ u.deltaG + SIGMA @ _cross_terms(model, u).imag


def delta_diffusion(model, u):
    return symmetrize(model.hbar * SIGMA @ _cross_terms(model, u).real @ SIGMA.T)


def delta_output(u):
    return (u.deltaC + u.deltaC.conj()).real


def delta_m(u):
    return SIGMA.T @ u.deltaC.imag.T


def perturbed_model(model, u):
    """The true plant ``(G + dG, Ctilde + dCtilde)``."""
    return SystemModel(
        G=symmetrize(model.G + u.deltaG),
        Ctilde=(model.Ctilde + u.deltaC).ravel(),
        B=model.B,
        hbar=model.hbar,
    )


def is_admissible(u, bounds, slack=ADMISSIBLE_SLACK):
    re, im = u.deltaC.real, u.deltaC.imag
    checks = (
        (u.deltaG @ u.deltaG, bounds.g),
        (re.T @ re, bounds.r1),
        (im.T @ im, bounds.r2),
    )
    return all(np.linalg.eigvalsh(lhs).max() <= level + slack for lhs, level in checks)


def _random_row(rng, radius_sq):
    direction = rng.standard_normal(2)
    direction /= np.linalg.norm(direction)
    return direction * rng.uniform(0.0, np.sqrt(radius_sq))


def sample_admissible(bounds, seed):
    """Draw an admissible realization; deterministic for a given ``seed``.

    ``dG = O diag(s) O^T`` with a random rotation ``O`` and ``s_i`` uniform in
    ``[-sqrt(g), sqrt(g)]``. The real and imaginary parts of ``dCtilde`` get a
    uniform direction and a norm uniform in ``[0, sqrt(r)]``; for a row vector
    the Gram bound ``c^T c <= r I`` is the same as ``|c|^2 <= r``.
    """
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    O = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    s = rng.uniform(-np.sqrt(bounds.g), np.sqrt(bounds.g), size=2)
    dG = symmetrize(O @ np.diag(s) @ O.T)
    dC = _random_row(rng, bounds.r1) + 1j * _random_row(rng, bounds.r2)
    return UncertaintyRealization(dG, dC)


def q2_coeff_to_deltaG(c, convention="primary"):
    """Map a ``c q^2`` Hamiltonian perturbation onto the ``dG`` slot.

    ``primary`` returns ``diag(c, 0)``, so that ``c = -+sqrt(d)`` gives
    ``dG^2 = diag(d, 0)`` and ``d <= g`` is exactly the admissibility bound.
    ``alternate`` reads ``c q^2 = x^T dG x / 2`` literally and returns
    ``diag(2c, 0)``.
    """
    if convention == "primary":
        scale = 1.0
    elif convention == "alternate":
        scale = 2.0
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return np.diag([scale * float(c), 0.0])


def worst_case_realization(d, sign=-1, convention="primary"):
    """Constant realization for ``dH = sign * sqrt(d) q^2`` with ``dCtilde = 0``."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    dG = q2_coeff_to_deltaG(np.sign(sign) * np.sqrt(d), convention)
    return UncertaintyRealization(dG, np.zeros(2, dtype=complex))
