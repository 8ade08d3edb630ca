"""Two-qubit Hamiltonians for a pair of distant atoms with an always-on
effective coupling and switchable local driving.

The drift/control split depends on the chosen paradigm:

* ``LocalControl``: drift ``h_eff = 2J Z(x)Z``, control ``h_local``.
* ``InteractionControl``: drift ``h_local`` (symmetric, k=1), control ``h_eff``.

Three coordinate systems are supported, with fixed orderings:

* ZProduct: {|00>, |01>, |10>, |11>}
* XProduct: {|++>, |+->, |-+>, |-->}, |+-> = (|0>+|1>)(|0>-|1>)/2
* Bell:     {Psi+, Phi+, Phi-, Psi-} built on the X-product states,
  e.g. Phi+ = (|++> + |-->)/sqrt(2)

In the Bell ordering the drift of the local paradigm is diag(2J, 2J, -2J, -2J)
and the control couples only Phi+ <-> Phi-, which is what makes the
span{|++>, |-->} subspace dynamics two-dimensional.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .linalg import HERMITICITY_TOL, dagger, hs_norm, kron, pauli

_SQ2 = np.sqrt(2.0)


@dataclass(frozen=True)
class ModelParams:
    """Physical constants: coupling J (inverse time, hbar=1), local-field ratio
    eta (field strength B = eta*J), and local-coupling asymmetry k."""

    J: float
    eta: float
    k: float = 1.0

    def __post_init__(self) -> None:
        if self.J <= 0:
            raise ValueError(f"J must be positive, got {self.J}")
        if self.eta < 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")
        if self.eta >= 1:
            warnings.warn(
                f"eta={self.eta} is not small compared to 1; the weak-local-field "
                "regime the control analysis assumes no longer holds",
                stacklevel=2,
            )


class Paradigm(Enum):
    LOCAL_CONTROL = "LocalControl"
    INTERACTION_CONTROL = "InteractionControl"


class BellName(Enum):
    PSI_PLUS = "PsiPlus"
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"
    PSI_MINUS = "PsiMinus"


@dataclass(frozen=True, eq=False)
class Basis:
    """A coordinate system; ``transform`` maps ZProduct coordinates into it.

    Vectors: v_here = transform @ v_z. Operators: H_here = transform @ H_z @ transform†.
    """

    tag: str
    transform: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        u = self.transform
        err = hs_norm(dagger(u) @ u - np.eye(u.shape[0]))
        if err > 1e-12:
            raise ValueError(f"basis transform is not unitary (deviation {err:.3e})")

    def from_z(self, op_z: np.ndarray) -> np.ndarray:
        """Conjugate an operator given in ZProduct coordinates into this basis."""
        return self.transform @ op_z @ dagger(self.transform)

    def vector_from_z(self, v_z: np.ndarray) -> np.ndarray:
        return self.transform @ np.asarray(v_z, dtype=complex)


def _hadamard2() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / _SQ2


Z_PRODUCT = Basis("ZProduct", np.eye(4, dtype=complex))
X_PRODUCT = Basis("XProduct", kron(_hadamard2(), _hadamard2()))

# Bell vectors in ZProduct coordinates, ordered {Psi+, Phi+, Phi-, Psi-}.
_BELL_COLUMNS_Z = np.column_stack(
    [
        np.array([1, 0, 0, -1], dtype=complex) / _SQ2,   # (|+-> + |-+>)/sqrt2
        np.array([1, 0, 0, 1], dtype=complex) / _SQ2,    # (|++> + |-->)/sqrt2
        np.array([0, 1, 1, 0], dtype=complex) / _SQ2,    # (|++> - |-->)/sqrt2
        np.array([0, -1, 1, 0], dtype=complex) / _SQ2,   # (|+-> - |-+>)/sqrt2
    ]
)
BELL = Basis("Bell", dagger(_BELL_COLUMNS_Z))

BASES = {b.tag: b for b in (Z_PRODUCT, X_PRODUCT, BELL)}

_BELL_INDEX = {
    BellName.PSI_PLUS: 0,
    BellName.PHI_PLUS: 1,
    BellName.PHI_MINUS: 2,
    BellName.PSI_MINUS: 3,
}


@dataclass(frozen=True, eq=False)
class HamiltonianPair:
    """Drift h0 and control h1 expressed in ``basis``; optional construction
    metadata (params, paradigm) travels with the pair for downstream checks."""

    h0: np.ndarray = field(repr=False)
    h1: np.ndarray = field(repr=False)
    basis: Basis
    params: ModelParams | None = None
    paradigm: Paradigm | None = None

    def __post_init__(self) -> None:
        for name, h in (("h0", self.h0), ("h1", self.h1)):
            err = hs_norm(h - dagger(h))
            if err > HERMITICITY_TOL:
                raise ValueError(f"{name} is not Hermitian (deviation {err:.3e})")


def h_local(p: ModelParams) -> np.ndarray:
    """eta*J*(X(x)I + k*I(x)X) in ZProduct coordinates."""
    x, ident = pauli("X"), pauli("I")
    return p.eta * p.J * (kron(x, ident) + p.k * kron(ident, x))


def h_eff(p: ModelParams) -> np.ndarray:
    """2J * Z(x)Z in ZProduct coordinates."""
    z = pauli("Z")
    return 2.0 * p.J * kron(z, z)


def hamiltonians(p: ModelParams, paradigm: Paradigm, basis: Basis) -> HamiltonianPair:
    """Build the (drift, control) pair for a paradigm in the requested basis.

    The interaction paradigm drives with the coupling and drifts under the
    symmetric local field, so its drift is built with k=1 regardless of p.k.
    """
    if paradigm is Paradigm.LOCAL_CONTROL:
        h0_z, h1_z = h_eff(p), h_local(p)
    elif paradigm is Paradigm.INTERACTION_CONTROL:
        symmetric = ModelParams(p.J, p.eta, 1.0)
        h0_z, h1_z = h_local(symmetric), h_eff(p)
    else:
        raise ValueError(f"unknown paradigm {paradigm!r}")
    return HamiltonianPair(basis.from_z(h0_z), basis.from_z(h1_z), basis, p, paradigm)


def bell_state(which: BellName, basis: Basis) -> np.ndarray:
    """The named Bell state as a unit vector in the requested basis."""
    v_z = _BELL_COLUMNS_Z[:, _BELL_INDEX[which]]
    return basis.vector_from_z(v_z)


# Isometries embedding the reduced 2D coordinates back into full XProduct
# coordinates: columns are the frame vectors {Phi+, Phi-} or {|++>, |-->}.
S_FRAME_BELL = np.array([[1, 1], [0, 0], [0, 0], [1, -1]], dtype=complex) / _SQ2
S_FRAME_X = np.array([[1, 0], [0, 0], [0, 0], [0, 1]], dtype=complex)

_S_IDX = {
    "XProduct": (0, 3),
    "Bell": (1, 2),
}


def subspace_reduce(h: HamiltonianPair, span: str = "PlusPlus_MinusMinus") -> HamiltonianPair:
    """Restrict a Hamiltonian pair to S = span{|++>, |-->}.

    The reduction is returned in whichever 2D frame diagonalizes the reduced
    drift: {Phi+, Phi-} for the local paradigm (basis tag "Bell",
    embed with S_FRAME_BELL) or {|++>, |-->} for the interaction paradigm
    (basis tag "XProduct", embed with S_FRAME_X).

    Asymmetric local coupling (k != 1) is rejected: it leaves S invariant but
    changes the complement dynamics, and the reduction is only supported for
    the symmetric model.
    """
    if span != "PlusPlus_MinusMinus":
        raise ValueError(f"unknown subspace {span!r}")
    if h.params is not None and h.params.k != 1.0:
        raise ValueError(
            f"subspace reduction requires symmetric local coupling (k=1), got k={h.params.k}"
        )
    h0_x = X_PRODUCT.from_z(dagger(h.basis.transform) @ h.h0 @ h.basis.transform)
    h1_x = X_PRODUCT.from_z(dagger(h.basis.transform) @ h.h1 @ h.basis.transform)

    s_idx, perp_idx = (0, 3), (1, 2)
    for name, op in (("h0", h0_x), ("h1", h1_x)):
        off = op[np.ix_(s_idx, perp_idx)]
        off_norm = max(hs_norm(off), hs_norm(op[np.ix_(perp_idx, s_idx)]))
        if off_norm > 1e-12:
            raise ValueError(
                f"{name} does not leave span{{|++>,|-->}} invariant "
                f"(off-block norm {off_norm:.3e})"
            )
    a0 = h0_x[np.ix_(s_idx, s_idx)]
    a1 = h1_x[np.ix_(s_idx, s_idx)]

    def _offdiag(m: np.ndarray) -> float:
        return abs(m[0, 1]) + abs(m[1, 0])

    if _offdiag(a0) <= 1e-12:
        frame = Basis("XProduct", np.eye(2, dtype=complex))
    else:
        w = _hadamard2()
        a0, a1 = w @ a0 @ w, w @ a1 @ w
        if _offdiag(a0) > 1e-12:
            raise ValueError("reduced drift is not diagonal in either pair frame")
        frame = Basis("Bell", _hadamard2())
    return HamiltonianPair(a0, a1, frame, h.params, h.paradigm)


def subspace_populations(rho: np.ndarray, basis: Basis) -> tuple[float, float]:
    """Population (p_S, p_Sperp) of span{|++>, |-->} and its complement."""
    rho = np.asarray(rho, dtype=complex)
    if basis.tag in _S_IDX:
        i, j = _S_IDX[basis.tag]
        p_s = float(np.real(rho[i, i] + rho[j, j]))
    elif basis.tag == "ZProduct":
        proj_x = np.diag([1.0, 0.0, 0.0, 1.0]).astype(complex)
        proj_z = dagger(X_PRODUCT.transform) @ proj_x @ X_PRODUCT.transform
        p_s = float(np.real(np.trace(proj_z @ rho)))
    else:
        raise ValueError(f"unknown basis tag {basis.tag!r}")
    return p_s, 1.0 - p_s
