"""Two-qubit states, spin observables and the CHSH operator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tensor
from .errors import DimensionError, HermiticityError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
I2 = np.eye(2, dtype=complex)

TWO_PI = 2.0 * math.pi

BELL_KINDS = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


@dataclass(frozen=True)
class Direction:
    """Measurement direction as polar/azimuth angles in radians.

    Canonicalized on construction to theta in [0, pi] and phi in
    [0, 2*pi), preserving the unit vector.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        th, ph = float(self.theta), float(self.phi)
        if not (math.isfinite(th) and math.isfinite(ph)):
            raise ValueError("direction angles must be finite")
        th = th % TWO_PI
        if th > math.pi:
            th = TWO_PI - th
            ph = ph + math.pi
        ph = ph % TWO_PI
        # the modulo of a tiny negative angle can round to the period itself
        if ph >= TWO_PI:
            ph = 0.0
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "phi", ph)

    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi),
                         st * math.sin(self.phi),
                         math.cos(self.theta)])


@dataclass(frozen=True)
class ChshSettings:
    """The four measurement directions of a CHSH experiment."""

    a: Direction
    a_prime: Direction
    b: Direction
    b_prime: Direction

    @classmethod
    def planar(cls, a: float, a_prime: float, b: float, b_prime: float) -> "ChshSettings":
        """Settings in the x-z plane (all azimuths zero)."""
        return cls(Direction(a), Direction(a_prime), Direction(b), Direction(b_prime))


def canonical_settings() -> ChshSettings:
    """The textbook maximizing settings a=0, a'=pi/2, b=pi/4, b'=-pi/4."""
    return ChshSettings.planar(0.0, math.pi / 2, math.pi / 4, -math.pi / 4)


@dataclass(frozen=True)
class PureState:
    """Normalized two-qubit state vector in the computational basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape[0] != 4:
            raise DimensionError("a two-qubit state needs 4 amplitudes")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm} is not 1 within 1e-12")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """4x4 density operator: Hermitian, unit trace, positive semidefinite."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise DimensionError("density matrix must be 4x4")
        if not tensor.is_hermitian(m, tol=1e-10):
            raise HermiticityError("density matrix must be Hermitian")
        tr = complex(np.trace(m)).real
        if abs(tr - 1.0) > 1e-12:
            raise ValueError(f"density matrix trace {tr} is not 1 within 1e-12")
        if float(np.linalg.eigvalsh(m).min()) < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


def bell_state(kind: str = "phi_plus") -> PureState:
    """One of the four maximally entangled Bell states."""
    r = 1.0 / math.sqrt(2.0)
    table = {
        "phi_plus": (r, 0, 0, r),
        "phi_minus": (r, 0, 0, -r),
        "psi_plus": (0, r, r, 0),
        "psi_minus": (0, r, -r, 0),
    }
    if kind not in table:
        raise ValueError(f"unknown Bell state {kind!r}; expected one of {BELL_KINDS}")
    return PureState(np.array(table[kind], dtype=complex))


def spin_observable(n: Direction) -> np.ndarray:
    """Spin component along a direction: n . sigma, with eigenvalues +-1."""
    v = n.unit_vector()
    return v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z


def bell_operator(s: ChshSettings) -> np.ndarray:
    """B = a (x) (b + b') + a' (x) (b - b') for unit-spin observables."""
    a = spin_observable(s.a)
    ap = spin_observable(s.a_prime)
    b = spin_observable(s.b)
    bp = spin_observable(s.b_prime)
    return tensor.kron(a, b + bp) + tensor.kron(ap, b - bp)


def chsh_value(state: PureState, s: ChshSettings) -> float:
    """Exact CHSH expectation <B> in the given state."""
    return tensor.expect(state.amplitudes, bell_operator(s))
