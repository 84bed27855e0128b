"""Truncated Fock-space linear algebra: operators, states, expectation values.

All constructors return immutable values (backing arrays are marked
read-only), so they are safe to share across parallel sweep workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HilbertSpace",
    "Operator",
    "DensityOperator",
    "annihilation",
    "creation",
    "number",
    "identity",
    "fock_projector",
    "vacuum_state",
    "expectation",
    "commutator_defect",
]

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8


class DimensionMismatchError(ValueError):
    """Operands live on different Hilbert spaces."""


@dataclass(frozen=True)
class HilbertSpace:
    """Single bosonic mode truncated to the lowest `dim` Fock states."""

    dim: int

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 2:
            raise ValueError(f"Fock truncation dim must be an integer >= 2, got {self.dim!r}")


def _freeze(mat: np.ndarray) -> np.ndarray:
    mat = np.ascontiguousarray(mat, dtype=complex)
    mat.flags.writeable = False
    return mat


@dataclass(frozen=True)
class Operator:
    """Dense complex matrix acting on a truncated Fock space."""

    space: HilbertSpace
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.shape != (self.space.dim, self.space.dim):
            raise DimensionMismatchError(
                f"operator shape {entries.shape} does not match space dim {self.space.dim}"
            )
        object.__setattr__(self, "entries", _freeze(entries))

    def dagger(self) -> "Operator":
        return Operator(self.space, self.entries.conj().T)

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.space != other.space:
            raise DimensionMismatchError("operator product across different spaces")
        return Operator(self.space, self.entries @ other.entries)

    def __add__(self, other: "Operator") -> "Operator":
        if self.space != other.space:
            raise DimensionMismatchError("operator sum across different spaces")
        return Operator(self.space, self.entries + other.entries)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.space, scalar * self.entries)

    __rmul__ = __mul__


@dataclass(frozen=True)
class DensityOperator:
    """Mixed state on a truncated Fock space.

    Validation (Hermiticity, unit trace, positivity up to numerical noise)
    runs on construction unless `validate=False` is passed by a caller that
    has already certified the matrix.
    """

    space: HilbertSpace
    entries: np.ndarray = field(repr=False)
    validate: bool = True

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.shape != (self.space.dim, self.space.dim):
            raise DimensionMismatchError(
                f"density matrix shape {entries.shape} does not match space dim {self.space.dim}"
            )
        object.__setattr__(self, "entries", _freeze(entries))
        if self.validate:
            self.check_valid()

    def check_valid(self) -> None:
        rho = self.entries
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > HERMITICITY_TOL:
            raise ValueError(f"density matrix not Hermitian: max deviation {herm:.3e}")
        tr = np.trace(rho)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} differs from 1 beyond tolerance")
        evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
        if evals.min() < -POSITIVITY_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {evals.min():.3e}")

    def populations(self) -> np.ndarray:
        return np.diag(self.entries).real.copy()

    def purity(self) -> float:
        return float(np.trace(self.entries @ self.entries).real)


def annihilation(space: HilbertSpace) -> Operator:
    """Fock-basis annihilation operator: entries[n-1, n] = sqrt(n)."""
    a = np.zeros((space.dim, space.dim), dtype=complex)
    n = np.arange(1, space.dim)
    a[n - 1, n] = np.sqrt(n)
    return Operator(space, a)


def creation(space: HilbertSpace) -> Operator:
    return annihilation(space).dagger()


def number(space: HilbertSpace) -> Operator:
    return Operator(space, np.diag(np.arange(space.dim, dtype=float)).astype(complex))


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.dim, dtype=complex))


def fock_projector(space: HilbertSpace, n: int) -> DensityOperator:
    """Projector |n><n| as a density operator."""
    if not 0 <= n < space.dim:
        raise ValueError(f"Fock index {n} outside truncation 0..{space.dim - 1}")
    rho = np.zeros((space.dim, space.dim), dtype=complex)
    rho[n, n] = 1.0
    return DensityOperator(space, rho)


def vacuum_state(space: HilbertSpace) -> DensityOperator:
    return fock_projector(space, 0)


def expectation(op: Operator, rho: DensityOperator) -> complex:
    """trace(op . rho)."""
    if op.space != rho.space:
        raise DimensionMismatchError("expectation of operator on mismatched state")
    return complex(np.trace(op.entries @ rho.entries))


def commutator_defect(space: HilbertSpace, retain: int | None = None) -> float:
    """Max-abs deviation of [a, a^dag] from 1 over the leading `retain` block.

    Truncation corrupts only the last diagonal entry, so retain = dim - 1
    gives exactly zero while retain = dim reports the corner defect dim - 1.
    """
    if retain is None:
        retain = space.dim
    if not 1 <= retain <= space.dim:
        raise ValueError(f"retain must be in 1..{space.dim}")
    a = annihilation(space).entries
    comm = a @ a.conj().T - a.conj().T @ a
    block = comm[:retain, :retain] - np.eye(retain)
    return float(np.max(np.abs(block)))
