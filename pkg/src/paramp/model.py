"""Rotating-frame Hamiltonians and their derivation from circuit parameters.

Three flux-pumped topologies are covered:

* ``DC_SQUID`` -- single loop, two junctions; the Kerr term cannot be
  tuned away because the bias point that would cancel it also kills the
  resonance.
* ``STS_INDUCTOR`` -- two symmetrically threaded loops with a central
  linear inductor; Kerr and the quartic drive term both vanish at static
  flux F = -pi/2 while the two-photon pump survives.
* ``STS_JUNCTION`` -- two loops with a central junction; the central
  branch contributes a flux-independent Kerr of -E_C/2.

All energies are expressed as angular frequencies (rad/s). Flux arguments
follow Phi_e(t)/phi0 = F + delta_f * cos(omega_p t); the drive harmonics
enter through Bessel-function Fourier coefficients of cos(Phi_e/phi0).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from .constants import E_CHARGE, HBAR, PHI0_REDUCED
from .fock import HilbertSpace, Operator, annihilation

__all__ = [
    "Topology",
    "HamiltonianCoefficients",
    "CircuitSpec",
    "JosephsonFourierEnergies",
    "CircuitEnergies",
    "CircuitDerivation",
    "build_hamiltonian",
    "probe_hamiltonian",
    "josephson_fourier_energies",
    "si_to_internal",
    "squid_coefficients",
    "sts_inductor_coefficients",
    "sts_junction_coefficients",
    "kerr_main_text_approximation",
]


class Topology(enum.Enum):
    DC_SQUID = "DC_SQUID"
    STS_INDUCTOR = "STS_INDUCTOR"
    STS_JUNCTION = "STS_JUNCTION"


class InvalidBiasError(ValueError):
    """Static flux bias leaves the circuit without a usable resonance."""


@dataclass(frozen=True)
class HamiltonianCoefficients:
    """Coefficients of the rotating-frame Hamiltonian.

    H = delta a'a + (lam/2) a'^2 + (lam*/2) a^2 + kerr a'^2 a^2
        + cubic (a'^3 a + a' a^3) + quartic (a'^4 + a^4)

    delta, kerr, cubic, quartic are real; lam may be complex (drive phase).
    Units are whatever rate unit the caller works in (rad/s or kappa=1).
    """

    delta: float = 0.0
    lam: complex = 0.0
    kerr: float = 0.0
    cubic: float = 0.0
    quartic: float = 0.0

    def __post_init__(self):
        vals = (self.delta, self.lam, self.kerr, self.cubic, self.quartic)
        if not all(np.isfinite(v) for v in np.atleast_1d(np.asarray(vals, dtype=complex))):
            raise ValueError("Hamiltonian coefficients must be finite")
        for name in ("delta", "kerr", "cubic", "quartic"):
            v = getattr(self, name)
            if isinstance(v, complex) and v.imag != 0.0:
                raise ValueError(f"{name} must be real, got {v!r}")


@dataclass(frozen=True)
class CircuitSpec:
    """Physical circuit parameters in SI units.

    josephson_inductance defines E_J = phi0^2 / (L_J hbar) per junction,
    total_capacitance defines E_C = e^2 / (2 C_sigma hbar), and for the
    inductor-branch STS linear_inductance defines E_L = phi0^2 / (L hbar).
    static_flux F is in radians of reduced flux, modulation_depth delta_f
    is dimensionless, pump_frequency omega_p is in rad/s.
    """

    topology: Topology
    josephson_inductance: float
    total_capacitance: float
    static_flux: float
    modulation_depth: float
    pump_frequency: float
    linear_inductance: float | None = None

    def __post_init__(self):
        if self.josephson_inductance <= 0:
            raise ValueError("josephson_inductance must be positive")
        if self.total_capacitance <= 0:
            raise ValueError("total_capacitance must be positive")
        if self.linear_inductance is not None and self.linear_inductance <= 0:
            raise ValueError("linear_inductance must be positive")
        if not 0.0 <= self.modulation_depth < 1.0:
            raise ValueError("modulation_depth must satisfy 0 <= delta_f < 1")
        if self.topology is Topology.STS_INDUCTOR and self.linear_inductance is None:
            raise ValueError("STS_INDUCTOR requires linear_inductance")


@dataclass(frozen=True)
class JosephsonFourierEnergies:
    """Fourier components (dc, omega_p, 2 omega_p) of the driven Josephson energy."""

    e0: float
    e1: float
    e2: float


@dataclass(frozen=True)
class CircuitEnergies:
    """Circuit energies in rad/s, with optional kappa-normalized copies."""

    e_j: float
    e_c: float
    e_l: float | None
    omega_p: float
    kappa_reference: float | None = None

    def in_kappa_units(self) -> "CircuitEnergies":
        k = self.kappa_reference
        if k is None:
            raise ValueError("no kappa reference attached")
        return CircuitEnergies(
            e_j=self.e_j / k,
            e_c=self.e_c / k,
            e_l=None if self.e_l is None else self.e_l / k,
            omega_p=self.omega_p / k,
            kappa_reference=1.0,
        )


@dataclass(frozen=True)
class CircuitDerivation:
    """Coefficient set plus the intermediate quantities behind it.

    delta_bare = omega_a - omega_p/2 is kept separate from the Kerr shift
    2*kerr; coeffs.delta carries their sum.
    """

    coeffs: HamiltonianCoefficients
    omega_a: float
    phi_zps: float
    delta_bare: float
    kerr_shift: float
    fourier: JosephsonFourierEnergies
    energies: CircuitEnergies


def build_hamiltonian(coeffs: HamiltonianCoefficients, space: HilbertSpace) -> Operator:
    """Assemble the rotating-frame Hamiltonian on a truncated Fock space."""
    a = annihilation(space).entries
    ad = a.conj().T
    h = coeffs.delta * (ad @ a)
    lam = complex(coeffs.lam)
    if lam != 0.0:
        h = h + 0.5 * lam * (ad @ ad) + 0.5 * np.conj(lam) * (a @ a)
    if coeffs.kerr != 0.0:
        h = h + coeffs.kerr * (ad @ ad @ a @ a)
    if coeffs.cubic != 0.0:
        h = h + coeffs.cubic * (ad @ ad @ ad @ a + ad @ a @ a @ a)
    if coeffs.quartic != 0.0:
        h = h + coeffs.quartic * (ad @ ad @ ad @ ad + a @ a @ a @ a)
    return Operator(space, h)


def probe_hamiltonian(coeffs: HamiltonianCoefficients, space: HilbertSpace,
                      epsilon: complex) -> Operator:
    """Hamiltonian plus a weak displacement drive eps a' + eps* a."""
    a = annihilation(space).entries
    h = build_hamiltonian(coeffs, space).entries
    h = h + epsilon * a.conj().T + np.conj(epsilon) * a
    return Operator(space, h)


def josephson_fourier_energies(e_j: float, static_flux: float, delta_f: float,
                               small_df: bool = False) -> JosephsonFourierEnergies:
    """Fourier coefficients of E_J cos(F + delta_f cos(omega_p t)).

    Exact Bessel forms by default; `small_df=True` selects the leading-order
    expansions E_J cos F, -E_J delta_f sin F, -(E_J delta_f^2 cos F)/4.
    """
    if delta_f < 0:
        raise ValueError("delta_f must be nonnegative")
    c, s = np.cos(static_flux), np.sin(static_flux)
    if small_df:
        return JosephsonFourierEnergies(
            e0=e_j * c,
            e1=-e_j * delta_f * s,
            e2=-0.25 * e_j * delta_f**2 * c,
        )
    return JosephsonFourierEnergies(
        e0=e_j * jv(0, delta_f) * c,
        e1=-2.0 * e_j * jv(1, delta_f) * s,
        e2=-2.0 * e_j * jv(2, delta_f) * c,
    )


def si_to_internal(circuit: CircuitSpec, kappa_reference: float | None = None) -> CircuitEnergies:
    """Convert SI circuit parameters to angular-frequency energies.

    If a kappa reference (rad/s) is supplied it is attached so callers can
    normalize; it must be positive.
    """
    if kappa_reference is not None and kappa_reference <= 0:
        raise ValueError("kappa reference must be positive")
    e_j = PHI0_REDUCED**2 / circuit.josephson_inductance / HBAR
    e_c = E_CHARGE**2 / (2.0 * circuit.total_capacitance) / HBAR
    e_l = None
    if circuit.linear_inductance is not None:
        e_l = PHI0_REDUCED**2 / circuit.linear_inductance / HBAR
    return CircuitEnergies(e_j=e_j, e_c=e_c, e_l=e_l, omega_p=circuit.pump_frequency,
                           kappa_reference=kappa_reference)


def _zps_squared(e_c: float, omega_a: float) -> float:
    # Phi_zps = 2 phi0 sqrt(E_C / omega_a)  =>  (Phi_zps/phi0)^2 = 4 E_C / omega_a
    return 4.0 * e_c / omega_a


def squid_coefficients(circuit: CircuitSpec, small_df: bool = False) -> CircuitDerivation:
    """Single-loop DC SQUID: lam = E1 z/2, K = -E0 z^2/4, cubic = -E1 z^2/12,
    quartic = -E2 z^2/48 with z = (Phi_zps/phi0)^2.

    Requires cos F > 0; at cos F <= 0 the Josephson energy no longer
    provides a confining potential and the device degenerates to a
    capacitor.
    """
    if circuit.topology is not Topology.DC_SQUID:
        raise ValueError("squid_coefficients expects a DC_SQUID circuit")
    en = si_to_internal(circuit)
    cos_f = np.cos(circuit.static_flux)
    if cos_f <= 0:
        raise InvalidBiasError(
            f"cos F = {cos_f:.3g} <= 0: SQUID bias point has no resonance"
        )
    omega_a = np.sqrt(16.0 * en.e_c * en.e_j * cos_f)
    z = _zps_squared(en.e_c, omega_a)
    four = josephson_fourier_energies(en.e_j, circuit.static_flux, circuit.modulation_depth,
                                      small_df=small_df)
    lam = 0.5 * four.e1 * z
    kerr = -0.25 * four.e0 * z**2
    cubic = -four.e1 * z**2 / 12.0
    quartic = -four.e2 * z**2 / 48.0
    delta_bare = omega_a - 0.5 * circuit.pump_frequency
    coeffs = HamiltonianCoefficients(delta=delta_bare + 2.0 * kerr, lam=lam, kerr=kerr,
                                     cubic=cubic, quartic=quartic)
    return CircuitDerivation(coeffs=coeffs, omega_a=float(omega_a), phi_zps=float(np.sqrt(z)),
                             delta_bare=float(delta_bare), kerr_shift=float(2.0 * kerr),
                             fourier=four, energies=en)


def sts_inductor_coefficients(circuit: CircuitSpec, small_df: bool = False) -> CircuitDerivation:
    """Inductor-branch STS: lam = E1 z, K = -E0 z^2/2, cubic = -E1 z^2/6,
    quartic = -E2 z^2/24, omega_a = sqrt(8 E_C (E_L + 2 E_J cos F)).

    E0 and E2 are both proportional to cos F, so kerr and quartic vanish
    together at F = -pi/2 while lam (prop. to sin F) survives.
    """
    if circuit.topology is not Topology.STS_INDUCTOR:
        raise ValueError("sts_inductor_coefficients expects an STS_INDUCTOR circuit")
    en = si_to_internal(circuit)
    cos_f = np.cos(circuit.static_flux)
    stiffness = en.e_l + 2.0 * en.e_j * cos_f
    if stiffness <= 0:
        raise InvalidBiasError(
            f"E_L + 2 E_J cos F = {stiffness:.3g} <= 0: resonance frequency is imaginary"
        )
    omega_a = np.sqrt(8.0 * en.e_c * stiffness)
    z = _zps_squared(en.e_c, omega_a)
    four = josephson_fourier_energies(en.e_j, circuit.static_flux, circuit.modulation_depth,
                                      small_df=small_df)
    lam = four.e1 * z
    kerr = -0.5 * four.e0 * z**2
    cubic = -four.e1 * z**2 / 6.0
    quartic = -four.e2 * z**2 / 24.0
    delta_bare = omega_a - 0.5 * circuit.pump_frequency
    coeffs = HamiltonianCoefficients(delta=delta_bare + 2.0 * kerr, lam=lam, kerr=kerr,
                                     cubic=cubic, quartic=quartic)
    return CircuitDerivation(coeffs=coeffs, omega_a=float(omega_a), phi_zps=float(np.sqrt(z)),
                             delta_bare=float(delta_bare), kerr_shift=float(2.0 * kerr),
                             fourier=four, energies=en)


def sts_junction_coefficients(circuit: CircuitSpec, small_df: bool = False) -> CircuitDerivation:
    """Junction-branch STS: the central junction adds a static E_J cos term,
    so the driven Josephson energy is E_J (1 + 2 cos(Phi_e/phi0)).

    With the quadratic stiffness and the quartic term sharing that factor,
    the Kerr coefficient collapses to -E_C/2 for every flux bias; the
    design exists here as the contrast case that cannot be made Kerr-free.
    """
    if circuit.topology is not Topology.STS_JUNCTION:
        raise ValueError("sts_junction_coefficients expects an STS_JUNCTION circuit")
    en = si_to_internal(circuit)
    base = josephson_fourier_energies(en.e_j, circuit.static_flux, circuit.modulation_depth,
                                      small_df=small_df)
    # central junction: +E_J on the dc component, doubled loop contributions
    four = JosephsonFourierEnergies(e0=en.e_j + 2.0 * base.e0, e1=2.0 * base.e1,
                                    e2=2.0 * base.e2)
    if four.e0 <= 0:
        raise InvalidBiasError(
            f"total Josephson stiffness {four.e0:.3g} <= 0: no resonance"
        )
    omega_a = np.sqrt(8.0 * en.e_c * four.e0)
    z = _zps_squared(en.e_c, omega_a)
    lam = 0.5 * four.e1 * z
    kerr = -0.25 * four.e0 * z**2  # = -E_C/2 exactly, since z = 2 E_C / e0 here
    cubic = -four.e1 * z**2 / 12.0
    quartic = -four.e2 * z**2 / 48.0
    delta_bare = omega_a - 0.5 * circuit.pump_frequency
    coeffs = HamiltonianCoefficients(delta=delta_bare + 2.0 * kerr, lam=lam, kerr=kerr,
                                     cubic=cubic, quartic=quartic)
    return CircuitDerivation(coeffs=coeffs, omega_a=float(omega_a), phi_zps=float(np.sqrt(z)),
                             delta_bare=float(delta_bare), kerr_shift=float(2.0 * kerr),
                             fourier=four, energies=en)


def kerr_main_text_approximation(circuit: CircuitSpec) -> float:
    """Approximate STS Kerr -E_C cos(F) / 2.

    Agrees with the full sts_inductor_coefficients result only when
    E_L + 2 E_J cos F is close to 2 E_J; kept as a documented cross-check,
    not used in any derivation.
    """
    en = si_to_internal(circuit)
    return -0.5 * en.e_c * float(np.cos(circuit.static_flux))


def derive_coefficients(circuit: CircuitSpec, small_df: bool = False) -> CircuitDerivation:
    """Dispatch to the topology-specific coefficient builder."""
    builder = {
        Topology.DC_SQUID: squid_coefficients,
        Topology.STS_INDUCTOR: sts_inductor_coefficients,
        Topology.STS_JUNCTION: sts_junction_coefficients,
    }[circuit.topology]
    return builder(circuit, small_df=small_df)
