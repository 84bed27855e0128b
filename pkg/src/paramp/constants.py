"""Physical constants (CODATA 2018) used for circuit-to-Hamiltonian conversion.

The 2019 SI redefinition fixed e and h exactly, so these values are exact
and the derived energies are bit-reproducible across library versions.
"""

import math

#: Elementary charge in coulomb (exact).
E_CHARGE = 1.602176634e-19

#: Planck constant in joule second (exact).
H_PLANCK = 6.62607015e-34

#: Reduced Planck constant in joule second.
HBAR = H_PLANCK / (2.0 * math.pi)

#: Reduced flux quantum phi0 = hbar / 2e in weber.
PHI0_REDUCED = HBAR / (2.0 * E_CHARGE)

#: Identifier recorded in dataset metadata.
CONSTANTS_VERSION = "CODATA2018"
