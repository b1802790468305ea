"""Physical constants and unit conversion factors used across the package."""

import math

PLANCK_CONSTANT = 6.62607015e-34
"""Planck constant in J s (exact SI value)."""

HE4_MASS = 6.6465e-27
"""Mass of a single helium-4 atom in kg."""

NM = 1e-9
"""Meters per nanometer."""

ANGSTROM = 1e-10
"""Meters per angstrom."""

MRAD = 1e-3
"""Radians per milliradian."""

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
"""Gaussian standard deviation per unit of full width at half maximum."""
