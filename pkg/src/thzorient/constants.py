"""Physical constants (CODATA 2018 exact/recommended values, SI units).

These are fixed numbers, never recomputed at runtime, so that golden
values in the test-suite stay bit-stable.
"""

import math

#: speed of light in vacuum [m/s] (exact)
SPEED_OF_LIGHT = 299792458.0
#: speed of light in cm/s, used with wavenumbers in cm^-1
SPEED_OF_LIGHT_CM = SPEED_OF_LIGHT * 100.0
#: Planck constant [J s] (exact)
PLANCK = 6.62607015e-34
#: reduced Planck constant [J s]
HBAR = PLANCK / (2.0 * math.pi)
#: Boltzmann constant [J/K] (exact)
BOLTZMANN = 1.380649e-23
#: one debye in C m (1e-21 / c)
DEBYE = 1e-21 / SPEED_OF_LIGHT

# unit conversion factors into SI
MV_PER_CM = 1e8  # V/m
PICOSECOND = 1e-12  # s
TERAHERTZ = 1e12  # Hz
