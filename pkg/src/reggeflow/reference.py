"""Frozen reference values for the standard block triangulations.

Benchmark numbers used by the ``reproduce`` command and the test suite:
flat edge lengths, linearisation stencil rows, stability spectra, fitted
growth rates, and the change statistics of stabilised runs.  Exact entries
(integers, simple fractions, square roots) follow from the translation
symmetry of the flat lattices; decimal entries are quoted to the printed
precision of the reference computation and carry matching tolerances.

Stencil dictionaries map ``(kind, offset)`` to a coefficient, where
``kind`` names the face-diagonal class of the perturbed edge and
``offset`` is the block offset relative to the responding edge's block,
in the same convention as :func:`reggeflow.stability.stencil_row`.
"""

from __future__ import annotations

import math

__all__ = [
    "FLAT_LENGTHS",
    "RAW_CUBIC_STENCIL",
    "FLATTENED_CUBIC_STENCIL",
    "RAW_SPECTRA",
    "SKEW_REDUCED_MATRIX",
    "SKEW_DOMINANT_EIGENVALUE",
    "SKEW_DOMINANT_EIGENVECTOR",
    "FLATTENED_MAX_EIGENVALUE_BOUND",
    "GROWTH_RATES",
    "SUPPRESSION_STATISTICS",
]

# Edge lengths of the unit-volume flat blocks, in role order
# (axis x, axis y, axis z, diagonal yz, diagonal zx, diagonal xy, body).
FLAT_LENGTHS = {
    "cubic": (
        1.0, 1.0, 1.0,
        math.sqrt(2.0), math.sqrt(2.0), math.sqrt(2.0),
        math.sqrt(3.0),
    ),
    "skew": (
        math.sqrt(10.0) / 3.0, 1.0, math.sqrt(94.0) / 9.0,
        math.sqrt(139.0) / 9.0, math.sqrt(142.0) / 9.0, math.sqrt(13.0) / 3.0,
        math.sqrt(133.0) / 9.0,
    ),
}

# Linearised flow of one xy face diagonal of the raw cubic lattice at c = 1:
# the coefficients of every face-diagonal deviation in d(delta_xy)/dt.
# The row sum is 12, the dominant growth rate.
RAW_CUBIC_STENCIL = {
    ("xy", (0, 0, 0)): -4.0,
    ("xy", (-1, -1, 0)): -1.0,
    ("xy", (1, 1, 0)): -1.0,
    ("xy", (-1, 0, 0)): 1.5,
    ("xy", (0, -1, 0)): 1.5,
    ("xy", (0, 1, 0)): 1.5,
    ("xy", (1, 0, 0)): 1.5,
    ("xy", (0, 0, -1)): 2.0,
    ("xy", (0, 0, 1)): 2.0,
    ("yz", (0, -1, -1)): -0.5,
    ("yz", (1, 1, 0)): -0.5,
    ("yz", (0, -1, 0)): 1.0,
    ("yz", (1, 1, -1)): 1.0,
    ("yz", (0, 0, 0)): 1.5,
    ("yz", (1, 0, -1)): 1.5,
    ("zx", (-1, 0, -1)): -0.5,
    ("zx", (1, 1, 0)): -0.5,
    ("zx", (-1, 0, 0)): 1.0,
    ("zx", (1, 1, -1)): 1.0,
    ("zx", (0, 0, 0)): 1.5,
    ("zx", (0, 1, -1)): 1.5,
}

# Same row after the body diagonals are constrained to keep every block
# flat.  The row sum drops to zero, removing the uniform growth mode.
FLATTENED_CUBIC_STENCIL = {
    ("xy", (0, 0, 0)): -5.0,
    ("xy", (-1, -1, 0)): -1.0,
    ("xy", (1, 1, 0)): -1.0,
    ("xy", (-1, 0, 1)): -0.25,
    ("xy", (0, -1, 1)): -0.25,
    ("xy", (0, 1, -1)): -0.25,
    ("xy", (1, 0, -1)): -0.25,
    ("xy", (-1, 0, 0)): 1.25,
    ("xy", (1, 0, 0)): 1.25,
    ("xy", (0, -1, 0)): 1.25,
    ("xy", (0, 1, 0)): 1.25,
    ("xy", (0, 0, -1)): 1.5,
    ("xy", (0, 0, 1)): 1.5,
    ("yz", (0, -1, -1)): -0.5,
    ("yz", (0, 0, -1)): -0.5,
    ("yz", (1, 0, 0)): -0.5,
    ("yz", (1, 1, 0)): -0.5,
    ("yz", (-1, 0, 0)): -0.25,
    ("yz", (0, 1, -1)): -0.25,
    ("yz", (1, -1, 0)): -0.25,
    ("yz", (2, 0, -1)): -0.25,
    ("yz", (0, -1, 0)): 0.75,
    ("yz", (0, 0, 0)): 0.75,
    ("yz", (1, 0, -1)): 0.75,
    ("yz", (1, 1, -1)): 0.75,
    ("zx", (-1, 0, -1)): -0.5,
    ("zx", (0, 0, -1)): -0.5,
    ("zx", (0, 1, 0)): -0.5,
    ("zx", (1, 1, 0)): -0.5,
    ("zx", (-1, 1, 0)): -0.25,
    ("zx", (0, -1, 0)): -0.25,
    ("zx", (0, 2, -1)): -0.25,
    ("zx", (1, 0, -1)): -0.25,
    ("zx", (-1, 0, 0)): 0.75,
    ("zx", (0, 0, 0)): 0.75,
    ("zx", (0, 1, -1)): 0.75,
    ("zx", (1, 1, -1)): 0.75,
}

# Leading distinct real parts of the raw coefficient-matrix spectra, keyed
# by (block kind, grid dims, scale c).  Non-integer entries are rounded to
# the quoted digits; the c = 1/3 entries are exactly 9x the c = 1 ones.
RAW_SPECTRA = {
    ("cubic", (3, 3, 3), 1.0): (12.0, 6.0, 2.739, 0.0),
    ("cubic", (3, 3, 4), 1.0): (12.0, 8.0, 6.0, 4.514),
    ("cubic", (3, 3, 3), 1 / 3): (108.0, 54.0, 24.65, 0.0),
    ("cubic", (3, 3, 4), 1 / 3): (108.0, 72.0, 54.0, 40.63),
    ("skew", (3, 3, 3), 1.0): (0.966, 0.0),
    ("skew", (3, 3, 4), 1.0): (0.966, 0.0),
    ("skew", (3, 3, 3), 1 / 3): (8.697, 0.0),
    ("skew", (3, 3, 4), 1 / 3): (8.697, 0.0),
}

# Class-averaged 3x3 reduction of the raw skew matrix at c = 1, rows and
# columns ordered (yz, zx, xy), and its dominant eigenpair.
SKEW_REDUCED_MATRIX = (
    (0.308, 0.311, 0.282),
    (0.410, 0.415, 0.376),
    (0.266, 0.269, 0.244),
)
SKEW_DOMINANT_EIGENVALUE = 0.966
SKEW_DOMINANT_EIGENVECTOR = (0.532, 0.710, 0.461)

# With flat blocks every row sum is zero and no real part should exceed
# finite-difference noise; spectra are checked against this bound.
FLATTENED_MAX_EIGENVALUE_BOUND = 1e-8

# Fitted growth rates of raw simulation traces (explicit Euler from a
# sigma = 1e-15 perturbation, sampled at 100 x 0.01).  "measured" is the
# fitted rate quoted for that protocol; "predicted" the spectrum's value.
GROWTH_RATES = {
    ("cubic", (3, 3, 3), 1.0): {
        "rates": (11.998, 6.04, 2.86),
        "iqr": (0.001, 0.06, 0.11),
        "r_squared": 0.99998,
    },
    ("skew", (3, 3, 3), 1 / 3): {
        "measured": 8.339,
        "predicted": 8.697,
        "iqr": 0.004,
        "r_squared": 0.999999,
    },
}

# Change statistics of stabilised (flattened) runs on 3x3x3 grids: the
# cubic lattice freezes outright while the skew one keeps a uniform drift
# at the precision floor.
SUPPRESSION_STATISTICS = {
    "cubic": {"median_change": 0.0, "max_change": 1.7e-15,
              "initial_perturbation": 2.4e-15},
    "skew": {"median_change": 4.6e-15, "max_change": 6.7e-15,
             "initial_perturbation": 2.9e-15,
             "median_slope": 4.5e-15, "iqr_slope": 7.5e-16},
}
