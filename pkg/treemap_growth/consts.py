#!/usr/bin/env python

"""Constant values."""

# Lattice steps of the Mullin walk: +e1, -e1, +e2, -e2.
STEP_R = 0
STEP_L = 1
STEP_U = 2
STEP_D = 3

STEP_CHARS = "RLUD"
STEP_VECTORS = ((1, 0), (-1, 0), (0, 1), (0, -1))

DENSE_SOLVE_LIMIT = 2000
DLA_EXACT_MAX_EDGES = 6
DLA_EXACT_MAX_STEPS = 3
ENUMERATION_MAX_EDGES = 7
EXACT_LAW_MAX_EDGES = 4
EXACT_LAW_MAX_CUT = 2

HARMONIC_MIN_RATIO = 10.0
HARMONIC_SUM_TOLERANCE = 1e-9
CHI_DIMENSION_TOLERANCE = 0.06
SOLVE_RESIDUAL_TOLERANCE = 1e-12

DEFAULT_SEED = 42
DEFAULT_TRIALS = 32
DEFAULT_BUFFER_RATIO = 1.0
DEFAULT_MAX_BUFFER_RATIO = 256.0
DEFAULT_DISCARD_FRACTION = 0.25
DEFAULT_FAILURE_LIMIT = 0.2
DEFAULT_REJECTION_BUDGET = 100_000
DEFAULT_WINDOW_FACTOR = 4.0
BRANCH_HORIZON_FACTOR = 16.0
DEFAULT_MAX_WINDOW_FACTOR = 65536.0
WINDOW_GROWTH = 4.0

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BAND_VIOLATION = 2
EXIT_USAGE = 64
