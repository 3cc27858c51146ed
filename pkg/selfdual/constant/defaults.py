"""Numerical defaults shared by the solver, the verification battery and the command line"""
import math

SQRT2 = math.sqrt(2.0)
SELF_DUAL_K = 1.0 / SQRT2           # coupling of the self-dual point, also the critical field there

# Kazdan-Warner Newton solve
TOL_RESIDUAL = 1e-10
LINEAR_TOL = 1e-12
MAX_NEWTON = 50
CONTINUATION_STEP = 0.05
MAX_LINEAR_ITERATIONS = 500
ARMIJO_C = 1e-4
MIN_DAMPING = 1.0 / 1024

# Discretization
GRID_N = 64
MIN_GRID_N = 8
THETA_TRUNCATION = 10
THETA_TAIL_TOL = 1e-16

# Small-field regime: H_int below the key uses at least the given grid
H_MIN = 0.02
GRID_ESCALATION = ((0.05, 256), (0.1, 128))

# Near the bifurcation A = 1 - sqrt(2) H vanishes; below this the analytic limit pair is reported
A_FLOOR = 1e-6

# Tolerances of identity checks on solved pairs
INTEGRITY_TOL = 1e-8
IDENTITY_TOL = 1e-6
REFINEMENT_DRIFT = 1e-6
MODULUS_TOL = 1e-8

# Sweeps
DEFAULT_H_GRID = tuple(round(0.70 - 0.05 * i, 2) for i in range(14)) + (0.04, 0.03, 0.02)
DEFAULT_K_RANGE = (0.3, 2.0)
DEFAULT_RESOLUTION = 35
SLOPE_TOL = 2e-3

# Result caches, in entries; each pair at n=256 holds a dozen 256 x 256 arrays
PAIR_CACHE_SIZE = 32
FAMILY_CACHE_SIZE = 8
SECTION_CACHE_SIZE = 32

# Randomized battery
RANDOM_PAIRS = 100
RANDOM_MODES = 4

# Command line
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4
CSV_FLOAT = '{:.11e}'               # 12 significant digits
OUTPUT_DIR_ENV = 'SELFDUAL_OUTPUT_DIR'
FAULT_SCALE = 1.01
