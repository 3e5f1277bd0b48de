"""
Settings - Numeric tolerances, caps and simulation defaults shared by every module
"""

# --- Configuration ---

# Spectral analysis
EIGEN_RESIDUAL_TOL = 1e-10
LEADING_EIGENVALUE_TOL = 1e-8
CORE_INDEX_SMALL_LIMIT = 0.5

# Limiting covariance
SYLVESTER_RESIDUAL_TOL = 1e-10      # relative to max |C|
METHOD_AGREEMENT_TOL = 1e-6
SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10
BALANCED_DIRECTION_TOL = 1e-8       # |Sigma @ 1|
QUADRATURE_TAIL_TOL = 1e-14
QUADRATURE_EPSABS = 1e-13
QUADRATURE_EPSREL = 1e-11

# Exact computations
ORACLE_STATE_CAP = 1_000_000
EXACT_MEAN_RATIONAL_LIMIT = 10_000
LOG_GAMMA_SWITCH = 30               # level 1-2 mean formula switches to log-gamma above this age

# Simulation
DEFAULT_DRAWS = 2000
DEFAULT_REPLICATIONS = 1000
DEFAULT_SEED = 8801
DEFAULT_WORKERS = 1
REPLICATION_BLOCK = 25
STUDY_SEEDS = {2: 8801, 3: 9501, 4: 4102, 5: 4706}

# Output
SCHEMA_VERSION = 1
TABLE_DECIMALS = 3
