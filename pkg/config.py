import os

# QMC defaults
QMC_POINTS = int(os.environ.get("SINRM_QMC_POINTS", 2**13))
QMC_SEED = int(os.environ.get("SINRM_QMC_SEED", 1))   # 0 = unscrambled
QMC_BATCHES = int(os.environ.get("SINRM_QMC_BATCHES", 8))
MAX_SOBOL_DIM = 21

# 1-D quadrature (half-line)
QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-8
QUAD_MAX_REFINEMENTS = 200

# Simplex checks: inside iff 1 - γΣt' > SIMPLEX_TOL
SIMPLEX_TOL = 1e-12

# Alternating expansions: max integration dimension k + i
EXPANSION_MAX_DIM = int(os.environ.get("SINRM_EXPANSION_MAX_DIM", MAX_SOBOL_DIM))

# Monte Carlo simulator
SIM_RADIUS = 10.0
SIM_TRIALS = int(os.environ.get("SINRM_SIM_TRIALS", 100_000))
SIM_SEED = 0
SIM_TOP_K = 8
SIM_FAR_FIELD = os.environ.get("SINRM_SIM_FAR_FIELD", "1") != "0"   # mean power beyond the disk
SIM_CHUNK_TRIALS = 2000     # substream granularity, keep fixed for reproducibility
THREADS = int(os.environ.get("SINRM_THREADS", 1))

# Sweeps
DB_STEP = 0.5

LOG_LEVEL = os.environ.get("SINRM_LOG_LEVEL", "INFO")
