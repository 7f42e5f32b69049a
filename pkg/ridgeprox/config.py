"""
Configuration settings for ridgeprox
"""
import os
from dotenv import load_dotenv

load_dotenv()

# Parallelism for pairwise sweeps and sampled probes
THREADS = int(os.getenv("RIDGEPROX_THREADS", str(os.cpu_count() or 1)))

# Scalar equality predicate |s - t| <= abs_tol + rel_tol * max(|s|, |t|)
DEFAULT_ABS_TOL = float(os.getenv("RIDGEPROX_ABS_TOL", "1e-9"))
DEFAULT_REL_TOL = float(os.getenv("RIDGEPROX_REL_TOL", "1e-9"))

# Linear algebra thresholds
RANK_TOL = float(os.getenv("RIDGEPROX_RANK_TOL", "1e-10"))
BASIS_DROP_TOL = float(os.getenv("RIDGEPROX_BASIS_DROP_TOL", "1e-10"))
DET_TOL = float(os.getenv("RIDGEPROX_DET_TOL", "1e-12"))

# Simplex
PIVOT_TOL = float(os.getenv("RIDGEPROX_PIVOT_TOL", "1e-11"))
CERTIFICATE_TOL = float(os.getenv("RIDGEPROX_CERTIFICATE_TOL", "1e-7"))

# Exhaustive closed-path enumeration guard
CLOSED_PATH_POINT_LIMIT = int(os.getenv("RIDGEPROX_CLOSED_POINT_LIMIT", "20"))
CLOSED_PATH_LENGTH_LIMIT = int(os.getenv("RIDGEPROX_CLOSED_LENGTH_LIMIT", "12"))

# Alternating (Diliberto-Straus) iteration
ALT_MAX_ROUNDS = int(os.getenv("RIDGEPROX_MAX_ROUNDS", "200"))
ALT_STOP_TOL = float(os.getenv("RIDGEPROX_STOP_TOL", "1e-12"))

# Sampled basis-completion probing
DEFAULT_DELTAS = tuple(
    float(d) for d in os.getenv("RIDGEPROX_DELTAS", "1,0.5,0.25,0.125").split(",") if d.strip()
)
DELTA0_SHRINK = float(os.getenv("RIDGEPROX_DELTA0_SHRINK", "0.5"))
DELTA0_MAX_STEPS = int(os.getenv("RIDGEPROX_DELTA0_MAX_STEPS", "20"))

# Logging
LOG_LEVEL = os.getenv("RIDGEPROX_LOG_LEVEL", "INFO").upper()
USE_UTC = os.getenv("USE_UTC", "true").lower() == "true"
