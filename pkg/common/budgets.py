# Outcome enumeration
DEFAULT_BUDGET = 1 << 22
MEET_IN_THE_MIDDLE_MIN_N = 21

# GAP enumeration
DEFAULT_GAP_CAP = 1_000_000

# Parallel execution
THREADS_ENV_VAR = "LO_THREADS"
PARALLEL_MIN_WORK = 1 << 15

# Monte Carlo
MC_STREAMS = 16
MC_CONFIDENCE = 0.95
MC_TOLERANCE = 1e-12
