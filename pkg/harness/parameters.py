# Distribution presets accepted wherever a distribution is named
DIST_PRESETS = ("bernoulli", "lazy-sym-bernoulli")

# Tasks, one per subcommand
TASKS = (
    "rho",
    "construct",
    "decouple",
    "inverse-linear",
    "inverse-bilinear",
    "inverse-quadratic",
    "verify",
    "accept",
)

# Acceptance levels and the number of seeded cases each criterion runs
QUICK = "quick"
FULL = "full"
LEVELS = (QUICK, FULL)
CASES = {
    QUICK: {"A3": 5, "A4": 5, "A5": 20, "A6": 10},
    FULL: {"A3": 50, "A4": 100, "A5": 200, "A6": 50},
}
THREAD_SETTINGS = ("1", "4")

# Radius used when a config leaves beta out
DEFAULT_BETA = "1/2"

# Command-line spellings of the Monte-Carlo mode and of the sup over centers
MC = "mc"
SUP = "sup"

# Quadratic pipeline criterion
PIPELINE_SEED = 0
PIPELINE_SUBSETS = 16
PIPELINE_Y_COUNT = 64
PIPELINE_FIT = {"p_max": 1, "m_max": 8, "k_max": 4}

# Determinism criterion: sizes above the worker-pool threshold
POOLED_N = 5
POOLED_SAMPLES = 1 << 15
