# GAP fitting search bounds
R_MAX = 2
P_MAX = 2
M_MAX = 12
# Default step numerator bound by point dimension; 1 beyond the table
M_MAX_BY_DIM = {1: M_MAX, 2: 6, 3: 2}
K_MAX = 6
SIZE_CAP = 1000
N_PRIME = 0
SEARCH_CEILING = 1_000_000

# Hypothesis and threshold exponents
B_EXPONENT = 2
C_EXPONENT = 3
EPSILON = "1/2"

# Largest exponent tried when looking for the tightest passing one
MAX_EXPONENT = 64

# Cap on GAP volume during rank reduction
REDUCE_CAP = 1_000_000

# Sampling of y vectors and of subsets U
Y_SAMPLE = 256
SUBSET_SAMPLE = 256
EXHAUSTIVE_SUBSET_MAX_N = 11

# Modes
EXACT = "exact"
SAMPLED = "sampled"
EXHAUSTIVE = "exhaustive"
