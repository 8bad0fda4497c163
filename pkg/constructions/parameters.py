# Perturbations are delta * z / PERTURBATION_LATTICE for integer z with |z| <= L
PERTURBATION_LATTICE = 16

# Largest |k_i| accepted for the algebraic part of planted instances
MAX_K_ENTRY = 1000

# Instance kinds
LINEAR_GAP = "linear_gap"
QUADRATIC_GAP = "quadratic_gap"
RANK_ONE = "rank_one"
MIXED = "mixed"
KINDS = (LINEAR_GAP, QUADRATIC_GAP, RANK_ONE, MIXED)

# Command-line names of the instance kinds
KIND_NAMES = {
    "ex1.1": LINEAR_GAP,
    "ex1.4": QUADRATIC_GAP,
    "ex1.5": RANK_ONE,
    "ex1.6": MIXED,
}
