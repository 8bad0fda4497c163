# Threshold tau = c_log * beta * sqrt(log n)
DEFAULT_C_LOG = 1

# Powers of two scanned for the smallest c_log that makes the verdict true
C_LOG_EXPONENTS = range(-8, 9)

# Exponent coefficients of the constant floor denominators exp(k * pi)
FLOOR_EXP = 4
STRICT_FLOOR_EXP = 8
