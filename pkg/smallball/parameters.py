# Number of leading variables fixed per enumeration chunk
CHUNK_PREFIX = 2

# Default radius for the Erdos profile
PROFILE_BETA = "1/2"
