from hypothesis import settings

# Deterministic property tests: acceptance runs must not flake.
settings.register_profile("ci", derandomize=True, max_examples=100, deadline=None)
settings.load_profile("ci")
