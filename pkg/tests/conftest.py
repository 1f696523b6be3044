from hypothesis import settings

# first calls compile numba kernels, so per-example timing is meaningless
settings.register_profile("default", deadline=None)
settings.load_profile("default")
