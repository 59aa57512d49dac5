import numpy as np


def make_rng(seed, stream=0):
    """Philox4x64 generator keyed on ``(seed, stream)``.

    Philox is counter based, so a given key produces the same stream on any
    platform. Distinct ``stream`` values give independent streams for the
    same seed (graph sampling and data sampling use different streams).
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))
