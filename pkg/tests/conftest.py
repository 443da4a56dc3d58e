import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return random.Random(20240817)


def build_random_franchise(rng, n_ops=200, n_restaurants=4, n_dishes=6,
                           alpha=1.0, gamma=1.0, base_size=None):
    """A franchise grown by random additions (and occasional removals)."""
    from hcrphmm import Franchise

    f = Franchise(alpha, gamma, base_size)
    seated = []
    for _ in range(n_ops):
        if seated and rng.random() < 0.3:
            j, k = seated.pop(rng.randrange(len(seated)))
            f.remove_customer(j, k, rng)
        else:
            j = rng.randrange(n_restaurants)
            k = rng.randrange(n_dishes)
            f.add_customer(j, k, rng)
            seated.append((j, k))
    return f, seated
