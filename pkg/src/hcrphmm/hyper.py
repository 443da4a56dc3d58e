"""Concentration parameter resampling under Gamma(1, 1) priors.

Both concentrations of a franchise are given one auxiliary-variable Gibbs
scan: the restaurant-level concentration uses one Beta and one Bernoulli
variable per non-empty restaurant, the root concentration one Beta/Bernoulli
pair for the root totals.  For a root collapsed onto a finite base the dish
terms additionally need latent table counts, drawn as the usual sum of
Bernoulli indicators.
"""

from math import log

PRIOR_SHAPE = 1.0
PRIOR_RATE = 1.0


def resample_restaurant_concentration(alpha, stats, rng,
                                      shape=PRIOR_SHAPE, rate=PRIOR_RATE):
    """One Gibbs update of a restaurant-level concentration.

    ``stats`` is an iterable of ``(customers, tables)`` pairs, one per
    restaurant; empty restaurants contribute nothing.
    """
    a = shape
    b = rate
    for customers, tables in stats:
        if customers == 0:
            continue
        w = rng.betavariate(alpha + 1.0, customers)
        b -= log(w)
        a += tables
        if rng.random() * (customers + alpha) < customers:
            a -= 1.0
    return rng.gammavariate(a, 1.0 / b)


def resample_root_concentration(gamma, root_tables, root_total, rng,
                                base_size=None,
                                shape=PRIOR_SHAPE, rate=PRIOR_RATE):
    """One Gibbs update of a root concentration given root dish counts."""
    if root_total == 0:
        return rng.gammavariate(shape, 1.0 / rate)
    a = shape
    b = rate
    w = rng.betavariate(gamma + 1.0, root_total)
    b -= log(w)
    if rng.random() * (root_total + gamma) < root_total:
        a -= 1.0
    if base_size is None:
        a += len(root_tables)
    else:
        unit = gamma / base_size
        for m in root_tables.values():
            a += 1.0
            for i in range(1, m):
                if rng.random() * (unit + i) < unit:
                    a += 1.0
    return rng.gammavariate(a, 1.0 / b)


def resample_franchise(franchise, rng, shape=PRIOR_SHAPE, rate=PRIOR_RATE):
    """Update ``alpha`` then ``gamma`` of one franchise in place."""
    stats = [(r.total, r.num_tables()) for r in franchise.restaurants.values()]
    franchise.alpha = resample_restaurant_concentration(
        franchise.alpha, stats, rng, shape, rate)
    franchise.gamma = resample_root_concentration(
        franchise.gamma, franchise.root_tables, franchise.root_total, rng,
        franchise.base_size, shape, rate)


def resample_hyperparameters(h, rng, shape=PRIOR_SHAPE, rate=PRIOR_RATE,
                             tie=False):
    """Resample all four concentrations of an HMM state.

    With ``tie=True`` the transition values are copied onto the emission
    franchise after a joint update of the pooled statistics.
    """
    if not tie:
        resample_franchise(h.trans, rng, shape, rate)
        resample_franchise(h.emit, rng, shape, rate)
        return
    stats = [(r.total, r.num_tables()) for r in h.trans.restaurants.values()]
    stats += [(r.total, r.num_tables()) for r in h.emit.restaurants.values()]
    alpha = resample_restaurant_concentration(h.trans.alpha, stats, rng,
                                              shape, rate)
    h.trans.alpha = h.emit.alpha = alpha
    gamma = resample_root_concentration(
        h.trans.gamma, h.trans.root_tables, h.trans.root_total, rng, None,
        shape, rate)
    h.trans.gamma = h.emit.gamma = gamma
