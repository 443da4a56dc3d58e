"""Bootstrap particle filtering for the franchise-backed HMM.

Used in two roles: producing an initial hidden sequence for the samplers
(each particle grows a private model and the final sequence is drawn from a
weight-proportional particle), and estimating per-step predictive emission
likelihoods of a trained model on held-out data (each particle clones the
model's counts and absorbs the test sequence as it advances).
"""

import warnings

from .franchise import NEW
from .hmm import INITIAL_STATE, HmmState

DEFAULT_PARTICLES = 100


class _Particle:
    __slots__ = ("trans", "emit", "x", "prev", "next_label")

    def __init__(self, trans, emit, x, prev, next_label):
        self.trans = trans
        self.emit = emit
        self.x = x
        self.prev = prev
        self.next_label = next_label

    def clone(self):
        return _Particle(self.trans.clone(), self.emit.clone(), list(self.x),
                         self.prev, self.next_label)

    def advance(self, symbol, rng):
        """Propose the next state from the transition predictive and return
        the emission predictive of ``symbol`` under it, before absorbing."""
        dish, _, _ = self.trans.draw_dish(self.prev, rng)
        if dish == NEW:
            dish = self.next_label
            self.next_label += 1
        weight = self.emit.prob(dish, symbol)
        self.trans.add_customer(self.prev, dish, rng)
        self.emit.add_customer(dish, symbol, rng)
        self.x.append(dish)
        self.prev = dish
        return weight


def _resample(particles, weights, rng):
    """Multinomial resampling; particles drawn once are moved, repeats cloned."""
    total = sum(weights)
    if total <= 0.0:
        warnings.warn("all particle weights vanished; restarting step with "
                      "uniform weights")
        weights = [1.0] * len(particles)
        total = float(len(particles))
    counts = [0] * len(particles)
    for _ in particles:
        u = rng.random() * total
        acc = 0.0
        pick = len(particles) - 1
        for i, w in enumerate(weights):
            acc += w
            if u < acc:
                pick = i
                break
        counts[pick] += 1
    out = []
    for i, c in enumerate(counts):
        if c:
            out.append(particles[i])
            for _ in range(c - 1):
                out.append(particles[i].clone())
    return out


def _pick(weights, rng):
    total = sum(weights)
    u = rng.random() * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(weights) - 1


def init_state(y, n_symbols, rng, n_particles=DEFAULT_PARTICLES,
               alpha0=1.0, gamma=1.0, alpha_e=1.0, gamma_e=1.0):
    """Particle-filter initialisation: returns a fully seated HmmState."""
    template = HmmState([], n_symbols, alpha0, gamma, alpha_e, gamma_e)
    particles = [_Particle(template.trans.clone(), template.emit.clone(),
                           [], INITIAL_STATE, 1)
                 for _ in range(n_particles)]
    last_weights = [1.0] * n_particles
    for t, symbol in enumerate(y):
        last_weights = [p.advance(symbol, rng) for p in particles]
        if t + 1 < len(y):
            particles = _resample(particles, last_weights, rng)
    chosen = particles[_pick(last_weights, rng)] if particles else None
    h = HmmState(y, n_symbols, alpha0, gamma, alpha_e, gamma_e)
    if chosen is not None and y:
        h.trans = chosen.trans
        h.emit = chosen.emit
        h.x = chosen.x
    h.audit(deep=True)
    return h


def predictive_likelihoods(h, y_test, rng, n_particles=DEFAULT_PARTICLES):
    """Mean one-step predictive emission likelihood of each test symbol.

    Every particle starts from a clone of the trained model and absorbs the
    test sequence as it goes, so later steps are conditioned on the earlier
    test data the particle has explained.
    """
    particles = [_Particle(h.trans.clone(), h.emit.clone(), [],
                           INITIAL_STATE, _unused_label(h))
                 for _ in range(n_particles)]
    out = []
    for t, symbol in enumerate(y_test):
        weights = [p.advance(symbol, rng) for p in particles]
        out.append(sum(weights) / len(weights))
        if t + 1 < len(y_test):
            particles = _resample(particles, weights, rng)
    return out


def _unused_label(h):
    used = max(h.trans.root_tables, default=0)
    if h.x:
        used = max(used, max(h.x))
    return used + 1
