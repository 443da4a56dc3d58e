"""Metropolis-Hastings resampling of coupled draws from one franchise.

Several predictive draws from a hierarchical CRP are coupled through the
counts they leave behind, so resampling a group of them jointly under a
restriction (for instance "the second draw must equal the value the rest of
the model expects") has no tractable normaliser.  The engine here removes the
old customers, lets a pluggable proposal pick new values, re-seats them, and
accepts or rejects the whole package.

The accept ratio needs only predictive probabilities: for every customer the
ratio between its joint (value, table) probability and the conditional table
choice probability collapses to the plain predictive ``Franchise.prob``.
Each removal contributes such a factor evaluated right after the customer
left, each addition contributes one evaluated right before the customer sits
down, and the proposal densities of the old and new values close the ratio.
On rejection the undo log restores the exact original seating; old customers
are never re-seated through fresh table choices.
"""

from math import exp, inf, log

from .franchise import UndoLog


class ProposalOutsideRestrictionError(ValueError):
    """The currently seated draws have zero proposal density; a wiring bug."""


class DrawRequest:
    """Description of a group of coupled draws to resample.

    Parameters
    ----------
    restaurant_for : callable
        ``restaurant_for(i, draws)`` returns the restaurant of slot ``i``
        given the values of slots ``0..i-1``; must be deterministic.
    old_draws : sequence of int
        The currently seated values, one per slot.
    """

    __slots__ = ("restaurant_for", "old_draws")

    def __init__(self, restaurant_for, old_draws):
        self.restaurant_for = restaurant_for
        self.old_draws = list(old_draws)

    def __len__(self):
        return len(self.old_draws)


class Outcome:
    __slots__ = ("accepted", "draws", "accept_prob")

    def __init__(self, accepted, draws, accept_prob):
        self.accepted = accepted
        self.draws = draws
        self.accept_prob = accept_prob


class RatioTracker:
    """Running accept ratio with an early-rejection query.

    Target-side factors enter through :meth:`mul` / :meth:`mul_log`,
    proposal-side factors through :meth:`div_log`.  With a pre-drawn uniform
    ``threshold``, :meth:`below_threshold` reports whether the partial
    product can no longer reach an acceptance (callers are responsible for
    only asking when the remaining factors cannot exceed one).
    """

    __slots__ = ("log_ratio", "threshold")

    def __init__(self, threshold=None):
        self.log_ratio = 0.0
        self.threshold = threshold

    def mul(self, factor):
        self.log_ratio += log(factor)

    def mul_log(self, log_factor):
        self.log_ratio += log_factor

    def div_log(self, log_factor):
        self.log_ratio -= log_factor

    @property
    def ratio(self):
        return exp(self.log_ratio)

    def below_threshold(self):
        if self.threshold is None:
            return False
        return self.threshold > 0.0 and self.log_ratio < log(self.threshold)

    def accept(self, rng):
        """Decide acceptance, reusing the pre-drawn threshold when present."""
        if self.log_ratio >= 0.0:
            return True, 1.0
        prob = exp(self.log_ratio)
        u = self.threshold if self.threshold is not None else rng.random()
        return u < prob, prob


def resample_draws(franchise, request, proposal, rng, force_reject=False):
    """One Metropolis-Hastings update of the draws described by ``request``.

    ``proposal`` must provide ``sample(franchise, rng) -> (draws, log_density)``
    and ``log_density(franchise, draws) -> float`` (``-inf`` outside the
    restriction set).  Both are evaluated against the franchise with all
    requested customers removed.  ``force_reject`` skips the accept decision
    and restores the original seating; it exists for restoration tests.
    """
    old = request.old_draws
    n = len(old)
    undo = UndoLog()
    tracker = RatioTracker()
    for i in range(n - 1, -1, -1):
        j = request.restaurant_for(i, old)
        franchise.remove_customer(j, old[i], rng, undo)
        tracker.div_log(log(franchise.prob(j, old[i])))
    log_q_old = proposal.log_density(franchise, old)
    if log_q_old == -inf:
        undo.undo_all()
        raise ProposalOutsideRestrictionError(
            "seated draws %r have zero proposal density" % (old,))
    new, log_q_new = proposal.sample(franchise, rng)
    tracker.mul_log(log_q_old)
    tracker.div_log(log_q_new)
    for i in range(n):
        j = request.restaurant_for(i, new)
        tracker.mul_log(log(franchise.prob(j, new[i])))
        franchise.add_customer(j, new[i], rng, undo)
    if force_reject:
        accepted, prob = False, min(1.0, tracker.ratio)
    else:
        accepted, prob = tracker.accept(rng)
    if accepted:
        return Outcome(True, list(new), prob)
    undo.undo_all()
    return Outcome(False, list(old), prob)


class PredictiveProposal:
    """Independent predictive proposal for a single unrestricted draw.

    Samples the slot value from the franchise predictive itself, which makes
    the accept ratio cancel exactly (never rejects).  Fresh dishes are given
    the label supplied by ``fresh_label``.
    """

    def __init__(self, restaurant, fresh_label):
        self.restaurant = restaurant
        self.fresh_label = fresh_label

    def sample(self, franchise, rng):
        from .franchise import NEW

        dish, _, _ = franchise.draw_dish(self.restaurant, rng)
        if dish == NEW:
            dish = self.fresh_label
        return [dish], log(franchise.prob(self.restaurant, dish))

    def log_density(self, franchise, draws):
        return log(franchise.prob(self.restaurant, draws[0]))
