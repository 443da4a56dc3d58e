"""Hidden Markov model state backed by two franchises.

The transition franchise indexes restaurants by source state and dishes by
destination state; the emission franchise indexes restaurants by state and
dishes by symbol, with a finite uniform base over the alphabet.  The hidden
sequence, both franchises and the four concentrations travel together so
sweeps can mutate them as one unit.

State labels are positive integers; label 0 is reserved for the fixed
initial context that feeds the first transition and never appears as a dish.
"""

from math import log

import numpy as np

from .franchise import NEW, Franchise, SnapshotFormatError

INITIAL_STATE = 0


class HmmState:
    """Observations plus the full sampler state built on them."""

    def __init__(self, y, n_symbols, alpha0=1.0, gamma=1.0,
                 alpha_e=1.0, gamma_e=1.0):
        y = list(y)
        if any(not 0 <= s < n_symbols for s in y):
            raise ValueError("symbols must lie in [0, n_symbols)")
        self.y = y
        self.n_symbols = n_symbols
        self.trans = Franchise(alpha0, gamma)
        self.emit = Franchise(alpha_e, gamma_e, base_size=n_symbols)
        self.x = []

    # hyperparameters live on the franchises; expose them uniformly
    @property
    def alpha0(self):
        return self.trans.alpha

    @property
    def gamma(self):
        return self.trans.gamma

    @property
    def alpha_e(self):
        return self.emit.alpha

    @property
    def gamma_e(self):
        return self.emit.gamma

    def __len__(self):
        return len(self.y)

    def prev_state(self, t):
        return self.x[t - 1] if t > 0 else INITIAL_STATE

    def num_states(self):
        """Number of live state labels (transition root dishes)."""
        return self.trans.num_dishes()

    def fresh_labels(self, count=1, exclude=()):
        """The ``count`` smallest unused positive labels.

        A label counts as used while it appears in the current hidden
        sequence, is served anywhere in the transition franchise, or is
        listed in ``exclude`` (labels already claimed by an in-flight
        proposal).
        """
        used = set(self.x)
        used.update(self.trans.root_tables)
        used.update(exclude)
        out = []
        k = 1
        while len(out) < count:
            if k not in used:
                out.append(k)
            k += 1
        return out

    # ------------------------------------------------------------------
    # seating helpers

    def seat_sequence(self, x, rng):
        """Seat every transition and emission customer for hidden sequence ``x``.

        Both franchises must be empty.  Returns the accumulated log
        probability of the draws and table choices, which equals the joint
        log probability of the resulting seating.
        """
        if self.trans.root_total or self.emit.root_total:
            raise ValueError("franchises already populated")
        x = list(x)
        if len(x) != len(self.y):
            raise ValueError("hidden sequence length mismatch")
        if INITIAL_STATE in x:
            raise ValueError("label 0 is reserved for the initial context")
        total = 0.0
        prev = INITIAL_STATE
        for t, k in enumerate(x):
            total += log(self.trans.prob(prev, k))
            total += self.trans.add_customer(prev, k, rng)
            total += log(self.emit.prob(k, self.y[t]))
            total += self.emit.add_customer(k, self.y[t], rng)
            prev = k
        self.x = x
        return total

    def joint_log_prob(self):
        return self.trans.seating_log_prob() + self.emit.seating_log_prob()

    def emit_prob(self, k, symbol):
        """Emission predictive for state ``k``; ``NEW`` means an unseen state."""
        if k == NEW:
            return self.emit.prob(-2, symbol)  # -2: a restaurant id never seated
        return self.emit.prob(k, symbol)

    def audit(self, deep=False):
        """Structural audit of both franchises; ``deep`` rebuilds from (x, y).

        The rebuild checks that per-restaurant per-dish customer counts match
        the sequence exactly and that every table count stays within its
        feasible range.
        """
        self.trans.audit()
        self.emit.audit()
        if len(self.x) != len(self.y):
            raise ValueError("hidden sequence length mismatch")
        if not deep:
            return
        trans_counts = {}
        emit_counts = {}
        prev = INITIAL_STATE
        for t, k in enumerate(self.x):
            trans_counts[prev, k] = trans_counts.get((prev, k), 0) + 1
            emit_counts[k, self.y[t]] = emit_counts.get((k, self.y[t]), 0) + 1
            prev = k
        for franchise, counts in ((self.trans, trans_counts),
                                  (self.emit, emit_counts)):
            seen = {}
            for j, r in franchise.restaurants.items():
                for k, lst in r.tables.items():
                    seen[j, k] = sum(lst)
                    if not 1 <= len(lst) <= sum(lst):
                        raise ValueError("table count out of range at %r" % ((j, k),))
            if seen != counts:
                raise ValueError("franchise counts do not match the sequence")

    def clone(self):
        h = HmmState.__new__(HmmState)
        h.y = self.y  # observations are immutable by convention
        h.n_symbols = self.n_symbols
        h.trans = self.trans.clone()
        h.emit = self.emit.clone()
        h.x = list(self.x)
        return h

    # ------------------------------------------------------------------
    # checkpoint I/O: two franchise snapshots plus the hidden sequence

    def save(self, path):
        with open(path, "w", encoding="ascii") as fp:
            fp.write("hmm-checkpoint 1\n")
            fp.write("n_symbols %d\n" % self.n_symbols)
            fp.write("x %s\n" % " ".join(str(k) for k in self.x))
            self.trans.dump(fp)
            self.emit.dump(fp)

    @classmethod
    def load(cls, path, y):
        with open(path, "r", encoding="ascii") as fp:
            if fp.readline().split()[:1] != ["hmm-checkpoint"]:
                raise SnapshotFormatError("missing checkpoint header")
            n_symbols = None
            x = None
            pos = fp.tell()
            while True:
                line = fp.readline()
                parts = line.split()
                if parts and parts[0] == "n_symbols":
                    n_symbols = int(parts[1])
                elif parts and parts[0] == "x":
                    x = [int(v) for v in parts[1:]]
                else:
                    fp.seek(pos)
                    break
                pos = fp.tell()
            if n_symbols is None or x is None:
                raise SnapshotFormatError("checkpoint missing n_symbols or x")
            h = cls(y, n_symbols)
            h.trans = Franchise.parse(fp)
            h.emit = Franchise.parse(fp)
            h.x = x
            h.audit(deep=True)
            return h


def generate(n_symbols, length, rng, alpha0=1.0, gamma=1.0,
             alpha_e=1.0, gamma_e=1.0):
    """Sample (hidden states, observations) from the generative process.

    Grows an empty :class:`HmmState`: each step draws the next state from the
    transition predictive of the previous one, seats it, then draws and seats
    the emission.  Returns the populated state.
    """
    h = HmmState([], n_symbols, alpha0, gamma, alpha_e, gamma_e)
    x = []
    y = []
    prev = INITIAL_STATE
    for _ in range(length):
        dish, _, _ = h.trans.draw_dish(prev, rng)
        if dish == NEW:
            dish = h.fresh_labels(exclude=x)[0]
        h.trans.add_customer(prev, dish, rng)
        symbol, _, _ = h.emit.draw_dish(dish, rng)
        h.emit.add_customer(dish, symbol, rng)
        x.append(dish)
        y.append(symbol)
        prev = dish
    h.x = x
    h.y = y
    return h


class PredictiveMatrix:
    """Finite view of the transition predictives implied by a seating.

    Rows and columns cover the states currently served in the transition
    root plus one aggregate column/row for an unseen state; every row sums
    to one.  ``col(label)`` maps any label onto its column, sending labels
    absent from the seating onto the aggregate column.  Pair with
    :func:`emission_weights` for the matching emission rows.
    """

    __slots__ = ("states", "index", "probs", "franchise")

    def __init__(self, franchise):
        self.franchise = franchise
        self.states = sorted(franchise.root_tables)
        self.index = {k: i for i, k in enumerate(self.states)}
        k1 = len(self.states) + 1
        root_share = np.empty(k1)
        denom = franchise.root_total + franchise.gamma
        for i, k in enumerate(self.states):
            root_share[i] = franchise.root_tables[k] / denom
        root_share[-1] = franchise.gamma / denom
        probs = np.empty((k1, k1))
        alpha = franchise.alpha
        for i, k in enumerate(self.states):
            probs[i] = self._row(franchise.restaurants.get(k), root_share, alpha)
        probs[-1] = root_share  # unseen state: empty restaurant
        self.probs = probs

    def _row(self, r, root_share, alpha):
        row = alpha * root_share
        n_j = 0.0
        if r is not None:
            n_j = r.total
            for k, lst in r.tables.items():
                row[self.index[k]] += sum(lst)
        return row / (n_j + alpha)

    @property
    def new_col(self):
        return len(self.states)

    def col(self, label):
        return self.index.get(label, len(self.states))

    def row(self, label):
        """Outgoing predictive row for an arbitrary restaurant label."""
        i = self.index.get(label)
        if i is not None:
            return self.probs[i]
        r = self.franchise.restaurants.get(label)
        if r is None:
            return self.probs[-1]
        denom = self.franchise.root_total + self.franchise.gamma
        root_share = np.empty(len(self.states) + 1)
        for i, k in enumerate(self.states):
            root_share[i] = self.franchise.root_tables[k] / denom
        root_share[-1] = self.franchise.gamma / denom
        return self._row(r, root_share, self.franchise.alpha)


def emission_weights(h, labels, symbols):
    """Matrix of emission predictives: rows follow ``labels`` (state labels or
    ``NEW``), columns follow ``symbols``."""
    out = np.empty((len(labels), len(symbols)))
    for i, k in enumerate(labels):
        for t, s in enumerate(symbols):
            out[i, t] = h.emit_prob(k, s)
    return out
