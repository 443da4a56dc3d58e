"""Sweep kernels for the franchise-backed HMM.

Every kernel is a Metropolis-Hastings move over (hidden states, seatings):
old customers are removed while their predictive factors are collected, a
proposal supplies replacement states, the replacements are seated while their
factors are collected, and the move is accepted with the resulting ratio.
Rejection replays the undo log, restoring the exact original seating.

Three proposal families are provided: a per-position proposal built from the
local predictives (step-wise sweep), a forward-backward draw over a block of
positions from the finite predictive matrix (blocked sweep), and the same
draw restricted by per-transition slice variables (beam sweep).
"""

from math import log

import numpy as np

from .collapsed_mh import RatioTracker
from .franchise import NEW, UndoLog
from .hmm import INITIAL_STATE, PredictiveMatrix, emission_weights


class ZeroLikelihoodBlockError(RuntimeError):
    """A forward pass lost all mass; the enclosing block move must reject."""


class SweepStats:
    """Accept/trial counters for one or more sweeps."""

    __slots__ = ("accepted", "trials")

    def __init__(self, accepted=0, trials=0):
        self.accepted = accepted
        self.trials = trials

    def count(self, accepted):
        self.trials += 1
        if accepted:
            self.accepted += 1

    def merge(self, other):
        self.accepted += other.accepted
        self.trials += other.trials

    @property
    def accept_rate(self):
        return self.accepted / self.trials if self.trials else float("nan")


# ----------------------------------------------------------------------
# step-wise sweep

def stepwise_move(h, t, rng):
    """Resample position ``t``: two transitions plus one emission jointly.

    The proposal weight of candidate ``k`` is the product of the transition
    predictive into ``k`` (plus the full new-state mass when ``k`` equals the
    successor state, so a successor that lost its last table stays
    proposable), the transition predictive from ``k`` to the successor, and
    the emission predictive of the observed symbol under ``k``.
    """
    x, y = h.x, h.y
    prev = h.prev_state(t)
    old = x[t]
    nxt = x[t + 1] if t + 1 < len(y) else None
    trans, emit = h.trans, h.emit
    undo = UndoLog()
    tracker = RatioTracker()
    if nxt is not None:
        trans.remove_customer(old, nxt, rng, undo)
        tracker.div_log(log(trans.prob(old, nxt)))
    emit.remove_customer(old, y[t], rng, undo)
    tracker.div_log(log(emit.prob(old, y[t])))
    trans.remove_customer(prev, old, rng, undo)
    tracker.div_log(log(trans.prob(prev, old)))

    # candidates: served states, the successor if it lost its last table,
    # and one fresh state (label allocated only if actually picked)
    cands = sorted(trans.root_tables)
    if nxt is not None and nxt not in trans.root_tables:
        cands.append(nxt)
    cands.append(NEW)
    new_mass = trans.prob(prev, NEW)
    weights = []
    total = 0.0
    for k in cands:
        if k == NEW:
            w = new_mass
            if nxt is not None:
                w *= trans.prob(NEW, nxt)  # empty restaurant
            w *= h.emit_prob(NEW, y[t])
        else:
            w = trans.prob(prev, k)
            if k == nxt:
                w += new_mass
            if nxt is not None:
                w *= trans.prob(k, nxt)
            w *= emit.prob(k, y[t])
        weights.append(w)
        total += w
    u = rng.random() * total
    acc = 0.0
    pick = len(cands) - 1
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            pick = i
            break
    new = cands[pick]
    if new == NEW:
        # fresh label: unused anywhere; only the removed dishes can be live
        # in x without a root table, so the root scan plus them suffices
        new = 1
        while new in trans.root_tables or new == old or new == nxt:
            new += 1
    old_idx = cands.index(old) if old in cands else len(cands) - 1
    tracker.mul_log(log(weights[old_idx]))
    tracker.div_log(log(weights[pick]))

    tracker.mul_log(log(trans.prob(prev, new)))
    trans.add_customer(prev, new, rng, undo)
    tracker.mul_log(log(emit.prob(new, y[t])))
    emit.add_customer(new, y[t], rng, undo)
    if nxt is not None:
        tracker.mul_log(log(trans.prob(new, nxt)))
        trans.add_customer(new, nxt, rng, undo)

    accepted, _ = tracker.accept(rng)
    if accepted:
        x[t] = new
    else:
        undo.undo_all()
    return accepted


def stepwise_sweep(h, rng):
    """One pass over all positions in a fresh uniform random order."""
    order = list(range(len(h.y)))
    rng.shuffle(order)
    stats = SweepStats()
    for t in order:
        stats.count(stepwise_move(h, t, rng))
    return stats


# ----------------------------------------------------------------------
# block customer bookkeeping

def remove_seq(h, t0, t1, rng, undo):
    """Remove every customer owned by block ``[t0, t1)``.

    That is each position's incoming transition and emission, plus the
    boundary transition into ``x[t1]`` when the block does not end the
    sequence.  Factors are collected right after each removal; their sum is
    the log predictive probability of the removed customers given the
    remaining seating.
    """
    x, y = h.x, h.y
    trans, emit = h.trans, h.emit
    total = 0.0
    if t1 < len(y):
        trans.remove_customer(x[t1 - 1], x[t1], rng, undo)
        total += log(trans.prob(x[t1 - 1], x[t1]))
    for t in range(t1 - 1, t0 - 1, -1):
        prev = x[t - 1] if t else INITIAL_STATE
        trans.remove_customer(prev, x[t], rng, undo)
        emit.remove_customer(x[t], y[t], rng, undo)
        total += log(trans.prob(prev, x[t])) + log(emit.prob(x[t], y[t]))
    return total


def add_seq(h, t0, t1, x_new, rng, undo):
    """Seat block ``[t0, t1)`` of ``x_new`` (a full-length sequence); mirror of
    :func:`remove_seq` with factors collected before each addition."""
    y = h.y
    trans, emit = h.trans, h.emit
    total = 0.0
    for t in range(t0, t1):
        prev = x_new[t - 1] if t else INITIAL_STATE
        total += log(trans.prob(prev, x_new[t]))
        trans.add_customer(prev, x_new[t], rng, undo)
        total += log(emit.prob(x_new[t], y[t]))
        emit.add_customer(x_new[t], y[t], rng, undo)
    if t1 < len(y):
        total += log(trans.prob(x_new[t1 - 1], x_new[t1]))
        trans.add_customer(x_new[t1 - 1], x_new[t1], rng, undo)
    return total


# ----------------------------------------------------------------------
# forward-backward block proposals

def fb_sample_block(probs, left_row, emis, right_col, rng, slices=None):
    """Sample a column path for one block by forward filtering and backward
    sampling.

    ``probs`` is the square predictive matrix, ``left_row`` the outgoing row
    of the left context, ``emis`` the per-position emission weights (columns
    are block positions) and ``right_col`` the column of the right context or
    ``None``.  With ``slices`` (one value per transition, boundary included)
    each transition weight is replaced by the indicator of exceeding its
    slice.  Returns ``(cols, log_norm)`` where ``log_norm`` is the log of the
    total mass the forward pass integrated.
    """
    k1, length = emis.shape
    if k1 <= 8:  # vector arithmetic is pure overhead for tiny state counts
        return _fb_small(probs.tolist(), left_row.tolist(),
                         emis.T.tolist(), right_col, rng, slices)
    fwd = np.empty((length, k1))
    log_norm = 0.0
    if slices is None:
        cur = left_row * emis[:, 0]
    else:
        cur = (left_row > slices[0]) * emis[:, 0]
    for t in range(length):
        if t:
            if slices is None:
                cur = (probs.T @ cur) * emis[:, t]
            else:
                cur = ((probs > slices[t]).T @ cur) * emis[:, t]
        if t == length - 1 and right_col is not None:
            if slices is None:
                cur = cur * probs[:, right_col]
            else:
                cur = cur * (probs[:, right_col] > slices[length])
        total = cur.sum()
        if total <= 0.0:
            raise ZeroLikelihoodBlockError("forward pass lost all mass")
        log_norm += log(total)
        cur = cur / total
        fwd[t] = cur
    cols = [0] * length
    w = fwd[length - 1]
    for t in range(length - 1, -1, -1):
        if t < length - 1:
            if slices is None:
                w = fwd[t] * probs[:, cols[t + 1]]
            else:
                w = fwd[t] * (probs[:, cols[t + 1]] > slices[t + 1])
        total = w.sum()
        if total <= 0.0:
            raise ZeroLikelihoodBlockError("backward pass lost all mass")
        u = rng.random() * total
        cols[t] = int(np.searchsorted(np.cumsum(w), u))
    return cols, log_norm


def _fb_small(probs, left_row, emis_t, right_col, rng, slices):
    """Plain-Python forward-backward; semantics match :func:`fb_sample_block`."""
    k1 = len(left_row)
    length = len(emis_t)
    fwd = []
    log_norm = 0.0
    cur = None
    for t in range(length):
        e = emis_t[t]
        if t == 0:
            if slices is None:
                cur = [left_row[k] * e[k] for k in range(k1)]
            else:
                u = slices[0]
                cur = [e[k] if left_row[k] > u else 0.0 for k in range(k1)]
        elif slices is None:
            prev = cur
            cur = [e[k] * sum(probs[i][k] * prev[i] for i in range(k1))
                   for k in range(k1)]
        else:
            prev = cur
            u = slices[t]
            cur = [e[k] * sum(prev[i] for i in range(k1) if probs[i][k] > u)
                   for k in range(k1)]
        if t == length - 1 and right_col is not None:
            if slices is None:
                cur = [cur[k] * probs[k][right_col] for k in range(k1)]
            else:
                u = slices[length]
                cur = [cur[k] if probs[k][right_col] > u else 0.0
                       for k in range(k1)]
        total = sum(cur)
        if total <= 0.0:
            raise ZeroLikelihoodBlockError("forward pass lost all mass")
        log_norm += log(total)
        cur = [v / total for v in cur]
        fwd.append(cur)
    cols = [0] * length
    w = fwd[length - 1]
    for t in range(length - 1, -1, -1):
        if t < length - 1:
            nxt = cols[t + 1]
            if slices is None:
                w = [fwd[t][k] * probs[k][nxt] for k in range(k1)]
            else:
                u = slices[t + 1]
                w = [fwd[t][k] if probs[k][nxt] > u else 0.0
                     for k in range(k1)]
        total = sum(w)
        if total <= 0.0:
            raise ZeroLikelihoodBlockError("backward pass lost all mass")
        u_pick = rng.random() * total
        acc = 0.0
        pick = k1 - 1
        for k in range(k1):
            acc += w[k]
            if u_pick < acc:
                pick = k
                break
        cols[t] = pick
    return cols, log_norm


def score_block_path(probs, left_row, emis, right_col, cols):
    """Log of the unnormalised forward-backward weight of one column path:
    transition terms, emission terms and the boundary term if any."""
    total = log(left_row[cols[0]]) + log(emis[cols[0], 0])
    for t in range(1, len(cols)):
        total += log(probs[cols[t - 1], cols[t]]) + log(emis[cols[t], t])
    if right_col is not None:
        total += log(probs[cols[-1], right_col])
    return total


class LabelCrp:
    """Plain CRP over state labels, used to assign labels to unseen-state
    draws so that repeats, joins with the right context and fresh labels all
    get positive, computable probability."""

    __slots__ = ("gamma", "counts", "total")

    def __init__(self, gamma):
        self.gamma = gamma
        self.counts = {}
        self.total = 0

    def log_prob(self, label):
        c = self.counts.get(label, 0)
        return log((c if c else self.gamma) / (self.total + self.gamma))

    def add(self, label):
        self.counts[label] = self.counts.get(label, 0) + 1
        self.total += 1

    def draw(self, rng, fresh_iter):
        u = rng.random() * (self.total + self.gamma)
        acc = 0.0
        for label, c in self.counts.items():
            acc += c
            if u < acc:
                return label
        return next(fresh_iter)


def _fresh_label_iter(h, exclude):
    # after a block removal, only the block's own labels (and the right
    # context) can still sit in x without a root table, so excluding them
    # plus the served dishes is enough to guarantee freshness
    used = set(exclude)
    used.update(h.trans.root_tables)
    k = 1
    while True:
        if k not in used:
            used.add(k)
            yield k
        k += 1


def block_move(h, t0, t1, rng, beam=False):
    """Resample hidden states of block ``[t0, t1)`` with a forward-backward
    (or slice-restricted) proposal over the current predictive matrix."""
    x, y = h.x, h.y
    undo = UndoLog()
    tracker = RatioTracker()
    tracker.div_log(remove_seq(h, t0, t1, rng, undo))

    pm = PredictiveMatrix(h.trans)
    probs = pm.probs
    new_col = pm.new_col
    labels = pm.states + [NEW]
    emis = emission_weights(h, labels, y[t0:t1])
    left = h.prev_state(t0)
    left_row = pm.row(left)
    right = x[t1] if t1 < len(y) else None
    right_col = pm.col(right) if right is not None else None
    old_cols = [pm.col(x[t]) for t in range(t0, t1)]

    slices = None
    if beam:
        refs = [left_row[old_cols[0]]]
        refs.extend(probs[old_cols[t - 1], old_cols[t]]
                    for t in range(1, t1 - t0))
        if right_col is not None:
            refs.append(probs[old_cols[-1], right_col])
        slices = [rng.random() * p for p in refs]

    try:
        cols, _ = fb_sample_block(probs, left_row, emis, right_col, rng, slices)
    except ZeroLikelihoodBlockError:
        undo.undo_all()
        return False
    tracker.mul_log(score_block_path(probs, left_row, emis, right_col, old_cols))
    tracker.div_log(score_block_path(probs, left_row, emis, right_col, cols))

    # assign concrete labels to unseen-state draws; score the old unseen
    # labels under the same scheme for the reverse density
    q_old = LabelCrp(h.gamma)
    q_new = LabelCrp(h.gamma)
    if right is not None and right_col == new_col:
        q_old.add(right)
        q_new.add(right)
    for t in range(t0, t1):
        if old_cols[t - t0] == new_col:
            tracker.mul_log(q_old.log_prob(x[t]))
            q_old.add(x[t])
    exclude = x[t0:t1] if right is None else x[t0:t1] + [right]
    fresh = _fresh_label_iter(h, exclude)
    x_star = list(x)
    for i, c in enumerate(cols):
        if c == new_col:
            label = q_new.draw(rng, fresh)
            tracker.div_log(q_new.log_prob(label))
            q_new.add(label)
            x_star[t0 + i] = label
        else:
            x_star[t0 + i] = pm.states[c]

    tracker.mul_log(add_seq(h, t0, t1, x_star, rng, undo))
    accepted, _ = tracker.accept(rng)
    if accepted:
        x[t0:t1] = x_star[t0:t1]
    else:
        undo.undo_all()
    return accepted


def draw_blocks(length, block_size, rng):
    """Cover ``[0, length)`` with consecutive blocks of size
    ``block_size`` plus or minus one, boundaries re-drawn per call."""
    blocks = []
    t = 0
    while t < length:
        size = block_size + rng.choice((-1, 0, 1)) if block_size > 1 else 1
        size = max(1, size)
        blocks.append((t, min(length, t + size)))
        t += size
    return blocks


def blocked_sweep(h, block_size, rng, beam=False):
    """One pass over randomly drawn blocks in a fresh random order."""
    blocks = draw_blocks(len(h.y), block_size, rng)
    rng.shuffle(blocks)
    stats = SweepStats()
    for t0, t1 in blocks:
        stats.count(block_move(h, t0, t1, rng, beam=beam))
    return stats


def beam_sweep(h, block_size, rng):
    return blocked_sweep(h, block_size, rng, beam=True)
