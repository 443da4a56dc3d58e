"""Split-merge moves over state labels.

One move either merges two state labels into one or splits a label in two.
The positions affected are grouped into maximal fragments of consecutive
times whose states carry the two labels (anchor positions excluded), and the
fragments are relabelled one at a time, in random order, by a two-label
forward-backward sampler.  A merge is deterministic given the anchors, so its
Hastings correction is the two-label forward-backward density of the old
labelling; a split is the mirror image.

Because every factor a merge accumulates after the removal phase is a
probability, its running accept ratio only decreases; the accept threshold is
therefore drawn up front and the fragment loop aborts as soon as the ratio
falls below it, without changing any decision.
"""

from math import inf, log

from .collapsed_mh import RatioTracker
from .franchise import UndoLog
from .hmm import INITIAL_STATE
from .sweeps import add_seq, remove_seq


class MoveOutcome:
    __slots__ = ("move", "accepted")

    def __init__(self, move, accepted):
        self.move = move  # "split", "merge" or "none"
        self.accepted = accepted


def find_fragments(x, labels, anchors):
    """Maximal runs ``[b, e)`` of positions with states in ``labels``,
    excluding anchor positions (anchors break runs)."""
    out = []
    t, length = 0, len(x)
    while t < length:
        if t in anchors or x[t] not in labels:
            t += 1
            continue
        b = t
        while t < length and t not in anchors and x[t] in labels:
            t += 1
        out.append((b, t))
    return out


def _restricted_fb(h, t0, t1, pair, x_ref, rng=None, path=None):
    """Two-label forward-backward over block ``[t0, t1)``.

    ``x_ref`` supplies the context labels around the block.  With ``path``
    given, returns the normalised log density of that labelling; otherwise
    samples a labelling and returns ``(labels, log_density)``.
    """
    trans, emit, y = h.trans, h.emit, h.y
    ka, kb = pair
    probs = ((trans.prob(ka, ka), trans.prob(ka, kb)),
             (trans.prob(kb, ka), trans.prob(kb, kb)))
    left = x_ref[t0 - 1] if t0 else INITIAL_STATE
    left_row = (trans.prob(left, ka), trans.prob(left, kb))
    right_col = None
    if t1 < len(y):
        right_col = (trans.prob(ka, x_ref[t1]), trans.prob(kb, x_ref[t1]))
    emis = [(emit.prob(ka, y[t]), emit.prob(kb, y[t])) for t in range(t0, t1)]
    length = t1 - t0
    fwd = []
    log_norm = 0.0
    cur = (left_row[0] * emis[0][0], left_row[1] * emis[0][1])
    for t in range(length):
        if t:
            e = emis[t]
            cur = ((probs[0][0] * cur[0] + probs[1][0] * cur[1]) * e[0],
                   (probs[0][1] * cur[0] + probs[1][1] * cur[1]) * e[1])
        if t == length - 1 and right_col is not None:
            cur = (cur[0] * right_col[0], cur[1] * right_col[1])
        total = cur[0] + cur[1]
        log_norm += log(total)
        cur = (cur[0] / total, cur[1] / total)
        fwd.append(cur)
    if path is None:
        cols = [0] * length
        w = fwd[length - 1]
        for t in range(length - 1, -1, -1):
            if t < length - 1:
                nxt = cols[t + 1]
                w = (fwd[t][0] * probs[0][nxt], fwd[t][1] * probs[1][nxt])
            cols[t] = 1 if rng.random() * (w[0] + w[1]) >= w[0] else 0
    else:
        cols = [0 if lab == ka else 1 for lab in path]
    log_path = log(left_row[cols[0]]) + log(emis[0][cols[0]])
    for t in range(1, length):
        log_path += log(probs[cols[t - 1]][cols[t]]) + log(emis[t][cols[t]])
    if right_col is not None:
        log_path += log(right_col[cols[-1]])
    log_density = log_path - log_norm
    if path is None:
        return [pair[c] for c in cols], log_density
    return log_density


def split_merge_move(h, rng, anchors=None, early_stop=True):
    """One split or merge attempt; returns a :class:`MoveOutcome`.

    Anchors are two distinct positions, drawn uniformly unless supplied.
    Equal anchor states attempt a split, unequal ones a merge.  When no
    fragment exists between or around the anchors the move degenerates and
    counts as rejected without touching the state.
    """
    x, y = h.x, h.y
    length = len(y)
    if length < 2:
        raise ValueError("split-merge needs at least two positions")
    r_thr = rng.random()
    log_thr = log(r_thr) if r_thr > 0.0 else -inf
    if anchors is None:
        t1 = rng.randrange(length)
        t2 = rng.randrange(length - 1)
        if t2 >= t1:
            t2 += 1
    else:
        t1, t2 = anchors
        if t1 == t2:
            raise ValueError("anchors must be distinct")
    k1 = x[t1]
    fragments = find_fragments(x, {k1, x[t2]}, {t1, t2})
    rng.shuffle(fragments)
    if not fragments:
        return MoveOutcome("none", False)
    in_fragment = set()
    for b, e in fragments:
        in_fragment.update(range(b, e))
    split = x[t2] == k1
    move = "split" if split else "merge"

    undo = UndoLog()
    tracker = RatioTracker()
    for b, e in reversed(fragments):
        tracker.div_log(remove_seq(h, b, e, rng, undo))
        if not split:
            # reverse-split density of the old labels, fragment absent
            tracker.mul_log(_restricted_fb(h, b, e, (k1, x[t2]), x, path=x[b:e]))

    # customers owned by the second anchor, old labelling
    old2 = x[t2]
    h.emit.remove_customer(old2, y[t2], rng, undo)
    tracker.div_log(log(h.emit.prob(old2, y[t2])))
    if t2 == 0 or t2 - 1 not in in_fragment:
        prev2 = x[t2 - 1] if t2 else INITIAL_STATE
        h.trans.remove_customer(prev2, old2, rng, undo)
        tracker.div_log(log(h.trans.prob(prev2, old2)))
    if t2 + 1 < length and t2 + 1 not in in_fragment:
        h.trans.remove_customer(old2, x[t2 + 1], rng, undo)
        tracker.div_log(log(h.trans.prob(old2, x[t2 + 1])))

    x_star = list(x)
    if split:
        k2 = h.fresh_labels()[0]
        x_star[t2] = k2
    else:
        x_star[t2] = k1
        for b, e in fragments:
            x_star[b:e] = [k1] * (e - b)
    new2 = x_star[t2]

    # second anchor, new labelling (addition order mirrors the removals)
    tracker.mul_log(log(h.emit.prob(new2, y[t2])))
    h.emit.add_customer(new2, y[t2], rng, undo)
    if t2 + 1 < length and t2 + 1 not in in_fragment:
        tracker.mul_log(log(h.trans.prob(new2, x_star[t2 + 1])))
        h.trans.add_customer(new2, x_star[t2 + 1], rng, undo)
    if t2 == 0 or t2 - 1 not in in_fragment:
        prev2 = x_star[t2 - 1] if t2 else INITIAL_STATE
        tracker.mul_log(log(h.trans.prob(prev2, new2)))
        h.trans.add_customer(prev2, new2, rng, undo)

    if split:
        for b, e in fragments:
            path, log_density = _restricted_fb(h, b, e, (k1, k2), x_star, rng=rng)
            x_star[b:e] = path
            tracker.div_log(log_density)
            tracker.mul_log(add_seq(h, b, e, x_star, rng, undo))
    else:
        for b, e in fragments:
            if early_stop and tracker.log_ratio < log_thr:
                undo.undo_all()
                return MoveOutcome(move, False)
            tracker.mul_log(add_seq(h, b, e, x_star, rng, undo))

    if log_thr < min(0.0, tracker.log_ratio):
        h.x = x_star
        return MoveOutcome(move, True)
    undo.undo_all()
    return MoveOutcome(move, False)
