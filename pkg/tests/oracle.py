"""Brute-force reference computations for tiny instances.

Everything here is written directly from the sequential definition of the
two-level CRP, independently of the library's count structures, so the test
suite can cross-check the samplers against exhaustive enumeration.
"""

def crp_franchise_marginal(customers, alpha, gamma, base_size=None):
    """Probability of a (restaurant, dish) customer sequence, summed over all
    table configurations, by explicit recursion over seating choices."""
    n = len(customers)
    tables = {}
    root = {"total": 0}
    total = [0.0]

    def rec(i, acc):
        if i == n:
            total[0] += acc
            return
        j, k = customers[i]
        r = tables.setdefault(j, {})
        lst = r.setdefault(k, [])
        n_j = sum(sum(v) for v in r.values())
        denom = n_j + alpha
        for idx in range(len(lst)):
            c = lst[idx]
            lst[idx] += 1
            rec(i + 1, acc * c / denom)
            lst[idx] -= 1
        m_k = root.get(k, 0)
        if base_size is None:
            w = m_k if m_k else gamma
        else:
            w = m_k + gamma / base_size
        share = w / (root["total"] + gamma)
        lst.append(1)
        root[k] = m_k + 1
        root["total"] += 1
        rec(i + 1, acc * (alpha / denom) * share)
        root["total"] -= 1
        root[k] = m_k
        lst.pop()

    rec(0, 1.0)
    return total[0]


def crp_layout_distribution(customers, alpha, gamma, base_size=None):
    """Distribution over final table layouts for a customer sequence.

    A layout is the sorted tuple of ``(restaurant, dish, sorted table sizes)``
    triples; probabilities are accumulated over every seating path.
    """
    n = len(customers)
    tables = {}
    root = {"total": 0}
    out = {}

    def signature():
        sig = []
        for j, r in tables.items():
            for k, lst in r.items():
                if lst:
                    sig.append((j, k, tuple(sorted(lst))))
        return tuple(sorted(sig))

    def rec(i, acc):
        if i == n:
            sig = signature()
            out[sig] = out.get(sig, 0.0) + acc
            return
        j, k = customers[i]
        r = tables.setdefault(j, {})
        lst = r.setdefault(k, [])
        n_j = sum(sum(v) for v in r.values())
        denom = n_j + alpha
        for idx in range(len(lst)):
            c = lst[idx]
            lst[idx] += 1
            rec(i + 1, acc * c / denom)
            lst[idx] -= 1
        m_k = root.get(k, 0)
        if base_size is None:
            w = m_k if m_k else gamma
        else:
            w = m_k + gamma / base_size
        share = w / (root["total"] + gamma)
        lst.append(1)
        root[k] = m_k + 1
        root["total"] += 1
        rec(i + 1, acc * (alpha / denom) * share)
        root["total"] -= 1
        root[k] = m_k
        lst.pop()

    rec(0, 1.0)
    return out


def hmm_customers(x, y, initial=0):
    """Transition and emission customer sequences implied by (x, y)."""
    trans = []
    emit = []
    prev = initial
    for state, symbol in zip(x, y):
        trans.append((prev, state))
        emit.append((state, symbol))
        prev = state
    return trans, emit


def canonical(x):
    """Relabel a state sequence by order of first appearance (labels from 1)."""
    mapping = {}
    out = []
    for v in x:
        if v not in mapping:
            mapping[v] = len(mapping) + 1
        out.append(mapping[v])
    return tuple(out)


def label_patterns(length):
    """All canonical state sequences of the given length."""
    if length == 0:
        return [()]
    patterns = [(1,)]
    for _ in range(length - 1):
        grown = []
        for p in patterns:
            top = max(p)
            for v in range(1, top + 2):
                grown.append(p + (v,))
        patterns = grown
    return patterns


def hmm_posterior(y, n_symbols, alpha0=1.0, gamma=1.0,
                  alpha_e=1.0, gamma_e=1.0):
    """Exact posterior over canonical hidden sequences given ``y``."""
    weights = {}
    for pattern in label_patterns(len(y)):
        trans, emit = hmm_customers(pattern, y)
        w = crp_franchise_marginal(trans, alpha0, gamma)
        w *= crp_franchise_marginal(emit, alpha_e, gamma_e, n_symbols)
        weights[pattern] = w
    total = sum(weights.values())
    return {p: w / total for p, w in weights.items()}


def total_variation(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def counts_to_dist(counts):
    total = sum(counts.values())
    return {k: v / total for k, v in counts.items()}


def finite_hmm_loglik(pi0, pi, emis, y):
    """Exact forward-algorithm log likelihood of ``y`` under a finite HMM."""
    import numpy as np

    f = np.asarray(pi0, dtype=float) * np.asarray(emis)[:, y[0]]
    total = 0.0
    for t, s in enumerate(y):
        if t:
            f = (np.asarray(pi).T @ f) * np.asarray(emis)[:, s]
        z = f.sum()
        total += float(np.log(z))
        f = f / z
    return total
